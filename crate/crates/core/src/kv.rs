//! The `[block]` + `key = value` text format shared by dataset manifests and
//! scene scripts.
//!
//! ```text
//! # comment
//! [sequence]
//! name = HighwayI
//! first = 0
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub kind: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

pub fn parse(source_name: &str, text: &str) -> Result<Vec<Block>> {
    let err = |line: usize, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let kind = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, format!("unterminated block header `{line}`")))?
                .trim();
            if kind.is_empty() {
                return Err(err(line_no, "empty block name".into()));
            }
            blocks.push(Block {
                kind: kind.to_string(),
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(err(line_no, "empty key".into()));
        }
        let block = blocks.last_mut().ok_or_else(|| {
            err(
                line_no,
                format!("`{key}` appears before any [block] header"),
            )
        })?;
        if block.entries.iter().any(|e| e.key == key) {
            return Err(err(line_no, format!("duplicate key `{key}`")));
        }
        block.entries.push(Entry {
            key: key.to_string(),
            value: value.trim().to_string(),
            line: line_no,
        });
    }
    Ok(blocks)
}

/// Typed access to a block's entries that tracks which keys were consumed, so
/// unknown keys can be rejected.
pub struct Fields<'a> {
    source_name: &'a str,
    block: &'a Block,
    used: Vec<bool>,
}

impl<'a> Fields<'a> {
    pub fn new(source_name: &'a str, block: &'a Block) -> Self {
        Self {
            source_name,
            block,
            used: vec![false; block.entries.len()],
        }
    }

    pub fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            source_name: self.source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub fn raw(&mut self, key: &str) -> Option<(&'a str, usize)> {
        let idx = self.block.entries.iter().position(|e| e.key == key)?;
        self.used[idx] = true;
        let e = &self.block.entries[idx];
        Some((e.value.as_str(), e.line))
    }

    pub fn required_str(&mut self, key: &str) -> Result<&'a str> {
        self.raw(key).map(|(v, _)| v).ok_or_else(|| {
            self.error(
                self.block.line,
                format!("[{}] block is missing `{key}`", self.block.kind),
            )
        })
    }

    pub fn required<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let value = self.required_str(key)?;
        let line = self.raw(key).map_or(self.block.line, |(_, l)| l);
        value
            .parse()
            .map_err(|_| self.error(line, format!("invalid value `{value}` for `{key}`")))
    }

    pub fn optional<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((value, line)) => value
                .parse()
                .map(Some)
                .map_err(|_| self.error(line, format!("invalid value `{value}` for `{key}`"))),
        }
    }

    /// Fails on the first key that was never requested.
    pub fn finish(self) -> Result<()> {
        match self.used.iter().position(|u| !u) {
            None => Ok(()),
            Some(i) => {
                let e = &self.block.entries[i];
                Err(self.error(
                    e.line,
                    format!("unknown key `{}` in [{}] block", e.key, self.block.kind),
                ))
            }
        }
    }
}

/// Appends one block to `out` in the same text format.
pub fn write_block(out: &mut String, kind: &str, entries: &[(&str, String)]) {
    if !out.is_empty() {
        out.push('\n');
    }
    let _ = writeln!(out, "[{kind}]");
    for (k, v) in entries {
        let _ = writeln!(out, "{k} = {v}");
    }
}
