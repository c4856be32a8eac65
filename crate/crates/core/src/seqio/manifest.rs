//! Dataset manifests: one `[sequence]` block per bootstrap sequence.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kv::{self, Fields};

/// A printf-style file name template with at most one integer field,
/// e.g. `in%06d.png`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramePattern {
    prefix: String,
    suffix: String,
    width: usize,
    zero_pad: bool,
    raw: String,
}

impl FramePattern {
    pub fn format(&self, index: i64) -> String {
        let digits = if self.zero_pad {
            format!("{index:0width$}", width = self.width)
        } else {
            format!("{index:width$}", width = self.width)
        };
        format!("{}{}{}", self.prefix, digits, self.suffix)
    }
}

impl FromStr for FramePattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidParam(format!("frame pattern `{s}`: {why}"));
        let mut prefix = String::new();
        let mut suffix = String::new();
        let mut field = None;
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            let target = if field.is_none() {
                &mut prefix
            } else {
                &mut suffix
            };
            if c != '%' {
                target.push(c);
                continue;
            }
            if chars.peek() == Some(&'%') {
                chars.next();
                target.push('%');
                continue;
            }
            if field.is_some() {
                return Err(bad("more than one integer field"));
            }
            let mut spec = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_digit() {
                    spec.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            if chars.next() != Some('d') {
                return Err(bad("only %d / %0Nd fields are supported"));
            }
            let zero_pad = spec.starts_with('0');
            let width = if spec.is_empty() {
                0
            } else {
                spec.parse().map_err(|_| bad("bad field width"))?
            };
            field = Some((width, zero_pad));
        }
        let (width, zero_pad) = field.ok_or_else(|| bad("no integer field"))?;
        Ok(Self {
            prefix,
            suffix,
            width,
            zero_pad,
            raw: s.to_string(),
        })
    }
}

impl fmt::Display for FramePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSpec {
    pub name: String,
    pub directory: PathBuf,
    pub pattern: FramePattern,
    pub first: i64,
    pub last: i64,
    pub gt_path: PathBuf,
    /// Expected resolution, checked at load time when present.
    pub size: Option<(usize, usize)>,
}

impl SequenceSpec {
    pub fn frame_path(&self, index: i64) -> PathBuf {
        self.directory.join(self.pattern.format(index))
    }

    pub fn frame_count(&self) -> usize {
        (self.last - self.first + 1).max(0) as usize
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub sequences: Vec<SequenceSpec>,
}

const SBI_MANIFEST: &str = include_str!("../../manifests/sbi.manifest");

fn parse_size(s: &str) -> Option<(usize, usize)> {
    let (w, h) = s.split_once('x')?;
    Some((w.trim().parse().ok()?, h.trim().parse().ok()?))
}

impl Manifest {
    /// Parses manifest text; relative `dir`/`gt` paths are joined onto `root`.
    pub fn parse(source_name: &str, text: &str, root: &Path) -> Result<Self> {
        let mut sequences = Vec::new();
        for block in kv::parse(source_name, text)? {
            let mut f = Fields::new(source_name, &block);
            if block.kind != "sequence" {
                return Err(f.error(block.line, format!("unknown block [{}]", block.kind)));
            }
            let name: String = f.required("name")?;
            let dir: PathBuf = f.required("dir")?;
            let pattern: FramePattern = f.required_str("pattern")?.parse()?;
            let first: i64 = f.required("first")?;
            let last: i64 = f.required("last")?;
            let gt: PathBuf = f.required("gt")?;
            let size = match f.raw("size") {
                None => None,
                Some((v, line)) => Some(
                    parse_size(v).ok_or_else(|| f.error(line, format!("invalid size `{v}`")))?,
                ),
            };
            if first > last {
                return Err(f.error(block.line, format!("{name}: first {first} > last {last}")));
            }
            f.finish()?;
            if sequences.iter().any(|s: &SequenceSpec| s.name == name) {
                return Err(Error::Parse {
                    source_name: source_name.to_string(),
                    line: block.line,
                    message: format!("duplicate sequence `{name}`"),
                });
            }
            sequences.push(SequenceSpec {
                name,
                directory: root.join(dir),
                pattern,
                first,
                last,
                gt_path: root.join(gt),
                size,
            });
        }
        Ok(Self { sequences })
    }

    /// Reads a manifest file. Relative paths resolve against `root` if given,
    /// otherwise against the manifest's own directory.
    pub fn load(path: impl AsRef<Path>, root: Option<&Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = match root {
            Some(r) => r.to_path_buf(),
            None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        Self::parse(&path.display().to_string(), &text, &base)
    }

    /// The seven SBI sequences with their used-frame ranges and final
    /// resolutions, rooted at `root`.
    pub fn sbi(root: &Path) -> Self {
        Self::parse("sbi.manifest", SBI_MANIFEST, root).expect("bundled manifest is valid")
    }

    pub fn to_text(&self, root: &Path) -> String {
        let rel = |p: &Path| p.strip_prefix(root).unwrap_or(p).display().to_string();
        let mut out = String::new();
        for s in &self.sequences {
            let mut entries = vec![
                ("name", s.name.clone()),
                ("dir", rel(&s.directory)),
                ("pattern", s.pattern.to_string()),
                ("first", s.first.to_string()),
                ("last", s.last.to_string()),
                ("gt", rel(&s.gt_path)),
            ];
            if let Some((w, h)) = s.size {
                entries.push(("size", format!("{w}x{h}")));
            }
            kv::write_block(&mut out, "sequence", &entries);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_formats() {
        let p: FramePattern = "in%06d.png".parse().unwrap();
        assert_eq!(p.format(4), "in000004.png");
        let p: FramePattern = "f%d_100%%.ppm".parse().unwrap();
        assert_eq!(p.format(12), "f12_100%.ppm");
        assert!("noindex.png".parse::<FramePattern>().is_err());
        assert!("%d_%d".parse::<FramePattern>().is_err());
        assert!("%s".parse::<FramePattern>().is_err());
    }

    #[test]
    fn bundled_manifest_mirrors_table() {
        let m = Manifest::sbi(Path::new("/data"));
        let rows: Vec<_> = m
            .sequences
            .iter()
            .map(|s| (s.name.as_str(), s.first, s.last, s.size.unwrap()))
            .collect();
        assert_eq!(
            rows,
            vec![
                ("Hall&Monitor", 4, 299, (352, 240)),
                ("HighwayI", 0, 439, (320, 240)),
                ("HighwayII", 0, 499, (320, 240)),
                ("CaVignal", 0, 257, (200, 136)),
                ("Foliage", 6, 399, (200, 144)),
                ("People&Foliage", 0, 340, (320, 240)),
                ("Snellen", 0, 320, (144, 144)),
            ]
        );
        assert_eq!(m.sequences[0].frame_count(), 296);
        assert_eq!(m.sequences[6].frame_count(), 321);
        assert!(m.sequences[0].directory.starts_with("/data"));
    }

    #[test]
    fn rejects_unknown_keys_and_blocks() {
        let root = Path::new(".");
        let ok = "[sequence]\nname=a\ndir=d\npattern=%d.pgm\nfirst=0\nlast=0\ngt=g.pgm\n";
        assert_eq!(Manifest::parse("m", ok, root).unwrap().sequences.len(), 1);
        let e = Manifest::parse("m", &format!("{ok}colour = red\n"), root).unwrap_err();
        assert!(e.to_string().contains("unknown key `colour`"), "{e}");
        assert!(Manifest::parse("m", "[seq]\nname=a\n", root).is_err());
        assert!(Manifest::parse("m", &ok.replace("first=0", "first=3"), root).is_err());
        assert!(Manifest::parse("m", &format!("{ok}\n{ok}"), root).is_err());
    }

    #[test]
    fn text_round_trip() {
        let root = Path::new("/r");
        let m = Manifest::sbi(root);
        let again = Manifest::parse("x", &m.to_text(root), root).unwrap();
        assert_eq!(m, again);
    }
}
