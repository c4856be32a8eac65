//! Binary Netpbm codecs: PGM (`P5`) and PPM (`P6`) with maxval 255.

use std::io::Write;

use crate::error::{Error, Result};
use crate::image::RasterImage;

struct Header {
    channels: u8,
    width: usize,
    height: usize,
    /// Offset of the first raster byte.
    data_start: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    /// Skips whitespace and `#` comments, which may appear anywhere between header tokens.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.bytes.len() {
                Error::Truncated {
                    expected: self.pos + 1,
                    found: self.bytes.len(),
                }
            } else {
                Error::Malformed(format!("expected {what} at byte {start}"))
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Malformed(format!("{what} out of range")))
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 {
        return Err(Error::Truncated {
            expected: 2,
            found: bytes.len(),
        });
    }
    let channels = match &bytes[..2] {
        b"P5" => 1,
        b"P6" => 3,
        m if m[0] == b'P' && (b'1'..=b'7').contains(&m[1]) => {
            return Err(Error::UnsupportedFormat(format!(
                "Netpbm variant {} (only binary P5/P6 are supported)",
                String::from_utf8_lossy(m)
            )))
        }
        _ => return Err(Error::UnsupportedFormat("unrecognized magic number".into())),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(Error::Malformed(format!("zero dimension {width}x{height}")));
    }
    // exactly one whitespace byte separates maxval from the raster
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => return Err(Error::Malformed("missing whitespace after maxval".into())),
        None => {
            return Err(Error::Truncated {
                expected: cur.pos + 1,
                found: bytes.len(),
            })
        }
    }
    Ok(Header {
        channels,
        width,
        height,
        data_start: cur.pos,
    })
}

pub fn decode(bytes: &[u8]) -> Result<RasterImage> {
    let h = parse_header(bytes)?;
    let len = h
        .width
        .checked_mul(h.height)
        .and_then(|n| n.checked_mul(h.channels as usize))
        .ok_or_else(|| Error::Malformed("image dimensions overflow".into()))?;
    let raster = &bytes[h.data_start..];
    if raster.len() < len {
        return Err(Error::Truncated {
            expected: len,
            found: raster.len(),
        });
    }
    RasterImage::new(h.width, h.height, h.channels, raster[..len].to_vec())
}

pub fn encode<W: Write>(img: &RasterImage, mut out: W) -> std::io::Result<()> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    write!(out, "{magic}\n{} {}\n255\n", img.width(), img.height())?;
    out.write_all(img.samples())
}
