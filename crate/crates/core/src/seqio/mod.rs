//! Image and sequence ingestion.
//!
//! Frames are stored as directories of numbered files; binary PGM/PPM and
//! 8-bit PNG are supported.

mod manifest;
mod pngio;
mod pnm;

use std::fs;
use std::io::{BufWriter, Cursor};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{BootstrapSequence, RasterImage};

pub use manifest::{FramePattern, Manifest, SequenceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Ppm,
    Png,
}

impl ImageFormat {
    pub fn from_extension(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pgm" => Some(Self::Pgm),
            "ppm" => Some(Self::Ppm),
            "png" => Some(Self::Png),
            _ => None,
        }
    }

    /// Netpbm flavour matching a channel count.
    pub fn netpbm_for(channels: u8) -> Self {
        if channels == 1 {
            Self::Pgm
        } else {
            Self::Ppm
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Pgm => "pgm",
            Self::Ppm => "ppm",
            Self::Png => "png",
        }
    }
}

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Decodes an in-memory image, detecting the format from its leading bytes.
pub fn decode_image(bytes: &[u8]) -> Result<RasterImage> {
    if bytes.starts_with(PNG_SIGNATURE) {
        pngio::decode(Cursor::new(bytes))
    } else if bytes.first() == Some(&b'P') {
        pnm::decode(bytes)
    } else if bytes.is_empty() {
        Err(Error::Truncated {
            expected: 2,
            found: 0,
        })
    } else {
        Err(Error::UnsupportedFormat(
            "unrecognized file signature".into(),
        ))
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|e| match e {
        Error::Malformed(m) => Error::Malformed(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn encode_image(img: &RasterImage, format: ImageFormat) -> Result<Vec<u8>> {
    check_format(img, format)?;
    let mut out = Vec::with_capacity(img.samples().len() + 64);
    match format {
        ImageFormat::Pgm | ImageFormat::Ppm => {
            pnm::encode(img, &mut out).map_err(|e| Error::io("<memory>", e))?
        }
        ImageFormat::Png => pngio::encode(img, &mut out)?,
    }
    Ok(out)
}

pub fn save_image(img: &RasterImage, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let path = path.as_ref();
    check_format(img, format)?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        ImageFormat::Pgm | ImageFormat::Ppm => {
            pnm::encode(img, &mut w).map_err(|e| Error::io(path, e))?
        }
        ImageFormat::Png => pngio::encode(img, &mut w).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })?,
    }
    std::io::Write::flush(&mut w).map_err(|e| Error::io(path, e))
}

fn check_format(img: &RasterImage, format: ImageFormat) -> Result<()> {
    let expected = match format {
        ImageFormat::Pgm => 1,
        ImageFormat::Ppm => 3,
        ImageFormat::Png => return Ok(()),
    };
    if img.channels() == expected {
        Ok(())
    } else {
        Err(Error::ChannelMismatch {
            expected,
            found: img.channels(),
        })
    }
}

/// Loads every frame named by `spec` plus its ground truth.
pub fn load_sequence(spec: &SequenceSpec) -> Result<(BootstrapSequence, RasterImage)> {
    if spec.first > spec.last {
        return Err(Error::InvalidParam(format!(
            "{}: first frame {} is after last frame {}",
            spec.name, spec.first, spec.last
        )));
    }
    let frames = (spec.first..=spec.last)
        .into_par_iter()
        .map(|i| {
            let path = spec.frame_path(i);
            if !path.is_file() {
                return Err(Error::MissingFrame { index: i, path });
            }
            load_image(&path)
        })
        .collect::<Result<Vec<_>>>()?;
    let gt = load_image(&spec.gt_path)?;
    let seq = BootstrapSequence::new(spec.name.clone(), frames, spec.first)?;
    gt.ensure_same_shape(&seq.frames()[0])?;
    if let Some((w, h)) = spec.size {
        if (w, h) != (gt.width(), gt.height()) {
            return Err(Error::dims(
                format!("manifest size {w}x{h}"),
                format!("data {}x{}", gt.width(), gt.height()),
            ));
        }
    }
    Ok((seq, gt))
}
