//! Raster images and bootstrap sequences.

use std::fmt;

use crate::error::{Error, Result};

/// An 8-bit raster with one (gray) or three (RGB) interleaved channels,
/// stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: u8,
    samples: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: u8, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        let expected = width * height * channels as usize;
        if samples.len() != expected {
            return Err(Error::InvalidImage(format!(
                "expected {expected} samples for {width}x{height}x{channels}, got {}",
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    /// An image with every sample of every pixel set to `pixel`.
    pub fn filled(width: usize, height: usize, pixel: &[u8]) -> Result<Self> {
        let channels =
            u8::try_from(pixel.len()).map_err(|_| Error::InvalidImage("pixel too wide".into()))?;
        let samples = pixel
            .iter()
            .copied()
            .cycle()
            .take(width * height * pixel.len())
            .collect();
        Self::new(width, height, channels, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    /// Number of pixels, `width * height`.
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    /// Samples of the pixel at linear index `idx`.
    pub fn pixel(&self, idx: usize) -> &[u8] {
        let c = self.channels as usize;
        &self.samples[idx * c..idx * c + c]
    }

    pub fn pixel_at(&self, x: usize, y: usize) -> &[u8] {
        self.pixel(y * self.width + x)
    }

    pub fn same_shape(&self, other: &RasterImage) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub(crate) fn ensure_same_shape(&self, other: &RasterImage) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::dims(self.shape(), other.shape()))
        }
    }

    pub(crate) fn ensure_same_size(&self, other: &RasterImage) -> Result<()> {
        if self.width == other.width && self.height == other.height {
            Ok(())
        } else {
            Err(Error::dims(self.shape(), other.shape()))
        }
    }

    pub fn shape(&self) -> Shape {
        Shape {
            width: self.width,
            height: self.height,
            channels: self.channels,
        }
    }
}

impl fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub width: usize,
    pub height: usize,
    pub channels: u8,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.height, self.channels)
    }
}

/// The frames available for estimating a background, in temporal order.
#[derive(Debug, Clone)]
pub struct BootstrapSequence {
    name: String,
    frames: Vec<RasterImage>,
    first_index: i64,
}

impl BootstrapSequence {
    pub fn new(
        name: impl Into<String>,
        frames: Vec<RasterImage>,
        first_index: i64,
    ) -> Result<Self> {
        let Some(head) = frames.first() else {
            return Err(Error::InvalidImage(
                "a sequence needs at least one frame".into(),
            ));
        };
        if let Some(bad) = frames.iter().find(|f| !f.same_shape(head)) {
            return Err(Error::dims(head.shape(), bad.shape()));
        }
        Ok(Self {
            name: name.into(),
            frames,
            first_index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn frames(&self) -> &[RasterImage] {
        &self.frames
    }

    /// Original frame number of `frames()[0]`.
    pub fn first_index(&self) -> i64 {
        self.first_index
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> Shape {
        self.frames[0].shape()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn channels(&self) -> u8 {
        self.frames[0].channels()
    }

    /// Reordered copy, used to check order-invariance properties.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            frames: order.iter().map(|&i| self.frames[i].clone()).collect(),
            first_index: self.first_index,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sample_count() {
        assert!(RasterImage::new(2, 2, 1, vec![0; 3]).is_err());
        assert!(RasterImage::new(0, 2, 1, vec![]).is_err());
        assert!(RasterImage::new(1, 1, 2, vec![0, 0]).is_err());
    }

    #[test]
    fn sequence_requires_uniform_shape() {
        let a = RasterImage::filled(2, 2, &[1]).unwrap();
        let b = RasterImage::filled(2, 3, &[1]).unwrap();
        assert!(BootstrapSequence::new("x", vec![a.clone(), b], 0).is_err());
        assert!(BootstrapSequence::new("x", vec![], 0).is_err());
        assert_eq!(BootstrapSequence::new("x", vec![a], 3).unwrap().len(), 1);
    }
}
