//! Color conversions shared by the metrics and the estimation methods.

use crate::error::{Error, Result};
use crate::image::RasterImage;

/// BT.601 luma of one RGB triple, rounded half away from zero.
///
/// Evaluated in thousandths so that ties round exactly.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let scaled = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((scaled + 500) / 1000) as u8
}

/// Single-channel luminance image. Gray inputs are returned unchanged.
pub fn luminance(img: &RasterImage) -> RasterImage {
    if img.channels() == 1 {
        return img.clone();
    }
    let samples = img
        .samples()
        .chunks_exact(3)
        .map(|p| luma(p[0], p[1], p[2]))
        .collect();
    RasterImage::new(img.width(), img.height(), 1, samples).expect("shape preserved")
}

/// Output of the reversible color transform: one luma-like plane and two
/// signed chroma difference planes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedPlanes {
    pub width: usize,
    pub height: usize,
    pub y: Vec<i16>,
    pub u: Vec<i16>,
    pub v: Vec<i16>,
}

/// Integer reversible color transform of one pixel: `(Y, U, V)`.
#[inline]
pub fn rct_pixel(r: u8, g: u8, b: u8) -> (i16, i16, i16) {
    let (r, g, b) = (r as i16, g as i16, b as i16);
    ((r + 2 * g + b) >> 2, r - g, b - g)
}

/// Exact inverse of [`rct_pixel`].
#[inline]
pub fn rct_inverse_pixel(y: i16, u: i16, v: i16) -> (u8, u8, u8) {
    // `>>` on i16 is an arithmetic shift, i.e. floor division by 4
    let g = y - ((u + v) >> 2);
    ((u + g) as u8, g as u8, (v + g) as u8)
}

pub fn rct_forward(img: &RasterImage) -> Result<SignedPlanes> {
    if img.channels() != 3 {
        return Err(Error::ChannelMismatch {
            expected: 3,
            found: img.channels(),
        });
    }
    let n = img.pixel_count();
    let mut planes = SignedPlanes {
        width: img.width(),
        height: img.height(),
        y: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
    };
    for p in img.samples().chunks_exact(3) {
        let (y, u, v) = rct_pixel(p[0], p[1], p[2]);
        planes.y.push(y);
        planes.u.push(u);
        planes.v.push(v);
    }
    Ok(planes)
}

pub fn rct_inverse(planes: &SignedPlanes) -> RasterImage {
    let mut samples = Vec::with_capacity(planes.y.len() * 3);
    for ((&y, &u), &v) in planes.y.iter().zip(&planes.u).zip(&planes.v) {
        let (r, g, b) = rct_inverse_pixel(y, u, v);
        samples.extend_from_slice(&[r, g, b]);
    }
    RasterImage::new(planes.width, planes.height, 3, samples).expect("planes have matching length")
}
