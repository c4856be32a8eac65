//! Pixel-wise luminance metrics: AGE, error pixels, clustered error pixels, PSNR.

use crate::color::luminance;
use crate::error::Result;
use crate::image::RasterImage;

/// Integer accumulators of the luminance differences.
pub(crate) struct DiffStats {
    abs_sum: u64,
    sq_sum: u64,
    n: u64,
}

impl DiffStats {
    pub(crate) fn compute(a: &[u8], b: &[u8]) -> Self {
        let (abs_sum, sq_sum) = a.iter().zip(b).fold((0u64, 0u64), |(s, q), (&x, &y)| {
            let d = x.abs_diff(y) as u64;
            (s + d, q + d * d)
        });
        Self {
            abs_sum,
            sq_sum,
            n: a.len() as u64,
        }
    }

    pub(crate) fn age(&self) -> f64 {
        self.abs_sum as f64 / self.n as f64
    }

    pub(crate) fn mse(&self) -> f64 {
        self.sq_sum as f64 / self.n as f64
    }
}

fn luma_pair(gt: &RasterImage, cb: &RasterImage) -> Result<(RasterImage, RasterImage)> {
    gt.ensure_same_size(cb)?;
    Ok((luminance(gt), luminance(cb)))
}

/// Average gray-level error: mean absolute luminance difference.
pub fn age(gt: &RasterImage, cb: &RasterImage) -> Result<f64> {
    let (a, b) = luma_pair(gt, cb)?;
    Ok(DiffStats::compute(a.samples(), b.samples()).age())
}

/// PSNR with peak 255; `+inf` when the images agree exactly.
pub fn psnr(gt: &RasterImage, cb: &RasterImage) -> Result<f64> {
    let (a, b) = luma_pair(gt, cb)?;
    Ok(psnr_from_mse(
        DiffStats::compute(a.samples(), b.samples()).mse(),
    ))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    psnr_with_peak(mse, 255.0)
}

pub(crate) fn psnr_with_peak(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

/// One bit per pixel, set where the luminance difference exceeds the threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub(crate) fn from_luma(width: usize, height: usize, a: &[u8], b: &[u8], tau: u8) -> Self {
        let bits = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| x.abs_diff(y) > tau)
            .collect();
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    /// Error pixels whose four neighbours all lie inside the image and are
    /// error pixels themselves. Border pixels never qualify.
    pub fn clustered_count(&self) -> u64 {
        let (w, h) = (self.width, self.height);
        if w < 3 || h < 3 {
            return 0;
        }
        let mut count = 0;
        for y in 1..h - 1 {
            let row = &self.bits[y * w..(y + 1) * w];
            let up = &self.bits[(y - 1) * w..y * w];
            let down = &self.bits[(y + 1) * w..(y + 2) * w];
            for x in 1..w - 1 {
                if row[x] && row[x - 1] && row[x + 1] && up[x] && down[x] {
                    count += 1;
                }
            }
        }
        count
    }
}

pub fn error_mask(gt: &RasterImage, cb: &RasterImage, tau: u8) -> Result<BinaryMask> {
    let (a, b) = luma_pair(gt, cb)?;
    Ok(BinaryMask::from_luma(
        a.width(),
        a.height(),
        a.samples(),
        b.samples(),
        tau,
    ))
}

pub fn eps(gt: &RasterImage, cb: &RasterImage, tau: u8) -> Result<u64> {
    Ok(error_mask(gt, cb, tau)?.count())
}

pub fn p_eps(gt: &RasterImage, cb: &RasterImage, tau: u8) -> Result<f64> {
    Ok(eps(gt, cb, tau)? as f64 / gt.pixel_count() as f64)
}

pub fn ceps(gt: &RasterImage, cb: &RasterImage, tau: u8) -> Result<u64> {
    Ok(error_mask(gt, cb, tau)?.clustered_count())
}

pub fn p_ceps(gt: &RasterImage, cb: &RasterImage, tau: u8) -> Result<f64> {
    Ok(ceps(gt, cb, tau)? as f64 / gt.pixel_count() as f64)
}
