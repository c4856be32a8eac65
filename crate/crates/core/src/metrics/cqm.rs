//! Color quality measure: weighted band PSNRs after the reversible color transform.

use crate::color::rct_forward;
use crate::error::{Error, Result};
use crate::image::RasterImage;

use super::pixel::psnr_with_peak;
use super::MetricConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPsnr {
    pub y: f64,
    pub u: f64,
    pub v: f64,
}

fn band_mse(a: &[i16], b: &[i16]) -> f64 {
    let sq: u64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = (x as i32 - y as i32).unsigned_abs() as u64;
            d * d
        })
        .sum();
    sq as f64 / a.len() as f64
}

fn require_color(img: &RasterImage) -> Result<()> {
    if img.channels() == 3 {
        Ok(())
    } else {
        Err(Error::ChannelMismatch {
            expected: 3,
            found: img.channels(),
        })
    }
}

pub fn band_psnrs(gt: &RasterImage, cb: &RasterImage, peak: f64) -> Result<BandPsnr> {
    require_color(gt)?;
    require_color(cb)?;
    gt.ensure_same_shape(cb)?;
    let (a, b) = (rct_forward(gt)?, rct_forward(cb)?);
    Ok(BandPsnr {
        y: psnr_with_peak(band_mse(&a.y, &b.y), peak),
        u: psnr_with_peak(band_mse(&a.u, &b.u), peak),
        v: psnr_with_peak(band_mse(&a.v, &b.v), peak),
    })
}

/// `rw * PSNR_Y + cw * (PSNR_U + PSNR_V) / 2`.
///
/// A band that matches exactly has infinite PSNR, which carries through to
/// the result unless its weight is zero.
pub fn cqm(gt: &RasterImage, cb: &RasterImage, cfg: &MetricConfig) -> Result<f64> {
    let bands = band_psnrs(gt, cb, cfg.band_peak)?;
    let mut total = 0.0;
    if cfg.cqm_rw != 0.0 {
        total += cfg.cqm_rw * bands.y;
    }
    if cfg.cqm_cw != 0.0 {
        total += cfg.cqm_cw * (bands.u + bands.v) / 2.0;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgb(pixels: &[[u8; 3]]) -> RasterImage {
        RasterImage::new(pixels.len(), 1, 3, pixels.concat()).unwrap()
    }

    #[test]
    fn identical_is_infinite() {
        let a = rgb(&[[1, 2, 3], [200, 100, 50]]);
        assert_eq!(
            cqm(&a, &a, &MetricConfig::default()).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn green_difference_touches_every_band() {
        let a = rgb(&[[10, 10, 10], [90, 90, 90]]);
        let b = rgb(&[[10, 30, 10], [90, 90, 90]]);
        let bands = band_psnrs(&a, &b, 255.0).unwrap();
        assert!(bands.y.is_finite() && bands.u.is_finite() && bands.v.is_finite());
        assert!(cqm(&a, &b, &MetricConfig::default()).unwrap().is_finite());
    }

    #[test]
    fn luma_only_weights() {
        let a = rgb(&[[10, 10, 10], [90, 0, 90]]);
        let b = rgb(&[[12, 30, 10], [90, 90, 91]]);
        let cfg = MetricConfig {
            cqm_rw: 1.0,
            cqm_cw: 0.0,
            ..MetricConfig::default()
        };
        let bands = band_psnrs(&a, &b, 255.0).unwrap();
        assert_eq!(cqm(&a, &b, &cfg).unwrap(), bands.y);
    }

    #[test]
    fn gray_rejected() {
        let g = RasterImage::filled(2, 2, &[1]).unwrap();
        assert!(cqm(&g, &g, &MetricConfig::default()).is_err());
    }
}
