//! Multi-scale structural similarity on luminance.
//!
//! Local statistics use a normalized Gaussian window applied over valid
//! positions only. Between scales both images are low-passed with a 2x2 box
//! (edge samples replicated) and decimated by two.

use crate::color::luminance;
use crate::error::{Error, Result};
use crate::image::RasterImage;

use super::MetricConfig;

const DYNAMIC_RANGE: f64 = 255.0;

struct Plane {
    w: usize,
    h: usize,
    data: Vec<f64>,
}

impl Plane {
    fn from_gray(img: &RasterImage) -> Self {
        Self {
            w: img.width(),
            h: img.height(),
            data: img.samples().iter().map(|&v| v as f64).collect(),
        }
    }

    fn mul(&self, other: &Plane) -> Plane {
        Plane {
            w: self.w,
            h: self.h,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    fn downsample(&self) -> Plane {
        let (w2, h2) = (self.w.div_ceil(2), self.h.div_ceil(2));
        let at = |x: usize, y: usize| self.data[y.min(self.h - 1) * self.w + x.min(self.w - 1)];
        let mut data = Vec::with_capacity(w2 * h2);
        for y in 0..h2 {
            for x in 0..w2 {
                let (sx, sy) = (2 * x, 2 * y);
                data.push(
                    0.25 * (at(sx, sy) + at(sx + 1, sy) + at(sx, sy + 1) + at(sx + 1, sy + 1)),
                );
            }
        }
        Plane { w: w2, h: h2, data }
    }

    /// Separable correlation with `kernel`, keeping only positions where the
    /// window lies fully inside the plane.
    fn filter_valid(&self, kernel: &[f64]) -> Plane {
        let k = kernel.len();
        let (ow, oh) = (self.w + 1 - k, self.h + 1 - k);
        let mut horiz = vec![0.0; ow * self.h];
        for y in 0..self.h {
            let row = &self.data[y * self.w..(y + 1) * self.w];
            for x in 0..ow {
                horiz[y * ow + x] = kernel.iter().zip(&row[x..x + k]).map(|(a, b)| a * b).sum();
            }
        }
        let mut data = vec![0.0; ow * oh];
        for y in 0..oh {
            for x in 0..ow {
                data[y * ow + x] = kernel
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * horiz[(y + i) * ow + x])
                    .sum();
            }
        }
        Plane { w: ow, h: oh, data }
    }
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let center = (size as f64 - 1.0) / 2.0;
    let raw: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - center;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

/// Number of scales usable for an image whose smaller side is `min_dim`:
/// the configured count, reduced until the coarsest scale still holds one window.
pub fn scales_for(width: usize, height: usize, cfg: &MetricConfig) -> Result<usize> {
    let min_dim = width.min(height);
    let window = cfg.msssim_window;
    if min_dim < window {
        return Err(Error::ImageTooSmall {
            width,
            height,
            window,
        });
    }
    let mut scales = cfg.msssim_scales;
    while scales > 1 && min_dim < window << (scales - 1) {
        scales -= 1;
    }
    Ok(scales)
}

/// Mean contrast-structure and mean full SSIM at one scale.
fn scale_terms(a: &Plane, b: &Plane, kernel: &[f64], c1: f64, c2: f64) -> (f64, f64) {
    let mu_a = a.filter_valid(kernel);
    let mu_b = b.filter_valid(kernel);
    let e_aa = a.mul(a).filter_valid(kernel);
    let e_bb = b.mul(b).filter_valid(kernel);
    let e_ab = a.mul(b).filter_valid(kernel);
    let mut cs_sum = 0.0;
    let mut ssim_sum = 0.0;
    for i in 0..mu_a.data.len() {
        let (ma, mb) = (mu_a.data[i], mu_b.data[i]);
        let var_a = e_aa.data[i] - ma * ma;
        let var_b = e_bb.data[i] - mb * mb;
        let cov = e_ab.data[i] - ma * mb;
        let cs = (2.0 * cov + c2) / (var_a + var_b + c2);
        let lum = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
        cs_sum += cs;
        ssim_sum += lum * cs;
    }
    let n = mu_a.data.len() as f64;
    (cs_sum / n, ssim_sum / n)
}

/// MS-SSIM of two same-size single-channel images, clamped to [0, 1].
pub fn ms_ssim_gray(a: &RasterImage, b: &RasterImage, cfg: &MetricConfig) -> Result<f64> {
    a.ensure_same_size(b)?;
    let scales = scales_for(a.width(), a.height(), cfg)?;
    let weights = &cfg.msssim_weights[..scales];
    let wsum: f64 = weights.iter().sum();
    let kernel = gaussian_kernel(cfg.msssim_window, cfg.msssim_sigma);
    let c1 = (cfg.msssim_k1 * DYNAMIC_RANGE).powi(2);
    let c2 = (cfg.msssim_k2 * DYNAMIC_RANGE).powi(2);

    let mut pa = Plane::from_gray(a);
    let mut pb = Plane::from_gray(b);
    let mut value = 1.0;
    for (scale, &w) in weights.iter().enumerate() {
        let (cs, ssim) = scale_terms(&pa, &pb, &kernel, c1, c2);
        let term = if scale + 1 == scales { ssim } else { cs };
        // negative correlation maps to zero similarity
        value *= term.max(0.0).powf(w / wsum);
        if scale + 1 < scales {
            pa = pa.downsample();
            pb = pb.downsample();
        }
    }
    Ok(value.clamp(0.0, 1.0))
}

pub fn ms_ssim(gt: &RasterImage, cb: &RasterImage, cfg: &MetricConfig) -> Result<f64> {
    gt.ensure_same_size(cb)?;
    ms_ssim_gray(&luminance(gt), &luminance(cb), cfg)
}
