//! Background accuracy metrics for a (ground truth, computed background) pair.
//!
//! AGE, EPs, pEPs, CEPs, pCEPs, PSNR and MS-SSIM are computed on luminance;
//! CQM needs color inputs and works on reversible-transform bands.

mod cqm;
mod msssim;
mod pixel;

use std::fmt;

use crate::color::luminance;
use crate::error::{Error, Result};
use crate::image::RasterImage;

pub use cqm::{band_psnrs, cqm, BandPsnr};
pub use msssim::{ms_ssim, ms_ssim_gray, scales_for};
pub use pixel::{age, ceps, eps, error_mask, p_ceps, p_eps, psnr, psnr_from_mse, BinaryMask};

/// Standard five-scale exponents.
pub const MSSSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

#[derive(Debug, Clone, PartialEq)]
pub struct MetricConfig {
    /// Gray-level threshold for error pixels (a difference must exceed it).
    pub tau: u8,
    pub msssim_scales: usize,
    pub msssim_weights: Vec<f64>,
    pub msssim_window: usize,
    pub msssim_sigma: f64,
    pub msssim_k1: f64,
    pub msssim_k2: f64,
    /// CQM weight of the luma band PSNR.
    pub cqm_rw: f64,
    /// CQM weight of the mean chroma band PSNR.
    pub cqm_cw: f64,
    pub band_peak: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            tau: 20,
            msssim_scales: 5,
            msssim_weights: MSSSIM_WEIGHTS.to_vec(),
            msssim_window: 11,
            msssim_sigma: 1.5,
            msssim_k1: 0.01,
            msssim_k2: 0.03,
            cqm_rw: 0.9449,
            cqm_cw: 0.0551,
            band_peak: 255.0,
        }
    }
}

impl MetricConfig {
    pub fn with_tau(tau: u8) -> Self {
        Self {
            tau,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParam(m));
        if self.msssim_scales == 0 || self.msssim_weights.len() != self.msssim_scales {
            return bad(format!(
                "{} MS-SSIM weights given for {} scales",
                self.msssim_weights.len(),
                self.msssim_scales
            ));
        }
        // weights are renormalized over the scales in use, so only the sign matters
        let sum: f64 = self.msssim_weights.iter().sum();
        if sum.is_nan() || sum <= 0.0 || self.msssim_weights.iter().any(|w| w.is_nan() || *w < 0.0)
        {
            return bad(format!(
                "MS-SSIM weights must be non-negative with a positive sum, got {sum}"
            ));
        }
        if self.msssim_window == 0 || self.msssim_sigma.is_nan() || self.msssim_sigma <= 0.0 {
            return bad("MS-SSIM window and sigma must be positive".into());
        }
        if (self.cqm_rw + self.cqm_cw - 1.0).abs() > 1e-9 || self.cqm_rw < 0.0 || self.cqm_cw < 0.0
        {
            return bad(format!(
                "CQM weights must be non-negative and sum to 1, got {} + {}",
                self.cqm_rw, self.cqm_cw
            ));
        }
        if self.band_peak.is_nan() || self.band_peak <= 0.0 {
            return bad("band peak must be positive".into());
        }
        Ok(())
    }
}

/// The eight accuracy figures for one (GT, CB) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub age: f64,
    pub eps: u64,
    pub p_eps: f64,
    pub ceps: u64,
    pub p_ceps: f64,
    pub ms_ssim: f64,
    pub psnr: f64,
    /// Absent for grayscale inputs.
    pub cqm: Option<f64>,
}

impl MetricReport {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        Some(match metric {
            Metric::Age => self.age,
            Metric::Eps => self.eps as f64,
            Metric::PEps => self.p_eps,
            Metric::Ceps => self.ceps as f64,
            Metric::PCeps => self.p_ceps,
            Metric::MsSsim => self.ms_ssim,
            Metric::Psnr => self.psnr,
            Metric::Cqm => return self.cqm,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Age,
    Eps,
    PEps,
    Ceps,
    PCeps,
    MsSsim,
    Psnr,
    Cqm,
}

impl Metric {
    /// Report column order.
    pub const ALL: [Metric; 8] = [
        Metric::Age,
        Metric::Eps,
        Metric::PEps,
        Metric::Ceps,
        Metric::PCeps,
        Metric::MsSsim,
        Metric::Psnr,
        Metric::Cqm,
    ];

    pub fn lower_is_better(self) -> bool {
        matches!(
            self,
            Metric::Age | Metric::Eps | Metric::PEps | Metric::Ceps | Metric::PCeps
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Age => "AGE",
            Metric::Eps => "EPs",
            Metric::PEps => "pEPs",
            Metric::Ceps => "CEPs",
            Metric::PCeps => "pCEPs",
            Metric::MsSsim => "MSSSIM",
            Metric::Psnr => "PSNR",
            Metric::Cqm => "CQM",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// All eight metrics, sharing one luminance conversion per image.
pub fn compute_all(gt: &RasterImage, cb: &RasterImage, cfg: &MetricConfig) -> Result<MetricReport> {
    cfg.validate()?;
    gt.ensure_same_shape(cb)?;
    let (ly, lc) = (luminance(gt), luminance(cb));
    let stats = pixel::DiffStats::compute(ly.samples(), lc.samples());
    let mask = BinaryMask::from_luma(ly.width(), ly.height(), ly.samples(), lc.samples(), cfg.tau);
    let n = gt.pixel_count() as f64;
    let eps = mask.count();
    let ceps = mask.clustered_count();
    let ms_ssim = ms_ssim_gray(&ly, &lc, cfg)?;
    let cqm = if gt.channels() == 3 {
        Some(cqm::cqm(gt, cb, cfg)?)
    } else {
        None
    };
    Ok(MetricReport {
        age: stats.age(),
        eps,
        p_eps: eps as f64 / n,
        ceps,
        p_ceps: ceps as f64 / n,
        ms_ssim,
        psnr: psnr_from_mse(stats.mse()),
        cqm,
    })
}
