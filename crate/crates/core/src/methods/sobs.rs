//! Self-organizing background model.
//!
//! Every pixel owns an `n x n` patch of weight vectors, all starting at the
//! pixel's first observation. Each later observation that lies within
//! `eps_match` of its best-matching weight pulls that weight and its
//! patch neighbours toward it; observations farther away leave the model
//! untouched.

use crate::error::{Error, Result};
use crate::image::{BootstrapSequence, RasterImage};

use super::{map_pixels, parse_param, round_sample};

#[derive(Debug, Clone, PartialEq)]
pub struct SobsParams {
    /// Side of the weight patch; each pixel has `n * n` weights.
    pub n: usize,
    /// Largest per-channel distance at which an observation updates the model.
    pub eps_match: f64,
    /// Learning rate at the start of a pass.
    pub alpha0: f64,
    /// Learning rate at the end of a pass.
    pub alpha1: f64,
    pub epochs: usize,
}

impl Default for SobsParams {
    fn default() -> Self {
        Self {
            n: 3,
            eps_match: 20.0,
            alpha0: 1.0,
            alpha1: 0.05,
            epochs: 1,
        }
    }
}

impl SobsParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParam(format!("sobs: {m}")));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if !(self.alpha1 > 0.0 && self.alpha1 <= self.alpha0 && self.alpha0 <= 1.0) {
            return bad("learning rates must satisfy 0 < alpha1 <= alpha0 <= 1");
        }
        if self.eps_match.is_nan() || self.eps_match < 0.0 {
            return bad("eps_match must be non-negative");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        Ok(())
    }

    pub(crate) fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = parse_param("sobs", key, value)?,
            "eps_match" => self.eps_match = parse_param("sobs", key, value)?,
            "alpha0" => self.alpha0 = parse_param("sobs", key, value)?,
            "alpha1" => self.alpha1 = parse_param("sobs", key, value)?,
            "epochs" => self.epochs = parse_param("sobs", key, value)?,
            _ => {
                return Err(Error::InvalidParam(format!(
                    "sobs: unknown parameter `{key}`"
                )))
            }
        }
        Ok(())
    }

    pub(crate) fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n", self.n.to_string()),
            ("eps_match", self.eps_match.to_string()),
            ("alpha0", self.alpha0.to_string()),
            ("alpha1", self.alpha1.to_string()),
            ("epochs", self.epochs.to_string()),
        ]
    }
}

/// How a single background value is read out of a trained pixel model.
#[derive(Debug, Clone, Copy)]
pub enum ExtractionMode<'a> {
    /// The weight closest to the ground-truth pixel. Only meaningful for
    /// scoring, since it needs the answer.
    Oracle(&'a RasterImage),
    /// The weight that was best match most often.
    Frequency,
}

struct PixelModel {
    c: usize,
    weights: Vec<[f64; 3]>,
    hits: Vec<u64>,
}

impl PixelModel {
    fn new(n: usize, c: usize, first: &[u8]) -> Self {
        let mut w = [0.0; 3];
        for (d, &s) in w.iter_mut().zip(first) {
            *d = s as f64;
        }
        Self {
            c,
            weights: vec![w; n * n],
            hits: vec![0; n * n],
        }
    }

    fn distance(&self, w: &[f64; 3], v: &[f64; 3]) -> f64 {
        (0..self.c).map(|k| (w[k] - v[k]).abs()).fold(0.0, f64::max)
    }

    /// Best-matching weight, lowest index on ties.
    fn best_match(&self, v: &[f64; 3]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, w) in self.weights.iter().enumerate() {
            let d = self.distance(w, v);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Weight that won most matches, lowest index on ties.
    fn most_frequent(&self) -> usize {
        let mut best = 0;
        for (i, &h) in self.hits.iter().enumerate() {
            if h > self.hits[best] {
                best = i;
            }
        }
        best
    }
}

fn to_vec3(v: &[u8]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (d, &s) in out.iter_mut().zip(v) {
        *d = s as f64;
    }
    out
}

fn train(series: &[u8], c: usize, p: &SobsParams) -> PixelModel {
    let n = p.n;
    let mut model = PixelModel::new(n, c, &series[..c]);
    let t = series.len() / c;
    let sigma = n as f64 / 2.0;
    // Gaussian factor for each grid offset within the 8-neighbourhood
    let falloff = |dr: i64, dc: i64| (-((dr * dr + dc * dc) as f64) / (2.0 * sigma * sigma)).exp();

    for epoch in 0..p.epochs {
        let start = if epoch == 0 { 1 } else { 0 };
        let steps = t - start;
        for (k, frame) in (start..t).enumerate() {
            let alpha = if steps > 1 {
                p.alpha0 + (p.alpha1 - p.alpha0) * k as f64 / (steps - 1) as f64
            } else {
                p.alpha0
            };
            let v = to_vec3(&series[frame * c..(frame + 1) * c]);
            let (best, dist) = model.best_match(&v);
            if dist > p.eps_match {
                continue;
            }
            model.hits[best] += 1;
            let (br, bc) = ((best / n) as i64, (best % n) as i64);
            for r in (br - 1).max(0)..=(br + 1).min(n as i64 - 1) {
                for col in (bc - 1).max(0)..=(bc + 1).min(n as i64 - 1) {
                    let rate = alpha * falloff(r - br, col - bc);
                    let w = &mut model.weights[r as usize * n + col as usize];
                    for ch in 0..c {
                        w[ch] += rate * (v[ch] - w[ch]);
                    }
                }
            }
        }
    }
    model
}

pub fn sobs_background(
    seq: &BootstrapSequence,
    p: &SobsParams,
    mode: ExtractionMode<'_>,
) -> Result<RasterImage> {
    p.validate()?;
    if let ExtractionMode::Oracle(gt) = mode {
        gt.ensure_same_shape(&seq.frames()[0])?;
    }
    Ok(map_pixels(seq, |idx, series, c, out| {
        let model = train(series, c, p);
        let pick = match mode {
            ExtractionMode::Oracle(gt) => model.best_match(&to_vec3(gt.pixel(idx))).0,
            ExtractionMode::Frequency => model.most_frequent(),
        };
        for (o, &w) in out.iter_mut().zip(&model.weights[pick]) {
            *o = round_sample(w);
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray_seq(values: &[u8]) -> BootstrapSequence {
        let frames = values
            .iter()
            .map(|&v| RasterImage::filled(2, 1, &[v]).unwrap())
            .collect();
        BootstrapSequence::new("s", frames, 0).unwrap()
    }

    #[test]
    fn constant_sequence_is_fixed_point() {
        let seq = gray_seq(&[77; 12]);
        let gt = RasterImage::filled(2, 1, &[0]).unwrap();
        for mode in [ExtractionMode::Frequency, ExtractionMode::Oracle(&gt)] {
            let out = sobs_background(&seq, &SobsParams::default(), mode).unwrap();
            assert_eq!(out.samples(), &[77, 77]);
        }
    }

    #[test]
    fn single_weight_full_rate_tracks_last_frame() {
        let p = SobsParams {
            n: 1,
            eps_match: 255.0,
            alpha0: 1.0,
            alpha1: 1.0,
            epochs: 1,
        };
        let seq = gray_seq(&[5, 250, 17, 99, 3]);
        let out = sobs_background(&seq, &p, ExtractionMode::Frequency).unwrap();
        assert_eq!(out.samples(), &[3, 3]);
    }

    #[test]
    fn distant_observations_are_ignored() {
        // frame 0 sets the model; everything else is beyond eps_match
        let seq = gray_seq(&[40, 200, 210, 220, 41, 205]);
        let out = sobs_background(&seq, &SobsParams::default(), ExtractionMode::Frequency).unwrap();
        assert!(
            out.samples().iter().all(|&v| v.abs_diff(40) <= 1),
            "{:?}",
            out.samples()
        );
    }

    #[test]
    fn oracle_picks_weight_nearest_truth() {
        // weights diversify: index 0 drifts toward 60, far corners stay at 50
        let seq = gray_seq(&[50, 60, 60, 60, 60, 60]);
        let p = SobsParams {
            eps_match: 30.0,
            ..SobsParams::default()
        };
        let near_50 = RasterImage::filled(2, 1, &[50]).unwrap();
        let near_60 = RasterImage::filled(2, 1, &[60]).unwrap();
        let a = sobs_background(&seq, &p, ExtractionMode::Oracle(&near_50)).unwrap();
        let b = sobs_background(&seq, &p, ExtractionMode::Oracle(&near_60)).unwrap();
        assert_eq!(a.samples()[0], 50);
        assert!(b.samples()[0] >= 58, "{:?}", b.samples());
    }

    #[test]
    fn oracle_shape_checked() {
        let seq = gray_seq(&[1, 2]);
        let gt = RasterImage::filled(3, 1, &[0]).unwrap();
        assert!(
            sobs_background(&seq, &SobsParams::default(), ExtractionMode::Oracle(&gt)).is_err()
        );
    }
}
