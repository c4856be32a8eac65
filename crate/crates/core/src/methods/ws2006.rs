//! Stable-subsequence background estimation.
//!
//! Each pixel's temporal line is cut greedily into runs of similar values.
//! Runs shorter than `min_len` are dropped; each remaining run's mean is a
//! hypothesis scored by how many observations of the whole sequence it
//! explains. The mean of the best-supported run is the background.

use crate::error::{Error, Result};
use crate::image::{BootstrapSequence, RasterImage};

use super::{map_pixels, median_background, medoid_index, parse_param, round_sample};

#[derive(Debug, Clone, PartialEq)]
pub struct Ws2006Params {
    /// Largest deviation (gray levels, max over channels) from the running
    /// run mean for a value to extend the run.
    pub eps_stable: f64,
    /// Minimum run length in frames.
    pub min_len: usize,
    /// Inlier tolerance when scoring a run mean against all frames.
    pub delta_consensus: f64,
}

impl Default for Ws2006Params {
    fn default() -> Self {
        Self {
            eps_stable: 10.0,
            min_len: 10,
            delta_consensus: 10.0,
        }
    }
}

impl Ws2006Params {
    pub fn validate(&self) -> Result<()> {
        if [self.eps_stable, self.delta_consensus]
            .iter()
            .any(|v| v.is_nan() || *v <= 0.0)
        {
            return Err(Error::InvalidParam(
                "ws2006: thresholds must be positive".into(),
            ));
        }
        if self.min_len < 2 {
            return Err(Error::InvalidParam(
                "ws2006: min_len must be at least 2".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "eps_stable" => self.eps_stable = parse_param("ws2006", key, value)?,
            "min_len" => self.min_len = parse_param("ws2006", key, value)?,
            "delta_consensus" => self.delta_consensus = parse_param("ws2006", key, value)?,
            _ => {
                return Err(Error::InvalidParam(format!(
                    "ws2006: unknown parameter `{key}`"
                )))
            }
        }
        Ok(())
    }

    pub(crate) fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("eps_stable", self.eps_stable.to_string()),
            ("min_len", self.min_len.to_string()),
            ("delta_consensus", self.delta_consensus.to_string()),
        ]
    }
}

#[derive(Debug, Clone, Copy)]
struct Run {
    len: usize,
    sum: [u64; 3],
}

impl Run {
    fn new(v: &[u8]) -> Self {
        let mut run = Run {
            len: 0,
            sum: [0; 3],
        };
        run.push(v);
        run
    }

    fn push(&mut self, v: &[u8]) {
        for (s, &x) in self.sum.iter_mut().zip(v) {
            *s += x as u64;
        }
        self.len += 1;
    }

    fn mean(&self, c: usize) -> [f64; 3] {
        let mut m = [0.0; 3];
        for (d, s) in m.iter_mut().zip(&self.sum).take(c) {
            *d = *s as f64 / self.len as f64;
        }
        m
    }
}

#[inline]
fn deviation(v: &[u8], mean: &[f64; 3]) -> f64 {
    v.iter()
        .zip(mean)
        .map(|(&x, m)| (x as f64 - m).abs())
        .fold(0.0, f64::max)
}

fn stable_runs(series: &[u8], c: usize, eps_stable: f64) -> Vec<Run> {
    let mut runs = Vec::new();
    let mut frames = series.chunks_exact(c);
    let Some(first) = frames.next() else {
        return runs;
    };
    let mut current = Run::new(first);
    for v in frames {
        if deviation(v, &current.mean(c)) <= eps_stable {
            current.push(v);
        } else {
            runs.push(current);
            current = Run::new(v);
        }
    }
    runs.push(current);
    runs
}

/// Estimates one pixel; `out` receives `c` samples.
pub(crate) fn estimate_pixel(series: &[u8], c: usize, p: &Ws2006Params, out: &mut [u8]) {
    let runs = stable_runs(series, c, p.eps_stable);
    let mut best: Option<(usize, &Run)> = None;
    for run in runs.iter().filter(|r| r.len >= p.min_len) {
        let mean = run.mean(c);
        let score = series
            .chunks_exact(c)
            .filter(|v| deviation(v, &mean) <= p.delta_consensus)
            .count();
        // runs arrive in start order, so strict comparison keeps the earlier one on full ties
        let better = match best {
            None => true,
            Some((s, b)) => score > s || (score == s && run.len > b.len),
        };
        if better {
            best = Some((score, run));
        }
    }
    match best {
        Some((_, run)) => {
            let mean = run.mean(c);
            for (o, m) in out.iter_mut().zip(mean) {
                *o = round_sample(m);
            }
        }
        None => {
            let i = medoid_index(series, c);
            out.copy_from_slice(&series[i * c..(i + 1) * c]);
        }
    }
}

/// Sequences shorter than `min_len` fall back to the temporal medoid.
pub fn ws2006_background(seq: &BootstrapSequence, p: &Ws2006Params) -> Result<RasterImage> {
    p.validate()?;
    if seq.len() < p.min_len {
        return Ok(median_background(seq));
    }
    Ok(map_pixels(seq, |_, series, c, out| {
        estimate_pixel(series, c, p, out)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(series: &[u8], p: &Ws2006Params) -> u8 {
        let mut out = [0u8];
        estimate_pixel(series, 1, p, &mut out);
        out[0]
    }

    #[test]
    fn hand_traced_example() {
        let p = Ws2006Params {
            eps_stable: 10.0,
            min_len: 2,
            delta_consensus: 10.0,
        };
        let s = [100, 100, 101, 50, 100, 99, 100, 200];
        let runs = stable_runs(&s, 1, 10.0);
        let lens: Vec<_> = runs.iter().map(|r| r.len).collect();
        assert_eq!(lens, vec![3, 1, 3, 1]);
        assert_eq!(one(&s, &p), 100);
    }

    #[test]
    fn constant_series() {
        assert_eq!(one(&[42; 30], &Ws2006Params::default()), 42);
    }

    #[test]
    fn long_flicker_does_not_outvote_stable_background() {
        // background 50 for the first 30% of frames, then values spread over [100, 255]
        let mut s = vec![50u8; 30];
        let mut x = 17u32;
        for _ in 0..70 {
            x = x.wrapping_mul(1103515245).wrapping_add(12345);
            s.push(100 + ((x >> 16) % 156) as u8);
        }
        // reference: the longest window of consecutive values all within 10 of each other
        let longest_flat = (0..s.len())
            .map(|i| {
                let mut j = i;
                while j < s.len() && s[i..=j].iter().all(|&v| v.abs_diff(s[i]) <= 10) {
                    j += 1;
                }
                (j - i, s[i])
            })
            .max_by_key(|&(len, _)| len)
            .unwrap();
        assert_eq!(longest_flat.1, 50);
        assert_eq!(one(&s, &Ws2006Params::default()), 50);
    }

    #[test]
    fn no_surviving_run_uses_medoid() {
        let s = [0, 100, 200, 30, 250, 10, 120, 60, 180, 90, 220];
        let i = medoid_index(&s, 1);
        assert_eq!(one(&s, &Ws2006Params::default()), s[i]);
    }

    #[test]
    fn color_runs_use_max_channel_deviation() {
        // channel 2 jumps by 30 halfway: two runs
        let mut s = Vec::new();
        for t in 0..20 {
            s.extend_from_slice(&[10, 10, if t < 12 { 10 } else { 40 }]);
        }
        let runs = stable_runs(&s, 3, 10.0);
        assert_eq!(runs.len(), 2);
        let mut out = [0u8; 3];
        let p = Ws2006Params {
            min_len: 5,
            ..Ws2006Params::default()
        };
        estimate_pixel(&s, 3, &p, &mut out);
        assert_eq!(out, [10, 10, 10]);
    }

    #[test]
    fn short_sequences_fall_back_to_median() {
        let frames = [10u8, 200, 12]
            .iter()
            .map(|&v| RasterImage::filled(1, 1, &[v]).unwrap())
            .collect();
        let seq = BootstrapSequence::new("s", frames, 0).unwrap();
        let out = ws2006_background(&seq, &Ws2006Params::default()).unwrap();
        assert_eq!(out.samples(), &[12]);
    }
}
