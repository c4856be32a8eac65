//! Block-level background completion on a grid MRF.
//!
//! 1. Every block location clusters its temporal line of blocks into
//!    representatives (first observation of each cluster) with support counts.
//! 2. Blocks whose dominant representative covers at least `stable_frac` of
//!    the frames are fixed first.
//! 3. Remaining blocks are filled greedily, most-constrained first, choosing
//!    the representative with the smallest seam energy against assigned
//!    neighbours.
//! 4. ICM sweeps re-choose every block given its neighbours until nothing
//!    changes or `max_sweeps` is reached.
//!
//! Seam energy between two adjacent blocks is the mean squared difference of
//! the pixel pairs straddling their shared edge.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{BootstrapSequence, RasterImage};

use super::parse_param;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockMrfParams {
    /// Block side in pixels; must divide both image dimensions.
    pub block: usize,
    /// Mean absolute difference at or below which an observation joins a representative.
    pub cand_thresh: f64,
    /// Support fraction needed to fix a block before completion.
    pub stable_frac: f64,
    pub max_sweeps: usize,
}

impl Default for BlockMrfParams {
    fn default() -> Self {
        Self {
            block: 8,
            cand_thresh: 15.0,
            stable_frac: 0.8,
            max_sweeps: 10,
        }
    }
}

impl BlockMrfParams {
    pub fn validate(&self) -> Result<()> {
        if self.block == 0 {
            return Err(Error::InvalidParam(
                "blockmrf: block must be positive".into(),
            ));
        }
        if !(self.stable_frac > 0.0 && self.stable_frac <= 1.0) {
            return Err(Error::InvalidParam(
                "blockmrf: stable_frac must be in (0, 1]".into(),
            ));
        }
        if self.cand_thresh.is_nan() || self.cand_thresh < 0.0 {
            return Err(Error::InvalidParam(
                "blockmrf: cand_thresh must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "block" => self.block = parse_param("blockmrf", key, value)?,
            "cand_thresh" => self.cand_thresh = parse_param("blockmrf", key, value)?,
            "stable_frac" => self.stable_frac = parse_param("blockmrf", key, value)?,
            "max_sweeps" => self.max_sweeps = parse_param("blockmrf", key, value)?,
            _ => {
                return Err(Error::InvalidParam(format!(
                    "blockmrf: unknown parameter `{key}`"
                )))
            }
        }
        Ok(())
    }

    pub(crate) fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("block", self.block.to_string()),
            ("cand_thresh", self.cand_thresh.to_string()),
            ("stable_frac", self.stable_frac.to_string()),
            ("max_sweeps", self.max_sweeps.to_string()),
        ]
    }
}

struct Representative {
    /// `block * block * channels` samples, row-major.
    pixels: Vec<u8>,
    support: usize,
}

/// Candidate representatives of every block location.
struct Grid {
    block: usize,
    channels: usize,
    cols: usize,
    rows: usize,
    cands: Vec<Vec<Representative>>,
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
    Up,
    Down,
}

impl Grid {
    fn build(seq: &BootstrapSequence, p: &BlockMrfParams) -> Self {
        let (b, c) = (p.block, seq.channels() as usize);
        let cols = seq.width() / b;
        let rows = seq.height() / b;
        let width = seq.width();
        let cands = (0..cols * rows)
            .into_par_iter()
            .map(|bi| {
                let (bx, by) = (bi % cols, bi / cols);
                let mut reps: Vec<Representative> = Vec::new();
                let mut obs = vec![0u8; b * b * c];
                for frame in seq.frames() {
                    let s = frame.samples();
                    for r in 0..b {
                        let start = ((by * b + r) * width + bx * b) * c;
                        obs[r * b * c..(r + 1) * b * c].copy_from_slice(&s[start..start + b * c]);
                    }
                    let mut nearest: Option<(usize, u64)> = None;
                    for (i, rep) in reps.iter().enumerate() {
                        let sad: u64 = rep
                            .pixels
                            .iter()
                            .zip(&obs)
                            .map(|(x, y)| x.abs_diff(*y) as u64)
                            .sum();
                        if nearest.is_none_or(|(_, d)| sad < d) {
                            nearest = Some((i, sad));
                        }
                    }
                    match nearest {
                        Some((i, sad)) if sad as f64 / obs.len() as f64 <= p.cand_thresh => {
                            reps[i].support += 1
                        }
                        _ => reps.push(Representative {
                            pixels: obs.clone(),
                            support: 1,
                        }),
                    }
                }
                reps
            })
            .collect();
        Grid {
            block: b,
            channels: c,
            cols,
            rows,
            cands,
        }
    }

    fn neighbours(&self, bi: usize) -> impl Iterator<Item = (usize, Side)> + '_ {
        let (bx, by) = (bi % self.cols, bi / self.cols);
        let left = (bx > 0).then(|| (bi - 1, Side::Left));
        let right = (bx + 1 < self.cols).then(|| (bi + 1, Side::Right));
        let up = (by > 0).then(|| (bi - self.cols, Side::Up));
        let down = (by + 1 < self.rows).then(|| (bi + self.cols, Side::Down));
        [left, right, up, down].into_iter().flatten()
    }

    /// Sum of squared differences across the edge between `a` and its
    /// neighbour `n` lying on `side`.
    fn seam_ssd(&self, a: &[u8], n: &[u8], side: Side) -> u64 {
        let (b, c) = (self.block, self.channels);
        let at = |px: &[u8], x: usize, y: usize, ch: usize| px[(y * b + x) * c + ch] as i64;
        let mut sum = 0u64;
        for i in 0..b {
            for ch in 0..c {
                let d = match side {
                    Side::Left => at(a, 0, i, ch) - at(n, b - 1, i, ch),
                    Side::Right => at(a, b - 1, i, ch) - at(n, 0, i, ch),
                    Side::Up => at(a, i, 0, ch) - at(n, i, b - 1, ch),
                    Side::Down => at(a, i, b - 1, ch) - at(n, i, 0, ch),
                };
                sum += (d * d) as u64;
            }
        }
        sum
    }

    /// Integer seam cost of giving block `bi` representative `r`, against
    /// every neighbour that already has a label.
    fn local_ssd(&self, labels: &[Option<usize>], bi: usize, r: usize) -> u64 {
        let a = &self.cands[bi][r].pixels;
        self.neighbours(bi)
            .filter_map(|(ni, side)| {
                labels[ni].map(|l| self.seam_ssd(a, &self.cands[ni][l].pixels, side))
            })
            .sum()
    }

    /// Lowest seam cost; ties go to the higher-support, then earlier, representative.
    fn best_label(&self, labels: &[Option<usize>], bi: usize) -> (usize, u64) {
        let mut best: Option<(usize, u64)> = None;
        for r in 0..self.cands[bi].len() {
            let e = self.local_ssd(labels, bi, r);
            let better = match best {
                None => true,
                Some((br, be)) => {
                    e < be || (e == be && self.cands[bi][r].support > self.cands[bi][br].support)
                }
            };
            if better {
                best = Some((r, e));
            }
        }
        best.expect("every block has at least one representative")
    }

    fn total_ssd(&self, labels: &[usize]) -> u64 {
        let mut sum = 0;
        for bi in 0..labels.len() {
            let a = &self.cands[bi][labels[bi]].pixels;
            for (ni, side) in self.neighbours(bi) {
                // each edge once
                if matches!(side, Side::Right | Side::Down) {
                    sum += self.seam_ssd(a, &self.cands[ni][labels[ni]].pixels, side);
                }
            }
        }
        sum
    }

    fn seam_len(&self) -> f64 {
        (self.block * self.channels) as f64
    }

    fn top(&self, bi: usize) -> usize {
        let reps = &self.cands[bi];
        let mut best = 0;
        for (i, r) in reps.iter().enumerate() {
            if r.support > reps[best].support {
                best = i;
            }
        }
        best
    }
}

/// The stitched background together with the labelling diagnostics.
#[derive(Debug, Clone)]
pub struct BlockMrfSolution {
    pub image: RasterImage,
    /// Chosen representative index per block, row-major.
    pub labels: Vec<usize>,
    pub seeded: usize,
    /// Total seam energy after completion, then after each re-optimization sweep.
    pub sweep_energies: Vec<f64>,
    pub candidates_per_block: Vec<usize>,
}

pub fn blockmrf_solve(seq: &BootstrapSequence, p: &BlockMrfParams) -> Result<BlockMrfSolution> {
    p.validate()?;
    if !seq.width().is_multiple_of(p.block) || !seq.height().is_multiple_of(p.block) {
        return Err(Error::InvalidParam(format!(
            "blockmrf: block size {} does not divide {}x{}",
            p.block,
            seq.width(),
            seq.height()
        )));
    }
    let grid = Grid::build(seq, p);
    let n = grid.cols * grid.rows;
    let total_frames = seq.len() as f64;
    let mut labels: Vec<Option<usize>> = vec![None; n];

    let mut seeded = 0;
    for (bi, label) in labels.iter_mut().enumerate() {
        let top = grid.top(bi);
        if grid.cands[bi][top].support as f64 >= p.stable_frac * total_frames {
            *label = Some(top);
            seeded += 1;
        }
    }

    // completion, most-constrained block first
    loop {
        let mut pick: Option<(usize, usize)> = None;
        for bi in 0..n {
            if labels[bi].is_some() {
                continue;
            }
            let assigned = grid
                .neighbours(bi)
                .filter(|(ni, _)| labels[*ni].is_some())
                .count();
            if pick.is_none_or(|(_, k)| assigned > k) {
                pick = Some((bi, assigned));
            }
        }
        let Some((bi, _)) = pick else { break };
        labels[bi] = Some(grid.best_label(&labels, bi).0);
    }

    let mut labels: Vec<usize> = labels
        .into_iter()
        .map(|l| l.expect("all blocks labelled"))
        .collect();
    let mut energies = vec![grid.total_ssd(&labels) as f64 / grid.seam_len()];
    let mut opt: Vec<Option<usize>> = labels.iter().copied().map(Some).collect();
    for _ in 0..p.max_sweeps {
        let mut changed = false;
        for bi in 0..n {
            let current = opt[bi].expect("labelled");
            let current_e = grid.local_ssd(&opt, bi, current);
            let (r, e) = grid.best_label(&opt, bi);
            if e < current_e {
                opt[bi] = Some(r);
                changed = true;
            }
        }
        labels = opt.iter().map(|l| l.expect("labelled")).collect();
        energies.push(grid.total_ssd(&labels) as f64 / grid.seam_len());
        if !changed {
            break;
        }
    }

    let (w, c, b) = (seq.width(), grid.channels, grid.block);
    let mut out = vec![0u8; w * seq.height() * c];
    for (bi, &l) in labels.iter().enumerate() {
        let (bx, by) = (bi % grid.cols, bi / grid.cols);
        let px = &grid.cands[bi][l].pixels;
        for r in 0..b {
            let start = ((by * b + r) * w + bx * b) * c;
            out[start..start + b * c].copy_from_slice(&px[r * b * c..(r + 1) * b * c]);
        }
    }
    Ok(BlockMrfSolution {
        image: RasterImage::new(w, seq.height(), c as u8, out)?,
        labels,
        seeded,
        sweep_energies: energies,
        candidates_per_block: grid.cands.iter().map(Vec::len).collect(),
    })
}

pub fn blockmrf_background(seq: &BootstrapSequence, p: &BlockMrfParams) -> Result<RasterImage> {
    Ok(blockmrf_solve(seq, p)?.image)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq_of(frames: Vec<RasterImage>) -> BootstrapSequence {
        BootstrapSequence::new("s", frames, 0).unwrap()
    }

    fn ramp(w: usize, h: usize) -> RasterImage {
        let s = (0..w * h)
            .map(|i| (40 + (i % w) * 2 + (i / w)) as u8)
            .collect();
        RasterImage::new(w, h, 1, s).unwrap()
    }

    #[test]
    fn constant_sequence() {
        let f = RasterImage::filled(16, 8, &[9, 8, 7]).unwrap();
        let sol = blockmrf_solve(&seq_of(vec![f.clone(); 5]), &BlockMrfParams::default()).unwrap();
        assert_eq!(sol.image, f);
        assert!(sol.candidates_per_block.iter().all(|&k| k == 1));
        assert_eq!(sol.seeded, 2);
    }

    #[test]
    fn indivisible_block_size() {
        let f = RasterImage::filled(10, 8, &[0]).unwrap();
        assert!(blockmrf_background(&seq_of(vec![f]), &BlockMrfParams::default()).is_err());
    }

    #[test]
    fn seeded_blocks_keep_their_dominant_representative() {
        let bg = ramp(16, 16);
        let mut frames = vec![bg.clone(); 9];
        // one frame with a bright square in the top-left block
        let mut s = bg.clone().into_samples();
        for y in 0..8 {
            for x in 0..8 {
                s[y * 16 + x] = 250;
            }
        }
        frames.push(RasterImage::new(16, 16, 1, s).unwrap());
        let sol = blockmrf_solve(&seq_of(frames), &BlockMrfParams::default()).unwrap();
        assert_eq!(sol.seeded, 4);
        assert_eq!(sol.image, bg);
    }

    #[test]
    fn seam_energy_of_flat_image_is_zero() {
        let f = RasterImage::filled(16, 16, &[3]).unwrap();
        let sol = blockmrf_solve(&seq_of(vec![f; 3]), &BlockMrfParams::default()).unwrap();
        assert!(sol.sweep_energies.iter().all(|&e| e == 0.0));
    }
}
