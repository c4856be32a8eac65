//! Temporal medoid: per pixel, the observed value minimizing the summed
//! L-infinity distance to all other observations of that pixel.

use crate::image::{BootstrapSequence, RasterImage};

use super::map_pixels;

#[inline]
fn linf(a: &[u8], b: &[u8]) -> u32 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.abs_diff(*y) as u32)
        .max()
        .unwrap_or(0)
}

/// Index of the medoid of a frame-major series with `c` samples per frame.
/// Ties go to the earliest frame.
pub fn medoid_index(series: &[u8], c: usize) -> usize {
    if c == 1 {
        return gray_medoid_index(series);
    }
    let t = series.len() / c;
    let obs = |i: usize| &series[i * c..(i + 1) * c];
    let mut best = (u64::MAX, 0);
    for i in 0..t {
        let vi = obs(i);
        let mut cost = 0u64;
        for j in 0..t {
            cost += linf(vi, obs(j)) as u64;
            if cost > best.0 {
                break;
            }
        }
        if cost < best.0 {
            best = (cost, i);
        }
    }
    best.1
}

/// Gray series: distance sums for all 256 levels from a histogram.
fn gray_medoid_index(series: &[u8]) -> usize {
    let mut hist = [0u64; 256];
    for &v in series {
        hist[v as usize] += 1;
    }
    // cost(v) = sum_s |v - s|, built by sweeping v upward
    let total = series.len() as u64;
    let mut cost = [0u64; 256];
    cost[0] = series.iter().map(|&v| v as u64).sum();
    let mut below_or_eq = hist[0];
    for v in 1..256 {
        // moving from v-1 to v: every sample <= v-1 gets one further, every other one closer
        cost[v] = cost[v - 1] + below_or_eq - (total - below_or_eq);
        below_or_eq += hist[v];
    }
    let mut best = (u64::MAX, 0);
    for (i, &v) in series.iter().enumerate() {
        if cost[v as usize] < best.0 {
            best = (cost[v as usize], i);
        }
    }
    best.1
}

pub fn median_background(seq: &BootstrapSequence) -> RasterImage {
    map_pixels(seq, |_, series, c, out| {
        let i = medoid_index(series, c);
        out.copy_from_slice(&series[i * c..(i + 1) * c]);
    })
}
