//! Reference implementations written straight from the metric definitions,
//! plus scene builders shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use proptest::prelude::*;
use sbibench::image::RasterImage;
use sbibench::metrics::MetricReport;
use sbibench::synth::{Background, Occluder, OccluderColor, SceneScript};

pub const TAU: u8 = 20;

pub fn luma_of(img: &RasterImage) -> Vec<f64> {
    (0..img.pixel_count())
        .map(|i| {
            let p = img.pixel(i);
            if p.len() == 1 {
                p[0] as f64
            } else {
                let y = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
                // nudge so exact .5 ties round up despite binary representation
                (y + 1e-9).round()
            }
        })
        .collect()
}

pub fn age(gt: &RasterImage, cb: &RasterImage) -> f64 {
    let (a, b) = (luma_of(gt), luma_of(cb));
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

pub fn error_at(gt: &RasterImage, cb: &RasterImage, tau: u8) -> Vec<bool> {
    let (a, b) = (luma_of(gt), luma_of(cb));
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs() > tau as f64)
        .collect()
}

pub fn eps(gt: &RasterImage, cb: &RasterImage, tau: u8) -> u64 {
    error_at(gt, cb, tau).into_iter().filter(|&e| e).count() as u64
}

pub fn ceps(gt: &RasterImage, cb: &RasterImage, tau: u8) -> u64 {
    let err = error_at(gt, cb, tau);
    let (w, h) = (gt.width() as i64, gt.height() as i64);
    let is_err = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && err[(y * w + x) as usize];
    let mut n = 0;
    for y in 0..h {
        for x in 0..w {
            if is_err(x, y)
                && is_err(x - 1, y)
                && is_err(x + 1, y)
                && is_err(x, y - 1)
                && is_err(x, y + 1)
            {
                n += 1;
            }
        }
    }
    n
}

fn psnr_of(sq_sum: f64, n: usize, peak: f64) -> f64 {
    if sq_sum == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (peak * peak / (sq_sum / n as f64)).log10()
}

pub fn psnr(gt: &RasterImage, cb: &RasterImage) -> f64 {
    let (a, b) = (luma_of(gt), luma_of(cb));
    psnr_of(
        a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum(),
        a.len(),
        255.0,
    )
}

fn rct(img: &RasterImage) -> [Vec<f64>; 3] {
    let mut out = [Vec::new(), Vec::new(), Vec::new()];
    for i in 0..img.pixel_count() {
        let p = img.pixel(i);
        let (r, g, b) = (p[0] as f64, p[1] as f64, p[2] as f64);
        out[0].push(((r + 2.0 * g + b) / 4.0).floor());
        out[1].push(r - g);
        out[2].push(b - g);
    }
    out
}

pub fn cqm(gt: &RasterImage, cb: &RasterImage) -> Option<f64> {
    if gt.channels() != 3 {
        return None;
    }
    let (a, b) = (rct(gt), rct(cb));
    let band = |k: usize| {
        let sq = a[k].iter().zip(&b[k]).map(|(x, y)| (x - y).powi(2)).sum();
        psnr_of(sq, a[k].len(), 255.0)
    };
    Some(0.9449 * band(0) + 0.0551 * (band(1) + band(2)) / 2.0)
}

struct Grid {
    w: usize,
    h: usize,
    v: Vec<f64>,
}

impl Grid {
    fn at(&self, x: usize, y: usize) -> f64 {
        self.v[y * self.w + x]
    }

    fn halve(&self) -> Grid {
        let (w, h) = (self.w.div_ceil(2), self.h.div_ceil(2));
        let mut v = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let mut s = 0.0;
                for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    let sx = (2 * x + dx).min(self.w - 1);
                    let sy = (2 * y + dy).min(self.h - 1);
                    s += self.at(sx, sy);
                }
                v.push(s / 4.0);
            }
        }
        Grid { w, h, v }
    }
}

/// Mean (contrast-structure, full SSIM) over every placement of a 2-D 11x11
/// Gaussian window that fits in the image.
fn ssim_terms(a: &Grid, b: &Grid) -> (f64, f64) {
    const K: usize = 11;
    let sigma = 1.5f64;
    let mut win = [[0.0f64; K]; K];
    let mut total = 0.0;
    for (i, row) in win.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            *v = (-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp();
            total += *v;
        }
    }
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let (mut cs_sum, mut ssim_sum, mut n) = (0.0, 0.0, 0usize);
    for y0 in 0..=a.h - K {
        for x0 in 0..=a.w - K {
            let (mut ma, mut mb) = (0.0, 0.0);
            for i in 0..K {
                for j in 0..K {
                    let wgt = win[i][j] / total;
                    ma += wgt * a.at(x0 + j, y0 + i);
                    mb += wgt * b.at(x0 + j, y0 + i);
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..K {
                for j in 0..K {
                    let wgt = win[i][j] / total;
                    let (da, db) = (a.at(x0 + j, y0 + i) - ma, b.at(x0 + j, y0 + i) - mb);
                    va += wgt * da * da;
                    vb += wgt * db * db;
                    cov += wgt * da * db;
                }
            }
            let cs = (2.0 * cov + c2) / (va + vb + c2);
            let l = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
            cs_sum += cs;
            ssim_sum += l * cs;
            n += 1;
        }
    }
    (cs_sum / n as f64, ssim_sum / n as f64)
}

pub fn ms_ssim(gt: &RasterImage, cb: &RasterImage) -> f64 {
    let weights = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];
    let (w, h) = (gt.width(), gt.height());
    let mut m = 5;
    while m > 1 && w.min(h) < 11 * (1 << (m - 1)) {
        m -= 1;
    }
    let wsum: f64 = weights[..m].iter().sum();
    let mut a = Grid {
        w,
        h,
        v: luma_of(gt),
    };
    let mut b = Grid {
        w,
        h,
        v: luma_of(cb),
    };
    let mut out = 1.0;
    for (j, wj) in weights[..m].iter().enumerate() {
        let (cs, ssim) = ssim_terms(&a, &b);
        let term = if j + 1 == m { ssim } else { cs };
        out *= term.max(0.0).powf(wj / wsum);
        a = a.halve();
        b = b.halve();
    }
    out.clamp(0.0, 1.0)
}

pub fn report(gt: &RasterImage, cb: &RasterImage, tau: u8) -> MetricReport {
    let n = gt.pixel_count() as f64;
    let (e, c) = (eps(gt, cb, tau), ceps(gt, cb, tau));
    MetricReport {
        age: age(gt, cb),
        eps: e,
        p_eps: e as f64 / n,
        ceps: c,
        p_ceps: c as f64 / n,
        ms_ssim: ms_ssim(gt, cb),
        psnr: psnr(gt, cb),
        cqm: cqm(gt, cb),
    }
}

pub fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Differences between a computed report and the oracle, one per metric.
pub fn report_mismatches(got: &MetricReport, want: &MetricReport) -> Vec<String> {
    let mut bad = Vec::new();
    if got.eps != want.eps {
        bad.push(format!("EPs {} vs {}", got.eps, want.eps));
    }
    if got.ceps != want.ceps {
        bad.push(format!("CEPs {} vs {}", got.ceps, want.ceps));
    }
    for (name, g, w) in [
        ("AGE", got.age, want.age),
        ("pEPs", got.p_eps, want.p_eps),
        ("pCEPs", got.p_ceps, want.p_ceps),
        ("PSNR", got.psnr, want.psnr),
    ] {
        if !close_rel(g, w, 1e-9) {
            bad.push(format!("{name} {g} vs {w}"));
        }
    }
    if (got.ms_ssim - want.ms_ssim).abs() > 1e-6 {
        bad.push(format!("MS-SSIM {} vs {}", got.ms_ssim, want.ms_ssim));
    }
    match (got.cqm, want.cqm) {
        (Some(g), Some(w)) if close_rel(g, w, 1e-9) => {}
        (None, None) => {}
        (g, w) => bad.push(format!("CQM {g:?} vs {w:?}")),
    }
    bad
}

/// How the second image of a pair relates to the first.
#[derive(Debug, Clone, Copy)]
pub enum PairKind {
    Independent,
    Perturbed,
    SmoothPerturbed,
}

/// Random image pairs with sides in `11..=max`, mixing unrelated pairs,
/// small perturbations and perturbed smooth images.
pub fn image_pair(max: usize) -> impl Strategy<Value = (RasterImage, RasterImage)> {
    let kind = prop_oneof![
        Just(PairKind::Independent),
        Just(PairKind::Perturbed),
        Just(PairKind::SmoothPerturbed)
    ];
    (11..=max, 11..=max, prop_oneof![Just(1u8), Just(3u8)], kind)
        .prop_flat_map(|(w, h, c, kind)| {
            let n = w * h * c as usize;
            (
                Just((w, h, c, kind)),
                proptest::collection::vec(any::<u8>(), n),
                proptest::collection::vec(any::<u8>(), n),
                proptest::collection::vec(-30i16..=30, n),
            )
        })
        .prop_map(|((w, h, c, kind), a, b, d)| {
            let c_us = c as usize;
            let base: Vec<u8> = match kind {
                PairKind::SmoothPerturbed => (0..a.len())
                    .map(|i| {
                        let (x, y) = ((i / c_us) % w, (i / c_us) / w);
                        ((x * 200 / w + y * 50 / h) as u8).wrapping_add((i % c_us) as u8 * 10)
                    })
                    .collect(),
                _ => a,
            };
            let other: Vec<u8> = match kind {
                PairKind::Independent => b,
                _ => base
                    .iter()
                    .zip(&d)
                    .map(|(&v, &dv)| (v as i16 + dv).clamp(0, 255) as u8)
                    .collect(),
            };
            (
                RasterImage::new(w, h, c, base).unwrap(),
                RasterImage::new(w, h, c, other).unwrap(),
            )
        })
}

pub fn static_box(
    x: usize,
    y: usize,
    w: usize,
    h: usize,
    color: OccluderColor,
    active: (usize, usize),
) -> Occluder {
    Occluder {
        x,
        y,
        w,
        h,
        color,
        active,
        velocity: (0, 0),
    }
}

/// 64x64 color scene over a smooth gradient, no noise.
pub fn gradient_scene(frames: usize) -> SceneScript {
    SceneScript::new(
        64,
        64,
        frames,
        Background::Gradient {
            from: vec![40, 90, 140],
            to: vec![160, 120, 60],
        },
    )
}

/// AGE restricted to the pixels inside a rectangle.
pub fn region_age(
    gt: &RasterImage,
    cb: &RasterImage,
    x0: usize,
    y0: usize,
    w: usize,
    h: usize,
) -> f64 {
    let (a, b) = (luma_of(gt), luma_of(cb));
    let mut s = 0.0;
    for y in y0..y0 + h {
        for x in x0..x0 + w {
            let i = y * gt.width() + x;
            s += (a[i] - b[i]).abs();
        }
    }
    s / (w * h) as f64
}
