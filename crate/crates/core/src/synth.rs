//! Synthetic bootstrap sequences with a known background.
//!
//! Every random draw (texture, flicker, noise) comes from a SplitMix64 value
//! keyed by seed, frame, pixel, purpose and channel, so output does not
//! depend on rendering order or thread count.

use std::path::Path;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::image::{BootstrapSequence, RasterImage};
use crate::kv::{self, Fields};
use crate::seqio::{save_image, FramePattern, ImageFormat, Manifest, SequenceSpec};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One SplitMix64 output for the state reached by absorbing `parts` in order.
fn keyed(parts: &[u64]) -> u64 {
    let mut state = 0u64;
    for &p in parts {
        state = splitmix_finalize(state.wrapping_add(GOLDEN) ^ p);
    }
    splitmix_finalize(state.wrapping_add(GOLDEN))
}

/// Uniform in the open interval (0, 1).
fn unit(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

#[derive(Clone, Copy)]
#[repr(u64)]
enum Purpose {
    Texture = 1,
    Flicker = 2,
    Noise = 3,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Background {
    Flat(Vec<u8>),
    /// Linear blend from `from` at the top-left corner to `to` at the bottom-right.
    Gradient {
        from: Vec<u8>,
        to: Vec<u8>,
    },
    /// Bilinearly interpolated value noise on a lattice of `cell` pixels, in `[lo, hi]`.
    Texture {
        cell: usize,
        lo: u8,
        hi: u8,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OccluderColor {
    Fixed(Vec<u8>),
    /// Each channel of each covered pixel drawn uniformly from `[lo, hi]` every frame.
    Flicker {
        lo: u8,
        hi: u8,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Occluder {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    pub color: OccluderColor,
    /// First and last active frame, inclusive.
    pub active: (usize, usize),
    /// Pixels per frame; the rectangle stops at the image border.
    pub velocity: (i64, i64),
}

impl Occluder {
    /// Top-left corner at frame `t`, if active.
    pub fn position(&self, t: usize, width: usize, height: usize) -> Option<(usize, usize)> {
        if t < self.active.0 || t > self.active.1 {
            return None;
        }
        let dt = (t - self.active.0) as i64;
        let x = (self.x as i64 + self.velocity.0 * dt).clamp(0, (width - self.w) as i64);
        let y = (self.y as i64 + self.velocity.1 * dt).clamp(0, (height - self.h) as i64);
        Some((x as usize, y as usize))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneScript {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub channels: u8,
    pub frames: usize,
    pub seed: u64,
    pub background: Background,
    pub occluders: Vec<Occluder>,
    pub noise_sigma: f64,
}

impl SceneScript {
    pub fn new(width: usize, height: usize, frames: usize, background: Background) -> Self {
        let channels = match &background {
            Background::Flat(c) => c.len() as u8,
            Background::Gradient { from, .. } => from.len() as u8,
            Background::Texture { .. } => 3,
        };
        Self {
            name: "synthetic".into(),
            width,
            height,
            channels,
            frames,
            seed: 0,
            background,
            occluders: Vec::new(),
            noise_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParam(format!("scene: {m}")));
        if self.width == 0 || self.height == 0 || self.frames == 0 {
            return bad("width, height and frames must be positive".into());
        }
        if self.channels != 1 && self.channels != 3 {
            return bad(format!("channels must be 1 or 3, got {}", self.channels));
        }
        if self.noise_sigma.is_nan() || self.noise_sigma < 0.0 {
            return bad("noise_sigma must be non-negative".into());
        }
        let c = self.channels as usize;
        match &self.background {
            Background::Flat(v) if v.len() != c => {
                return bad("background color has wrong channel count".into())
            }
            Background::Gradient { from, to } if from.len() != c || to.len() != c => {
                return bad("gradient colors have wrong channel count".into())
            }
            Background::Texture { cell, lo, hi } if *cell == 0 || lo > hi => {
                return bad("texture needs cell > 0 and lo <= hi".into())
            }
            _ => {}
        }
        for (i, o) in self.occluders.iter().enumerate() {
            if o.w == 0 || o.h == 0 || o.x + o.w > self.width || o.y + o.h > self.height {
                return bad(format!("occluder {i} rectangle lies outside the image"));
            }
            if o.active.0 > o.active.1 || o.active.1 >= self.frames {
                return bad(format!("occluder {i} active interval out of range"));
            }
            match &o.color {
                OccluderColor::Fixed(v) if v.len() != c => {
                    return bad(format!("occluder {i} color has wrong channel count"))
                }
                OccluderColor::Flicker { lo, hi } if lo > hi => {
                    return bad(format!("occluder {i} flicker range is empty"))
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn background_pixel(&self, x: usize, y: usize, out: &mut [u8]) {
        match &self.background {
            Background::Flat(v) => out.copy_from_slice(v),
            Background::Gradient { from, to } => {
                let span = (self.width + self.height - 2).max(1) as f64;
                let t = (x + y) as f64 / span;
                for ((o, &a), &b) in out.iter_mut().zip(from).zip(to) {
                    *o = (a as f64 + (b as f64 - a as f64) * t).round() as u8;
                }
            }
            Background::Texture { cell, lo, hi } => {
                let (gx, gy) = (x / cell, y / cell);
                let fx = (x % cell) as f64 / *cell as f64;
                let fy = (y % cell) as f64 / *cell as f64;
                for (ch, o) in out.iter_mut().enumerate() {
                    let lattice = |ix: usize, iy: usize| {
                        unit(keyed(&[
                            self.seed,
                            Purpose::Texture as u64,
                            ix as u64,
                            iy as u64,
                            ch as u64,
                        ]))
                    };
                    let top = lattice(gx, gy) * (1.0 - fx) + lattice(gx + 1, gy) * fx;
                    let bottom = lattice(gx, gy + 1) * (1.0 - fx) + lattice(gx + 1, gy + 1) * fx;
                    let v = top * (1.0 - fy) + bottom * fy;
                    *o = (*lo as f64 + (*hi as f64 - *lo as f64) * v).round() as u8;
                }
            }
        }
    }

    pub fn background_image(&self) -> Result<RasterImage> {
        self.validate()?;
        let c = self.channels as usize;
        let mut s = vec![0u8; self.width * self.height * c];
        for (i, px) in s.chunks_exact_mut(c).enumerate() {
            self.background_pixel(i % self.width, i / self.width, px);
        }
        RasterImage::new(self.width, self.height, self.channels, s)
    }

    fn render_frame(&self, t: usize, background: &RasterImage, normal: &Normal) -> RasterImage {
        let c = self.channels as usize;
        let mut s = background.samples().to_vec();
        for (k, o) in self.occluders.iter().enumerate() {
            let Some((ox, oy)) = o.position(t, self.width, self.height) else {
                continue;
            };
            for y in oy..oy + o.h {
                for x in ox..ox + o.w {
                    let idx = y * self.width + x;
                    let px = &mut s[idx * c..(idx + 1) * c];
                    match &o.color {
                        OccluderColor::Fixed(v) => px.copy_from_slice(v),
                        OccluderColor::Flicker { lo, hi } => {
                            let span = (*hi - *lo) as u64 + 1;
                            for (ch, p) in px.iter_mut().enumerate() {
                                let r = keyed(&[
                                    self.seed,
                                    Purpose::Flicker as u64,
                                    k as u64,
                                    t as u64,
                                    idx as u64,
                                    ch as u64,
                                ]);
                                *p = lo + (r % span) as u8;
                            }
                        }
                    }
                }
            }
        }
        if self.noise_sigma > 0.0 {
            for (i, p) in s.iter_mut().enumerate() {
                let u = unit(keyed(&[
                    self.seed,
                    Purpose::Noise as u64,
                    t as u64,
                    (i / c) as u64,
                    (i % c) as u64,
                ]));
                let n = (self.noise_sigma * normal.inverse_cdf(u)).round();
                *p = (*p as f64 + n).clamp(0.0, 255.0) as u8;
            }
        }
        RasterImage::new(self.width, self.height, self.channels, s).expect("shape preserved")
    }

    /// Renders every frame and returns them with the true background.
    pub fn generate(&self) -> Result<(BootstrapSequence, RasterImage)> {
        let background = self.background_image()?;
        let normal = Normal::standard();
        let frames: Vec<RasterImage> = (0..self.frames)
            .into_par_iter()
            .map(|t| self.render_frame(t, &background, &normal))
            .collect();
        Ok((
            BootstrapSequence::new(self.name.clone(), frames, 0)?,
            background,
        ))
    }

    /// Fraction of frames in which each pixel (row-major) is covered by at
    /// least one occluder, derived from the script geometry alone.
    pub fn occupancy_map(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.width * self.height;
        let mut counts = vec![0u32; n];
        let mut stamp = vec![usize::MAX; n];
        for t in 0..self.frames {
            for o in &self.occluders {
                let Some((ox, oy)) = o.position(t, self.width, self.height) else {
                    continue;
                };
                for y in oy..oy + o.h {
                    for x in ox..ox + o.w {
                        let idx = y * self.width + x;
                        if stamp[idx] != t {
                            stamp[idx] = t;
                            counts[idx] += 1;
                        }
                    }
                }
            }
        }
        Ok(counts
            .into_iter()
            .map(|k| k as f64 / self.frames as f64)
            .collect())
    }
}

pub fn generate(script: &SceneScript) -> Result<(BootstrapSequence, RasterImage)> {
    script.generate()
}

pub fn occupancy_map(script: &SceneScript) -> Result<Vec<f64>> {
    script.occupancy_map()
}

// ---- text format ----

fn parse_color(s: &str) -> Option<Vec<u8>> {
    s.split(',').map(|p| p.trim().parse().ok()).collect()
}

fn fmt_color(c: &[u8]) -> String {
    c.iter().map(u8::to_string).collect::<Vec<_>>().join(",")
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> Option<(T, T)> {
    let (a, b) = s.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn parse_background(s: &str) -> Option<Background> {
    let mut parts = s.split_whitespace();
    let kind = parts.next()?;
    let rest: Vec<&str> = parts.collect();
    match (kind, rest.as_slice()) {
        ("flat", [c]) => Some(Background::Flat(parse_color(c)?)),
        ("gradient", [a, b]) => Some(Background::Gradient {
            from: parse_color(a)?,
            to: parse_color(b)?,
        }),
        ("texture", [cell, lo, hi]) => Some(Background::Texture {
            cell: cell.parse().ok()?,
            lo: lo.parse().ok()?,
            hi: hi.parse().ok()?,
        }),
        _ => None,
    }
}

fn parse_occluder_color(s: &str) -> Option<OccluderColor> {
    let (kind, rest) = s.split_once(char::is_whitespace)?;
    match kind {
        "fixed" => Some(OccluderColor::Fixed(parse_color(rest.trim())?)),
        "flicker" => {
            let (lo, hi) = parse_pair(rest.trim())?;
            Some(OccluderColor::Flicker { lo, hi })
        }
        _ => None,
    }
}

impl SceneScript {
    /// Parses a `[scene]` block followed by any number of `[occluder]` blocks.
    pub fn parse(source_name: &str, text: &str) -> Result<Self> {
        let blocks = kv::parse(source_name, text)?;
        let mut scene: Option<SceneScript> = None;
        for block in &blocks {
            let mut f = Fields::new(source_name, block);
            match block.kind.as_str() {
                "scene" => {
                    if scene.is_some() {
                        return Err(f.error(block.line, "more than one [scene] block"));
                    }
                    let (bg_text, bg_line) = f.raw("background").ok_or_else(|| {
                        f.error(block.line, "[scene] block is missing `background`")
                    })?;
                    let background = parse_background(bg_text).ok_or_else(|| {
                        f.error(bg_line, format!("invalid background `{bg_text}`"))
                    })?;
                    let mut s = SceneScript::new(
                        f.required("width")?,
                        f.required("height")?,
                        f.required("frames")?,
                        background,
                    );
                    if let Some(name) = f.optional("name")? {
                        s.name = name;
                    }
                    if let Some(c) = f.optional("channels")? {
                        s.channels = c;
                    }
                    s.seed = f.optional("seed")?.unwrap_or(0);
                    s.noise_sigma = f.optional("noise_sigma")?.unwrap_or(0.0);
                    f.finish()?;
                    scene = Some(s);
                }
                "occluder" => {
                    let s = scene
                        .as_mut()
                        .ok_or_else(|| f.error(block.line, "[occluder] before [scene]"))?;
                    let (rect, line) = f
                        .raw("rect")
                        .ok_or_else(|| f.error(block.line, "[occluder] block is missing `rect`"))?;
                    let r: Vec<usize> = rect
                        .split(',')
                        .map(|p| p.trim().parse())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| f.error(line, format!("invalid rect `{rect}`")))?;
                    let [x, y, w, h] = r[..] else {
                        return Err(f.error(line, "rect needs x,y,w,h"));
                    };
                    let (ctext, cline) = f.raw("color").ok_or_else(|| {
                        f.error(block.line, "[occluder] block is missing `color`")
                    })?;
                    let color = parse_occluder_color(ctext)
                        .ok_or_else(|| f.error(cline, format!("invalid color `{ctext}`")))?;
                    let active = match f.raw("active") {
                        None => (0, s.frames - 1),
                        Some((v, l)) => parse_pair(v)
                            .ok_or_else(|| f.error(l, format!("invalid active `{v}`")))?,
                    };
                    let velocity = match f.raw("velocity") {
                        None => (0, 0),
                        Some((v, l)) => parse_pair(v)
                            .ok_or_else(|| f.error(l, format!("invalid velocity `{v}`")))?,
                    };
                    f.finish()?;
                    s.occluders.push(Occluder {
                        x,
                        y,
                        w,
                        h,
                        color,
                        active,
                        velocity,
                    });
                }
                other => return Err(f.error(block.line, format!("unknown block [{other}]"))),
            }
        }
        let scene = scene.ok_or_else(|| Error::Parse {
            source_name: source_name.to_string(),
            line: 0,
            message: "no [scene] block".into(),
        })?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn to_text(&self) -> String {
        let background = match &self.background {
            Background::Flat(c) => format!("flat {}", fmt_color(c)),
            Background::Gradient { from, to } => {
                format!("gradient {} {}", fmt_color(from), fmt_color(to))
            }
            Background::Texture { cell, lo, hi } => format!("texture {cell} {lo} {hi}"),
        };
        let mut out = String::new();
        kv::write_block(
            &mut out,
            "scene",
            &[
                ("name", self.name.clone()),
                ("width", self.width.to_string()),
                ("height", self.height.to_string()),
                ("channels", self.channels.to_string()),
                ("frames", self.frames.to_string()),
                ("seed", self.seed.to_string()),
                ("background", background),
                ("noise_sigma", self.noise_sigma.to_string()),
            ],
        );
        for o in &self.occluders {
            let color = match &o.color {
                OccluderColor::Fixed(c) => format!("fixed {}", fmt_color(c)),
                OccluderColor::Flicker { lo, hi } => format!("flicker {lo},{hi}"),
            };
            kv::write_block(
                &mut out,
                "occluder",
                &[
                    ("rect", format!("{},{},{},{}", o.x, o.y, o.w, o.h)),
                    ("color", color),
                    ("active", format!("{},{}", o.active.0, o.active.1)),
                    ("velocity", format!("{},{}", o.velocity.0, o.velocity.1)),
                ],
            );
        }
        out
    }

    /// Writes frames (`frames/in%06d.png`), the true background (`gt.png`)
    /// and a one-entry `manifest.txt` into `dir`.
    pub fn write_dataset(&self, dir: &Path) -> Result<Manifest> {
        let (seq, gt) = self.generate()?;
        let frames_dir = dir.join("frames");
        std::fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
        let pattern: FramePattern = "in%06d.png".parse()?;
        seq.frames().par_iter().enumerate().try_for_each(|(i, f)| {
            save_image(
                f,
                frames_dir.join(pattern.format(i as i64)),
                ImageFormat::Png,
            )
        })?;
        save_image(&gt, dir.join("gt.png"), ImageFormat::Png)?;
        let manifest = Manifest {
            sequences: vec![SequenceSpec {
                name: self.name.clone(),
                directory: dir.join("frames"),
                pattern,
                first: 0,
                last: self.frames as i64 - 1,
                gt_path: dir.join("gt.png"),
                size: Some((self.width, self.height)),
            }],
        };
        let path = dir.join("manifest.txt");
        std::fs::write(&path, manifest.to_text(dir)).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn static_box(frames: usize, active_until: usize) -> SceneScript {
        let mut s = SceneScript::new(
            20,
            10,
            frames,
            Background::Gradient {
                from: vec![10, 20, 30],
                to: vec![90, 100, 110],
            },
        );
        s.occluders.push(Occluder {
            x: 4,
            y: 2,
            w: 5,
            h: 5,
            color: OccluderColor::Fixed(vec![250, 0, 0]),
            active: (0, active_until),
            velocity: (0, 0),
        });
        s
    }

    #[test]
    fn no_occluders_no_noise_reproduces_background() {
        let mut s = static_box(4, 0);
        s.occluders.clear();
        let (seq, gt) = s.generate().unwrap();
        assert!(seq.frames().iter().all(|f| *f == gt));
        assert!(s.occupancy_map().unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn static_occluder_occupancy() {
        let s = static_box(10, 5);
        let occ = s.occupancy_map().unwrap();
        assert_eq!(occ[2 * 20 + 4], 0.6);
        assert_eq!(occ[0], 0.0);
        let s = static_box(10, 9);
        assert_eq!(s.occupancy_map().unwrap()[6 * 20 + 8], 1.0);
    }

    #[test]
    fn gradient_corners() {
        let s = static_box(1, 0);
        let bg = s.background_image().unwrap();
        assert_eq!(bg.pixel_at(0, 0), &[10, 20, 30]);
        assert_eq!(bg.pixel_at(19, 9), &[90, 100, 110]);
    }

    #[test]
    fn moving_occluder_stops_at_border() {
        let o = Occluder {
            x: 0,
            y: 0,
            w: 4,
            h: 4,
            color: OccluderColor::Fixed(vec![0]),
            active: (2, 20),
            velocity: (3, 1),
        };
        assert_eq!(o.position(1, 12, 8), None);
        assert_eq!(o.position(2, 12, 8), Some((0, 0)));
        assert_eq!(o.position(4, 12, 8), Some((6, 2)));
        assert_eq!(o.position(20, 12, 8), Some((8, 4)));
    }

    #[test]
    fn text_round_trip() {
        let mut s = static_box(30, 17);
        s.seed = 99;
        s.noise_sigma = 2.5;
        s.occluders.push(Occluder {
            x: 0,
            y: 0,
            w: 3,
            h: 3,
            color: OccluderColor::Flicker { lo: 100, hi: 255 },
            active: (5, 29),
            velocity: (1, -1),
        });
        assert_eq!(SceneScript::parse("t", &s.to_text()).unwrap(), s);
        let mut t = SceneScript::new(
            8,
            8,
            3,
            Background::Texture {
                cell: 4,
                lo: 20,
                hi: 200,
            },
        );
        t.name = "tex".into();
        assert_eq!(SceneScript::parse("t", &t.to_text()).unwrap(), t);
    }

    #[test]
    fn invalid_scripts_rejected() {
        let mut s = static_box(10, 10);
        assert!(s.validate().is_err());
        s.occluders[0].active = (0, 3);
        s.occluders[0].x = 18;
        assert!(s.validate().is_err());
        assert!(SceneScript::parse("t", "[scene]\nwidth=2\n").is_err());
        assert!(SceneScript::parse("t", "[occluder]\nrect=0,0,1,1\n").is_err());
        let text = "[scene]\nwidth=4\nheight=4\nframes=2\nbackground=flat 1\nbogus=1\n";
        assert!(SceneScript::parse("t", text).is_err());
    }

    #[test]
    fn noise_is_centred_and_bounded() {
        let mut s = SceneScript::new(32, 32, 8, Background::Flat(vec![128]));
        s.noise_sigma = 2.0;
        s.seed = 5;
        let (seq, _) = s.generate().unwrap();
        let vals: Vec<f64> = seq
            .frames()
            .iter()
            .flat_map(|f| f.samples())
            .map(|&v| v as f64 - 128.0)
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
        assert!(mean.abs() < 0.1, "{mean}");
        assert!((var.sqrt() - 2.0).abs() < 0.15, "{var}");
    }
}
