//! Background estimation methods. Each maps a bootstrap sequence to one
//! background image with the frames' shape.

mod blockmrf;
mod median;
mod sobs;
mod ws2006;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{BootstrapSequence, RasterImage};

pub use blockmrf::{blockmrf_background, blockmrf_solve, BlockMrfParams, BlockMrfSolution};
pub use median::{median_background, medoid_index};
pub use sobs::{sobs_background, ExtractionMode, SobsParams};
pub use ws2006::{ws2006_background, Ws2006Params};

/// Applies `f(pixel_index, series, channels, out)` to every pixel. The series
/// is frame-major with `channels` samples per frame; `f` writes one output pixel.
pub(crate) fn map_pixels<F>(seq: &BootstrapSequence, f: F) -> RasterImage
where
    F: Fn(usize, &[u8], usize, &mut [u8]) + Sync,
{
    let (w, h, c) = (seq.width(), seq.height(), seq.channels() as usize);
    let t = seq.len();
    let frames = seq.frames();
    let mut out = vec![0u8; w * h * c];
    out.par_chunks_mut(w * c).enumerate().for_each(|(y, row)| {
        let mut series = vec![0u8; t * c];
        for x in 0..w {
            let idx = y * w + x;
            for (k, frame) in frames.iter().enumerate() {
                series[k * c..(k + 1) * c].copy_from_slice(frame.pixel(idx));
            }
            f(idx, &series, c, &mut row[x * c..(x + 1) * c]);
        }
    });
    RasterImage::new(w, h, c as u8, out).expect("shape preserved")
}

#[inline]
pub(crate) fn round_sample(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

pub(crate) fn parse_param<T: FromStr>(method: &str, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParam(format!("{method}: invalid value `{value}` for `{key}`")))
}

/// A configured estimation method as named on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Median,
    Ws2006(Ws2006Params),
    /// Self-organizing model, frequency extraction.
    Sobs(SobsParams),
    /// Self-organizing model, ground-truth-guided extraction.
    SobsOracle(SobsParams),
    BlockMrf(BlockMrfParams),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Median => "median",
            Method::Ws2006(_) => "ws2006",
            Method::Sobs(_) => "sobs",
            Method::SobsOracle(_) => "sobs-oracle",
            Method::BlockMrf(_) => "blockmrf",
        }
    }

    pub fn needs_ground_truth(&self) -> bool {
        matches!(self, Method::SobsOracle(_))
    }

    pub fn estimate(
        &self,
        seq: &BootstrapSequence,
        gt: Option<&RasterImage>,
    ) -> Result<RasterImage> {
        match self {
            Method::Median => Ok(median_background(seq)),
            Method::Ws2006(p) => ws2006_background(seq, p),
            Method::Sobs(p) => sobs_background(seq, p, ExtractionMode::Frequency),
            Method::SobsOracle(p) => {
                let gt = gt.ok_or_else(|| {
                    Error::InvalidParam("sobs-oracle needs a ground truth image".into())
                })?;
                sobs_background(seq, p, ExtractionMode::Oracle(gt))
            }
            Method::BlockMrf(p) => blockmrf_background(seq, p),
        }
    }

    fn overrides(&self) -> Vec<(&'static str, String)> {
        match self {
            Method::Median => vec![],
            Method::Ws2006(p) if *p != Ws2006Params::default() => p.entries(),
            Method::Sobs(p) | Method::SobsOracle(p) if *p != SobsParams::default() => p.entries(),
            Method::BlockMrf(p) if *p != BlockMrfParams::default() => p.entries(),
            _ => vec![],
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        let entries = self.overrides();
        if !entries.is_empty() {
            let joined: Vec<String> = entries.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, ":{}", joined.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for Method {
    type Err = Error;

    /// `name` or `name:key=value,key=value`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (s.trim(), ""),
        };
        let pairs = params
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.split_once('=')
                    .map(|(k, v)| (k.trim(), v.trim()))
                    .ok_or_else(|| {
                        Error::InvalidParam(format!("{name}: expected key=value, got `{p}`"))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut method = match name {
            "median" => Method::Median,
            "ws2006" => Method::Ws2006(Ws2006Params::default()),
            "sobs" => Method::Sobs(SobsParams::default()),
            "sobs-oracle" => Method::SobsOracle(SobsParams::default()),
            "blockmrf" => Method::BlockMrf(BlockMrfParams::default()),
            other => return Err(Error::UnknownMethod(other.to_string())),
        };
        for (k, v) in pairs {
            match &mut method {
                Method::Median => {
                    return Err(Error::InvalidParam(format!(
                        "median takes no parameters (got `{k}`)"
                    )))
                }
                Method::Ws2006(p) => p.set(k, v)?,
                Method::Sobs(p) | Method::SobsOracle(p) => p.set(k, v)?,
                Method::BlockMrf(p) => p.set(k, v)?,
            }
        }
        match &method {
            Method::Median => {}
            Method::Ws2006(p) => p.validate()?,
            Method::Sobs(p) | Method::SobsOracle(p) => p.validate()?,
            Method::BlockMrf(p) => p.validate()?,
        }
        Ok(method)
    }
}

/// Splits a comma-separated method list. A `key=value` item with no method
/// name continues the parameter list of the preceding method, so
/// `median,ws2006:eps_stable=8,min_len=12` yields two methods.
pub fn parse_method_list(list: &str) -> Result<Vec<Method>> {
    let mut specs: Vec<String> = Vec::new();
    for item in list.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        match specs.last_mut() {
            Some(prev) if item.contains('=') && !item.contains(':') => {
                prev.push(',');
                prev.push_str(item);
            }
            _ => specs.push(item.to_string()),
        }
    }
    if specs.is_empty() {
        return Err(Error::InvalidParam("no methods given".into()));
    }
    specs.iter().map(|s| s.parse()).collect()
}
