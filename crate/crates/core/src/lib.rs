//! Scene background initialization toolkit.
//!
//! Loads bootstrap sequences, estimates a clean background with several
//! methods, scores estimates against ground truth and aggregates the
//! results into per-sequence difficulty rankings. A small scene synthesizer
//! produces sequences with known ground truth for testing.

pub mod bench;
pub mod color;
pub mod error;
pub mod image;
pub mod kv;
pub mod methods;
pub mod metrics;
pub mod seqio;
pub mod synth;

pub use error::{Error, Result};
pub use image::{BootstrapSequence, RasterImage, Shape};
pub use methods::Method;
pub use metrics::{compute_all, Metric, MetricConfig, MetricReport};
