//! Evaluation harness: runs methods over a dataset, scores them, and
//! aggregates per-sequence difficulty.

mod aggregate;
mod render;

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::image::RasterImage;
use crate::methods::Method;
use crate::metrics::{compute_all, MetricConfig, MetricReport};
use crate::seqio::{load_sequence, Manifest};

pub use aggregate::{median_by_sequence, rank_sequences, SequenceAggregate};
pub use render::{
    parse_matrix_csv, render_aggregates, render_matrix, ReportFormat, MATRIX_CSV_HEADER,
};

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRow {
    pub sequence: String,
    pub method: String,
    pub report: MetricReport,
}

/// Scores indexed by (sequence, method), in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvaluationMatrix {
    rows: Vec<MatrixRow>,
}

impl EvaluationMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: Vec<MatrixRow>) -> Result<Self> {
        let mut m = Self::new();
        for r in rows {
            m.push(r.sequence, r.method, r.report)?;
        }
        Ok(m)
    }

    pub fn push(
        &mut self,
        sequence: impl Into<String>,
        method: impl Into<String>,
        report: MetricReport,
    ) -> Result<()> {
        let (sequence, method) = (sequence.into(), method.into());
        if self.get(&sequence, &method).is_some() {
            return Err(Error::RaggedMatrix(format!(
                "duplicate row ({sequence}, {method})"
            )));
        }
        self.rows.push(MatrixRow {
            sequence,
            method,
            report,
        });
        Ok(())
    }

    pub fn rows(&self) -> &[MatrixRow] {
        &self.rows
    }

    pub fn get(&self, sequence: &str, method: &str) -> Option<&MetricReport> {
        self.rows
            .iter()
            .find(|r| r.sequence == sequence && r.method == method)
            .map(|r| &r.report)
    }

    /// Sequence names in order of first appearance.
    pub fn sequences(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.rows
            .iter()
            .map(|r| r.sequence.as_str())
            .filter(|s| seen.insert(*s))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Something that went wrong for one sequence (or one method on it).
#[derive(Debug)]
pub struct RunFailure {
    pub sequence: String,
    pub method: Option<String>,
    pub error: Error,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub matrix: EvaluationMatrix,
    /// Computed backgrounds as (sequence, method, image), in matrix order.
    pub backgrounds: Vec<(String, String, RasterImage)>,
    pub failures: Vec<RunFailure>,
}

/// Estimates and scores every (sequence, method) pair. A sequence that fails
/// to load is reported and skipped; the remaining ones still run.
pub fn run(manifest: &Manifest, methods: &[Method], cfg: &MetricConfig) -> Result<RunOutcome> {
    if methods.is_empty() {
        return Err(Error::InvalidParam(
            "at least one method is required".into(),
        ));
    }
    cfg.validate()?;
    let mut outcome = RunOutcome {
        matrix: EvaluationMatrix::new(),
        backgrounds: Vec::new(),
        failures: Vec::new(),
    };
    for spec in &manifest.sequences {
        let (seq, gt) = match load_sequence(spec) {
            Ok(x) => x,
            Err(error) => {
                outcome.failures.push(RunFailure {
                    sequence: spec.name.clone(),
                    method: None,
                    error,
                });
                continue;
            }
        };
        for method in methods {
            let name = method.to_string();
            let scored = method
                .estimate(&seq, Some(&gt))
                .and_then(|cb| compute_all(&gt, &cb, cfg).map(|r| (cb, r)));
            match scored {
                Ok((cb, report)) => {
                    outcome
                        .matrix
                        .push(spec.name.clone(), name.clone(), report)?;
                    outcome.backgrounds.push((spec.name.clone(), name, cb));
                }
                Err(error) => outcome.failures.push(RunFailure {
                    sequence: spec.name.clone(),
                    method: Some(name),
                    error,
                }),
            }
        }
    }
    Ok(outcome)
}
