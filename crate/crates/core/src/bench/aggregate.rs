//! Per-sequence medians over methods and the resulting difficulty ranking.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::metrics::Metric;

use super::EvaluationMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceAggregate {
    pub sequence: String,
    /// Median over methods; `None` when some method lacks the metric.
    pub medians: BTreeMap<Metric, Option<f64>>,
    /// Mean of the per-metric fractional ranks, once ranked.
    pub avg_rank: Option<f64>,
    pub ranks: BTreeMap<Metric, f64>,
}

impl SequenceAggregate {
    pub fn median(&self, metric: Metric) -> Option<f64> {
        self.medians.get(&metric).copied().flatten()
    }
}

/// Sample median; `+inf` orders above every finite value.
fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

pub fn median_by_sequence(matrix: &EvaluationMatrix) -> Result<Vec<SequenceAggregate>> {
    let sequences = matrix.sequences();
    let mut reference: Option<(String, BTreeSet<&str>)> = None;
    let mut out = Vec::with_capacity(sequences.len());
    for seq in sequences {
        let rows: Vec<_> = matrix.rows().iter().filter(|r| r.sequence == seq).collect();
        let methods: BTreeSet<&str> = rows.iter().map(|r| r.method.as_str()).collect();
        match &reference {
            None => reference = Some((seq.to_string(), methods)),
            Some((first, set)) if *set != methods => {
                let msg = format!("{seq} has methods {methods:?} but {first} has {set:?}");
                return Err(Error::RaggedMatrix(msg));
            }
            Some(_) => {}
        }
        let medians = Metric::ALL
            .iter()
            .map(|&m| {
                let values: Option<Vec<f64>> = rows.iter().map(|r| r.report.get(m)).collect();
                (m, values.map(median))
            })
            .collect();
        out.push(SequenceAggregate {
            sequence: seq.to_string(),
            medians,
            avg_rank: None,
            ranks: BTreeMap::new(),
        });
    }
    Ok(out)
}

/// Ranks `values` with 1 = best; tied values share the mean of their positions.
fn fractional_ranks(values: &[f64], lower_is_better: bool) -> Vec<f64> {
    let key = |v: f64| if lower_is_better { v } else { -v };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| key(values[a]).total_cmp(&key(values[b])));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && key(values[order[j + 1]]) == key(values[order[i]]) {
            j += 1;
        }
        // positions i..=j (0-based) share rank mean((i+1)..=(j+1))
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Ranks sequences on every metric's median (direction-aware), averages the
/// ranks, and sorts ascending by average rank, then name.
pub fn rank_sequences(aggregates: &[SequenceAggregate]) -> Result<Vec<SequenceAggregate>> {
    if aggregates.len() < 2 {
        return Err(Error::InvalidParam(
            "ranking needs at least two sequences".into(),
        ));
    }
    let mut out: Vec<SequenceAggregate> = aggregates.to_vec();
    for metric in Metric::ALL {
        let values = out
            .iter()
            .map(|a| {
                a.median(metric).ok_or_else(|| Error::MissingMetric {
                    sequence: a.sequence.clone(),
                    metric: metric.label().to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        for (a, r) in out
            .iter_mut()
            .zip(fractional_ranks(&values, metric.lower_is_better()))
        {
            a.ranks.insert(metric, r);
        }
    }
    for a in &mut out {
        a.avg_rank = Some(a.ranks.values().sum::<f64>() / a.ranks.len() as f64);
    }
    out.sort_by(|a, b| {
        a.avg_rank
            .partial_cmp(&b.avg_rank)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.sequence.cmp(&b.sequence))
    });
    Ok(out)
}
