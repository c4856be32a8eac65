//! CSV and Markdown renderings of evaluation matrices and aggregates.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::{Metric, MetricReport};

use super::{EvaluationMatrix, MatrixRow, SequenceAggregate};

pub const MATRIX_CSV_HEADER: [&str; 10] = [
    "sequence", "method", "AGE", "EPs", "pEPs", "CEPs", "pCEPs", "MSSSIM", "PSNR", "CQM",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Rounds half away from zero, as printed tables do; `format!` alone would
/// send exact binary ties such as 37.125 to the even neighbour.
fn fixed(v: f64, decimals: usize) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let scale = 10f64.powi(decimals as i32);
    let rounded = (v * scale).round() / scale;
    format!("{rounded:.decimals$}")
}

fn count(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.1}")
    }
}

fn percent(fraction: f64, decimals: usize) -> String {
    format!("{}%", fixed(fraction * 100.0, decimals))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse {
        source_name: "csv".into(),
        line: e.position().map_or(0, |p| p.line() as usize),
        message: e.to_string(),
    }
}

fn write_csv(header: &[&str], records: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in records {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn matrix_fields(report: &MetricReport) -> [String; 8] {
    [
        fixed(report.age, 4),
        report.eps.to_string(),
        fixed(report.p_eps, 6),
        report.ceps.to_string(),
        fixed(report.p_ceps, 6),
        fixed(report.ms_ssim, 4),
        fixed(report.psnr, 4),
        report.cqm.map(|v| fixed(v, 4)).unwrap_or_default(),
    ]
}

pub fn render_matrix(matrix: &EvaluationMatrix, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let records = matrix
                .rows()
                .iter()
                .map(|r| {
                    let mut rec = vec![r.sequence.clone(), r.method.clone()];
                    rec.extend(matrix_fields(&r.report));
                    rec
                })
                .collect();
            write_csv(&MATRIX_CSV_HEADER, records)
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            for seq in matrix.sequences() {
                if !out.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "### {seq}\n");
                out.push_str(
                    "| Method | AGE | EPs | pEPs | CEPs | pCEPs | MS-SSIM | PSNR | CQM |\n",
                );
                out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|\n");
                for r in matrix.rows().iter().filter(|r| r.sequence == seq) {
                    let m = &r.report;
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                        r.method,
                        fixed(m.age, 4),
                        m.eps,
                        percent(m.p_eps, 4),
                        m.ceps,
                        percent(m.p_ceps, 4),
                        fixed(m.ms_ssim, 4),
                        fixed(m.psnr, 4),
                        m.cqm.map(|v| fixed(v, 4)).unwrap_or_else(|| "-".into()),
                    );
                }
            }
            out
        }
    }
}

/// Parses the CSV produced by [`render_matrix`].
pub fn parse_matrix_csv(text: &str) -> Result<EvaluationMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.iter().map(str::trim).ne(MATRIX_CSV_HEADER) {
        return Err(Error::Parse {
            source_name: "csv".into(),
            line: 1,
            message: format!("expected header `{}`", MATRIX_CSV_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let bad = |i: usize| Error::Parse {
            source_name: "csv".into(),
            line,
            message: format!("invalid {} value `{}`", MATRIX_CSV_HEADER[i], field(i)),
        };
        let float = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
        let int = |i: usize| field(i).parse::<u64>().map_err(|_| bad(i));
        let cqm = if field(9).is_empty() {
            None
        } else {
            Some(float(9)?)
        };
        rows.push(MatrixRow {
            sequence: field(0).to_string(),
            method: field(1).to_string(),
            report: MetricReport {
                age: float(2)?,
                eps: int(3)?,
                p_eps: float(4)?,
                ceps: int(5)?,
                p_ceps: float(6)?,
                ms_ssim: float(7)?,
                psnr: float(8)?,
                cqm,
            },
        });
    }
    EvaluationMatrix::from_rows(rows)
}

/// Median table with average ranks. CSV keeps full precision; Markdown uses
/// two decimals and percentages like a printed table.
pub fn render_aggregates(aggregates: &[SequenceAggregate], format: ReportFormat) -> String {
    let cell = |a: &SequenceAggregate, m: Metric, md: bool| -> String {
        let Some(v) = a.median(m) else {
            return if md { "-".into() } else { String::new() };
        };
        match (m, md) {
            (Metric::Eps | Metric::Ceps, _) => count(v),
            (Metric::PEps | Metric::PCeps, false) => fixed(v, 6),
            (Metric::PEps | Metric::PCeps, true) => percent(v, 2),
            (_, false) => fixed(v, 4),
            (_, true) => fixed(v, 2),
        }
    };
    match format {
        ReportFormat::Csv => {
            let mut header = vec!["sequence", "avg_rank"];
            header.extend(Metric::ALL.iter().map(|m| m.label()));
            let records = aggregates
                .iter()
                .map(|a| {
                    let mut rec = vec![
                        a.sequence.clone(),
                        a.avg_rank.map(|r| fixed(r, 4)).unwrap_or_default(),
                    ];
                    rec.extend(Metric::ALL.iter().map(|&m| cell(a, m, false)));
                    rec
                })
                .collect();
            write_csv(&header, records)
        }
        ReportFormat::Markdown => {
            let mut out = String::from(
                "| Sequence | Av. rank | AGE | EPs | pEPs | CEPs | pCEPs | MS-SSIM | PSNR | CQM |\n\
                 |---|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n",
            );
            for a in aggregates {
                let mut cells = vec![
                    a.sequence.clone(),
                    a.avg_rank
                        .map(|r| fixed(r, 2))
                        .unwrap_or_else(|| "-".into()),
                ];
                cells.extend(Metric::ALL.iter().map(|&m| cell(a, m, true)));
                let _ = writeln!(out, "| {} |", cells.join(" | "));
            }
            out
        }
    }
}
