//! On-disk formats: count tables (JSON and CSV), process matrices,
//! efficiency maps and the JSON reports written by the command-line tool.
//!
//! Parsers take raw bytes and never panic on malformed input; problems with a
//! single count record are reported with its zero-based index.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::choi::ProcessMatrix;
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::metrics::ProcessMetrics;
use crate::tomography::{CountRecord, InputState, MleDiagnostics, ProjectorLabel, StopReason};

pub const CSV_HEADER: [&str; 5] = ["input", "projector", "raw", "accidental", "efficiency"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountsFormat {
    Json,
    Csv,
}

fn default_efficiency() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordRepr {
    input: String,
    projector: String,
    raw: f64,
    #[serde(default)]
    accidental: f64,
    #[serde(default = "default_efficiency")]
    efficiency: f64,
}

impl RecordRepr {
    fn into_record(self, index: usize) -> Result<CountRecord> {
        let input: InputState = self.input.parse().map_err(|e: Error| Error::InvalidRecord {
            index,
            message: e.to_string(),
        })?;
        let projector: ProjectorLabel =
            self.projector.parse().map_err(|e: Error| Error::InvalidRecord {
                index,
                message: e.to_string(),
            })?;
        Ok(CountRecord {
            input,
            projector,
            raw: self.raw,
            accidental: self.accidental,
            efficiency: self.efficiency,
        })
    }

    fn from_record(r: &CountRecord) -> Self {
        Self {
            input: r.input.to_string(),
            projector: r.projector.to_string(),
            raw: r.raw,
            accidental: r.accidental,
            efficiency: r.efficiency,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CountsDocument {
    records: Vec<serde_json::Value>,
}

#[derive(Serialize)]
struct CountsDocumentOut {
    records: Vec<RecordRepr>,
}

/// Reads `{"records": [...]}`. `accidental` defaults to 0 and `efficiency` to 1.
pub fn parse_counts_json(bytes: &[u8]) -> Result<Vec<CountRecord>> {
    let doc: CountsDocument = serde_json::from_slice(bytes)
        .map_err(|e| Error::Format(format!("counts JSON: {e}")))?;
    doc.records
        .into_iter()
        .enumerate()
        .map(|(index, value)| {
            let repr: RecordRepr = serde_json::from_value(value).map_err(|e| Error::InvalidRecord {
                index,
                message: e.to_string(),
            })?;
            repr.into_record(index)
        })
        .collect()
}

/// Reads a CSV table with the header `input,projector,raw,accidental,efficiency`.
pub fn parse_counts_csv(bytes: &[u8]) -> Result<Vec<CountRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("counts CSV header: {e}")))?
        .clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::Format(format!(
            "counts CSV header must be {:?}, found {:?}",
            CSV_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    reader
        .deserialize::<RecordRepr>()
        .enumerate()
        .map(|(index, row)| {
            row.map_err(|e| Error::InvalidRecord {
                index,
                message: e.to_string(),
            })?
            .into_record(index)
        })
        .collect()
}

pub fn parse_counts(bytes: &[u8], format: CountsFormat) -> Result<Vec<CountRecord>> {
    match format {
        CountsFormat::Json => parse_counts_json(bytes),
        CountsFormat::Csv => parse_counts_csv(bytes),
    }
}

pub fn counts_to_json(records: &[CountRecord]) -> String {
    let doc = CountsDocumentOut {
        records: records.iter().map(RecordRepr::from_record).collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("count records serialize");
    out.push('\n');
    out
}

pub fn counts_to_csv(records: &[CountRecord]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in records {
        writer
            .serialize(RecordRepr::from_record(r))
            .expect("writing to memory cannot fail");
    }
    let bytes = writer.into_inner().expect("flushing to memory cannot fail");
    String::from_utf8(bytes).expect("CSV output is UTF-8")
}

pub fn counts_to_string(records: &[CountRecord], format: CountsFormat) -> String {
    match format {
        CountsFormat::Json => counts_to_json(records),
        CountsFormat::Csv => counts_to_csv(records),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProcessMatrixRepr {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    order: String,
    basis: String,
}

fn square4(name: &str, rows: &[Vec<f64>]) -> Result<()> {
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(Error::Format(format!("\"{name}\" must be a 4x4 array")));
    }
    Ok(())
}

/// Reads `{"re", "im", "order": "in_out", "basis": "HV"}`. Matrices whose
/// trace is not already 1 are rescaled.
pub fn parse_process_matrix(bytes: &[u8]) -> Result<ProcessMatrix> {
    let repr: ProcessMatrixRepr = serde_json::from_slice(bytes)
        .map_err(|e| Error::Format(format!("process matrix JSON: {e}")))?;
    if repr.order != "in_out" {
        return Err(Error::Format(format!(
            "unsupported tensor order {:?}, expected \"in_out\"",
            repr.order
        )));
    }
    if repr.basis != "HV" {
        return Err(Error::Format(format!(
            "unsupported basis {:?}, expected \"HV\"",
            repr.basis
        )));
    }
    square4("re", &repr.re)?;
    square4("im", &repr.im)?;
    let m = CMat::from_fn(4, 4, |i, j| c(repr.re[i][j], repr.im[i][j]));
    match ProcessMatrix::new(m.clone()) {
        Err(Error::BadTrace(_)) => ProcessMatrix::from_unnormalized(m),
        other => other,
    }
}

pub fn process_matrix_to_json(chi: &ProcessMatrix) -> String {
    let m = chi.matrix();
    let repr = ProcessMatrixRepr {
        re: (0..4).map(|i| (0..4).map(|j| m[(i, j)].re).collect()).collect(),
        im: (0..4).map(|i| (0..4).map(|j| m[(i, j)].im).collect()).collect(),
        order: "in_out".into(),
        basis: "HV".into(),
    };
    let mut out = serde_json::to_string_pretty(&repr).expect("process matrix serializes");
    out.push('\n');
    out
}

/// Reads a projector → efficiency map such as `{"H": 0.93, "V": 0.88}`.
/// Projectors that are not listed keep efficiency 1.
pub fn parse_efficiencies(bytes: &[u8]) -> Result<BTreeMap<ProjectorLabel, f64>> {
    let raw: BTreeMap<String, f64> = serde_json::from_slice(bytes)
        .map_err(|e| Error::Format(format!("efficiencies JSON: {e}")))?;
    let mut out = BTreeMap::new();
    for (label, eff) in raw {
        let projector: ProjectorLabel = label.parse()?;
        if !(eff > 0.0) || !eff.is_finite() {
            return Err(Error::Parameter(format!(
                "efficiency {eff} for {projector} must be positive"
            )));
        }
        out.insert(projector, eff);
    }
    Ok(out)
}

/// One line of the metrics output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub program: String,
    #[serde(flatten)]
    pub metrics: ProcessMetrics,
}

/// Summary of a reconstruction, written next to the process matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsSummary {
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub final_log_likelihood: f64,
    pub final_change: f64,
    pub positivity_margin: f64,
    pub diluted_steps: usize,
    pub newton_steps: usize,
    pub clamped_settings: Vec<String>,
}

impl DiagnosticsSummary {
    pub fn new(diag: &MleDiagnostics, clamped: &[(InputState, ProjectorLabel)]) -> Self {
        Self {
            iterations: diag.iterations,
            converged: diag.converged,
            stop_reason: diag.stop_reason,
            final_log_likelihood: diag.final_log_likelihood(),
            final_change: diag.final_change,
            positivity_margin: diag.positivity_margin,
            diluted_steps: diag.diluted_steps,
            newton_steps: diag.newton_steps,
            clamped_settings: clamped.iter().map(|(j, k)| format!("{j}/{k}")).collect(),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report types serialize");
    out.push('\n');
    out
}
