//! Benchmark report types and their CSV/JSON forms.
//!
//! CSV columns are `case,guess,k,iterations,tnfe,mantissa,exponent,coc,status`
//! followed by `residual` (the magnitude as one field, e.g. `0.13526e-2046`)
//! and `root` (the attained root to 20 digits). Missing values are empty
//! fields. JSON mirrors the types.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::methods::Termination;
use crate::numerics::Magnitude;

pub const CSV_COLUMNS: [&str; 11] = [
    "case",
    "guess",
    "k",
    "iterations",
    "tnfe",
    "mantissa",
    "exponent",
    "coc",
    "status",
    "residual",
    "root",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub case: String,
    pub guess: String,
    pub k: u32,
    pub iterations: u32,
    pub tnfe: u32,
    /// Final `|f|` to five significant digits; `None` if it was not finite.
    pub residual: Option<Magnitude>,
    pub coc: Option<f64>,
    #[serde(with = "status_label")]
    pub status: Termination,
    pub root: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Provenance {
    pub fn now() -> Self {
        Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub digits: u32,
    pub budget: u32,
    pub cells: Vec<BenchCell>,
    pub provenance: Provenance,
}

mod status_label {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::methods::Termination;

    pub fn serialize<S: Serializer>(t: &Termination, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.label())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Termination, D::Error> {
        let text = String::deserialize(d)?;
        Termination::from_label(&text)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown status `{text}`")))
    }
}

fn csv_row(cell: &BenchCell) -> Vec<String> {
    let (mantissa, exponent, residual) = match &cell.residual {
        Some(m) => (m.mantissa_text(), m.exponent10().to_string(), m.to_string()),
        None => Default::default(),
    };
    vec![
        cell.case.clone(),
        cell.guess.clone(),
        cell.k.to_string(),
        cell.iterations.to_string(),
        cell.tnfe.to_string(),
        mantissa,
        exponent,
        cell.coc.map(|c| c.to_string()).unwrap_or_default(),
        cell.status.label(),
        residual,
        cell.root.clone().unwrap_or_default(),
    ]
}

fn render_csv(report: &BenchReport) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(CSV_COLUMNS)
        .expect("writing to memory cannot fail");
    for cell in &report.cells {
        writer
            .write_record(csv_row(cell))
            .expect("writing to memory cannot fail");
    }
    let bytes = writer.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("report fields are UTF-8")
}

/// The report in `format`, exactly as [`emit_report`] writes it.
pub fn render_report(report: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("report serialises to JSON");
            text.push('\n');
            text
        }
    }
}

/// Writes the report to `destination`.
pub fn emit_report(
    report: &BenchReport,
    format: ReportFormat,
    destination: &Path,
) -> Result<(), BenchError> {
    fs::write(destination, render_report(report, format)).map_err(|source| BenchError::Io {
        path: destination.display().to_string(),
        source,
    })
}

pub fn parse_report_json(text: &str) -> Result<BenchReport, BenchError> {
    serde_json::from_str(text).map_err(|e| BenchError::Format(e.to_string()))
}

/// Cells of a CSV report.
pub fn parse_report_csv(text: &str) -> Result<Vec<BenchCell>, BenchError> {
    let bad = |msg: String| BenchError::Format(msg);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(bad(format!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut cells = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let row_err = |what: &str| bad(format!("row {}: bad {what}", line + 1));
        let int = |i: usize, what: &str| field(i).parse::<u32>().map_err(|_| row_err(what));
        let residual = match (field(5), field(6)) {
            ("", "") => None,
            (m, e) => {
                let exp = e.parse::<i64>().map_err(|_| row_err("exponent"))?;
                Some(Magnitude::from_parts(m, exp).ok_or_else(|| row_err("mantissa"))?)
            }
        };
        let coc = match field(7) {
            "" => None,
            c => Some(c.parse::<f64>().map_err(|_| row_err("coc"))?),
        };
        let status = Termination::from_label(field(8)).ok_or_else(|| row_err("status"))?;
        let root = match field(10) {
            "" => None,
            r => Some(r.to_string()),
        };
        cells.push(BenchCell {
            case: field(0).to_string(),
            guess: field(1).to_string(),
            k: int(2, "k")?,
            iterations: int(3, "iterations")?,
            tnfe: int(4, "tnfe")?,
            residual,
            coc,
            status,
            root,
        });
    }
    Ok(cells)
}
