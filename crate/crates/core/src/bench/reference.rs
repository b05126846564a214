//! Published residuals for the benchmark grid, kept for side-by-side
//! display.
//!
//! The file uses the report's CSV columns plus `source`, which names the
//! method column the value came from (`k3` for the three-step member of
//! this family, the others for comparison methods that are not computed
//! here). Entries that do not parse as a magnitude are kept verbatim with
//! status `malformed`.

use serde::Deserialize;

use crate::numerics::Magnitude;

const REFERENCE_CSV: &str = include_str!("../../data/reference_residuals.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceStatus {
    Reported,
    Malformed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEntry {
    pub case: String,
    pub guess: String,
    pub source: String,
    pub k: Option<u32>,
    pub tnfe: u32,
    /// Text exactly as published.
    pub raw: String,
    /// `None` when the published text is malformed.
    pub residual: Option<Magnitude>,
    pub status: ReferenceStatus,
}

#[derive(Debug, Deserialize)]
struct Row {
    case: String,
    guess: String,
    k: Option<u32>,
    tnfe: u32,
    mantissa: String,
    exponent: Option<i64>,
    status: String,
    residual: String,
    source: String,
}

/// All published entries, in file order (case, guess, source).
pub fn reference_residuals() -> Vec<ReferenceEntry> {
    let mut reader = csv::Reader::from_reader(REFERENCE_CSV.as_bytes());
    reader
        .deserialize::<Row>()
        .map(|row| {
            let row = row.expect("bundled reference file is well formed");
            let status = match row.status.as_str() {
                "malformed" => ReferenceStatus::Malformed,
                _ => ReferenceStatus::Reported,
            };
            let residual = match (status, row.exponent) {
                (ReferenceStatus::Reported, Some(exp)) => Magnitude::from_parts(&row.mantissa, exp),
                _ => None,
            };
            ReferenceEntry {
                case: row.case,
                guess: row.guess,
                source: row.source,
                k: row.k,
                tnfe: row.tnfe,
                raw: row.residual,
                residual,
                status,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_cell_has_four_sources() {
        let all = reference_residuals();
        assert_eq!(all.len(), 96);
        assert_eq!(all.iter().filter(|e| e.source == "k3").count(), 24);
        assert!(all.iter().all(|e| e.tnfe == 24));
    }

    #[test]
    fn reported_entries_match_their_text() {
        for e in reference_residuals() {
            match e.status {
                ReferenceStatus::Reported => {
                    let m = e.residual.as_ref().unwrap();
                    assert_eq!(m.to_string(), e.raw);
                    assert_eq!(e.raw.parse::<Magnitude>().unwrap(), *m);
                }
                ReferenceStatus::Malformed => {
                    assert!(e.residual.is_none());
                    assert!(e.raw.parse::<Magnitude>().is_err(), "{}", e.raw);
                }
            }
        }
    }

    #[test]
    fn malformed_entries_are_verbatim() {
        let bad: Vec<String> = reference_residuals()
            .into_iter()
            .filter(|e| e.status == ReferenceStatus::Malformed)
            .map(|e| e.raw)
            .collect();
        assert_eq!(
            bad,
            ["0.199813-3", "0.610763-350", "0.749233+3", "Indeterminate"]
        );
    }

    #[test]
    fn three_step_column_examples() {
        let all = reference_residuals();
        let find = |case: &str, guess: &str| {
            all.iter()
                .find(|e| e.case == case && e.guess == guess && e.source == "k3")
                .unwrap()
                .raw
                .clone()
        };
        assert_eq!(find("f1", "2.0"), "0.13526e-2046");
        assert_eq!(find("f2", "2.0"), "0.62927e-2949");
        assert_eq!(find("f6", "3.5"), "0.15256e-22");
        assert_eq!(find("f8", "1.31"), "0.66987e-8948");
    }
}
