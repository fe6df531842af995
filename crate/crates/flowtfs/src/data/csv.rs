//! CSV ingestion with a configurable column mapping.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::record::{FlowRecord, Label};
use crate::error::{Error, Result};

fn default_benign_labels() -> Vec<String> {
    vec!["benign".to_string()]
}

/// Maps the canonical fields onto the columns of a concrete CSV file.
///
/// The four base feature columns and the label column are mandatory.
/// Derived feature columns are optional; whatever they contain is
/// recomputed during preprocessing anyway. Label cells matching one of
/// `benign_labels` (case-insensitively) are benign, anything else is
/// malicious.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub duration: String,
    pub tot_pkts: String,
    pub in_bytes: String,
    pub out_bytes: String,
    #[serde(default)]
    pub bytes_per_sec: Option<String>,
    #[serde(default)]
    pub pkts_per_sec: Option<String>,
    #[serde(default)]
    pub ratio_out_in: Option<String>,
    #[serde(default)]
    pub protocol: Option<String>,
    pub label: String,
    #[serde(default = "default_benign_labels")]
    pub benign_labels: Vec<String>,
}

/// A loaded dataset plus how many malformed rows were skipped.
#[derive(Debug, Clone)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    pub skipped_rows: usize,
}

/// Parse a labeled flow CSV into a raw (unpreprocessed) dataset.
///
/// Rows with non-numeric feature cells or a blank label are skipped and
/// counted; empty feature cells and literal `nan` become missing values
/// that the preprocessing step removes later.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<LoadedCsv> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;

    let headers = reader.headers()?.clone();
    let index_of: HashMap<&str, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim(), i))
        .collect();

    let require = |name: &String| -> Result<usize> {
        index_of
            .get(name.trim())
            .copied()
            .ok_or_else(|| Error::MissingColumn(name.clone()))
    };
    let optional = |name: &Option<String>| -> Result<Option<usize>> {
        match name {
            Some(n) => require(n).map(Some),
            None => Ok(None),
        }
    };

    let duration_col = require(&schema.duration)?;
    let tot_pkts_col = require(&schema.tot_pkts)?;
    let in_bytes_col = require(&schema.in_bytes)?;
    let out_bytes_col = require(&schema.out_bytes)?;
    let label_col = require(&schema.label)?;
    let bytes_per_sec_col = optional(&schema.bytes_per_sec)?;
    let pkts_per_sec_col = optional(&schema.pkts_per_sec)?;
    let ratio_out_in_col = optional(&schema.ratio_out_in)?;
    let protocol_col = optional(&schema.protocol)?;

    let benign: Vec<String> = schema
        .benign_labels
        .iter()
        .map(|v| v.trim().to_ascii_lowercase())
        .collect();

    let mut records = Vec::new();
    let mut skipped = 0usize;

    'rows: for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };

        // Empty cells and literal nan are missing values, kept for the
        // cleaning step; anything else unparseable invalidates the row.
        let mut cell = |col: usize| -> Option<f64> {
            let text = row.get(col)?.trim();
            if text.is_empty() || text.eq_ignore_ascii_case("nan") {
                return Some(f64::NAN);
            }
            text.parse::<f64>().ok()
        };

        let mut numeric = |col: Option<usize>| -> std::result::Result<f64, ()> {
            match col {
                Some(c) => cell(c).ok_or(()),
                None => Ok(f64::NAN),
            }
        };

        let parsed = (
            numeric(Some(duration_col)),
            numeric(Some(tot_pkts_col)),
            numeric(Some(in_bytes_col)),
            numeric(Some(out_bytes_col)),
            numeric(bytes_per_sec_col),
            numeric(pkts_per_sec_col),
            numeric(ratio_out_in_col),
        );
        let (duration, tot_pkts, in_bytes, out_bytes, bytes_per_sec, pkts_per_sec, ratio_out_in) =
            match parsed {
                (Ok(a), Ok(b), Ok(c), Ok(d), Ok(e), Ok(f), Ok(g)) => (a, b, c, d, e, f, g),
                _ => {
                    skipped += 1;
                    continue 'rows;
                }
            };

        let label_text = match row.get(label_col) {
            Some(t) if !t.trim().is_empty() => t.trim().to_ascii_lowercase(),
            _ => {
                skipped += 1;
                continue;
            }
        };
        let label = if benign.contains(&label_text) {
            Label::Benign
        } else {
            Label::Malicious
        };

        let protocol = protocol_col
            .and_then(|c| row.get(c))
            .map(|p| p.trim().to_string());

        records.push(FlowRecord {
            duration,
            tot_pkts,
            in_bytes,
            out_bytes,
            bytes_per_sec,
            pkts_per_sec,
            ratio_out_in,
            label,
            protocol,
        });
    }

    if records.is_empty() {
        return Err(Error::ZeroParseableRows {
            path: path.to_path_buf(),
            skipped,
        });
    }

    Ok(LoadedCsv {
        dataset: Dataset::new(records),
        skipped_rows: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn schema() -> CsvSchema {
        CsvSchema {
            duration: "Dur".into(),
            tot_pkts: "TotPkts".into(),
            in_bytes: "InBytes".into(),
            out_bytes: "OutBytes".into(),
            bytes_per_sec: None,
            pkts_per_sec: None,
            ratio_out_in: None,
            protocol: Some("Proto".into()),
            label: "Label".into(),
            benign_labels: default_benign_labels(),
        }
    }

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file
    }

    #[test]
    fn loads_valid_rows() {
        let file = write_csv(
            "Dur,TotPkts,InBytes,OutBytes,Proto,Label\n\
             1.5,10,100,50,tcp,Benign\n\
             0.2,5,20,10,tcp,ddos\n\
             3.0,7,70,35,udp,BENIGN\n",
        );
        let loaded = load_csv(file.path(), &schema()).unwrap();
        assert_eq!(loaded.dataset.len(), 3);
        assert_eq!(loaded.skipped_rows, 0);
        assert_eq!(loaded.dataset.records[0].label, Label::Benign);
        assert_eq!(loaded.dataset.records[1].label, Label::Malicious);
        assert_eq!(loaded.dataset.records[2].protocol.as_deref(), Some("udp"));
    }

    #[test]
    fn skips_non_numeric_rows_and_counts_them() {
        let file = write_csv(
            "Dur,TotPkts,InBytes,OutBytes,Proto,Label\n\
             oops,10,100,50,tcp,benign\n\
             1.0,10,100,50,tcp,benign\n\
             2.0,4,40,20,tcp,ddos\n",
        );
        let loaded = load_csv(file.path(), &schema()).unwrap();
        assert_eq!(loaded.dataset.len(), 2);
        assert_eq!(loaded.skipped_rows, 1);
    }

    #[test]
    fn header_only_file_is_an_error() {
        let file = write_csv("Dur,TotPkts,InBytes,OutBytes,Proto,Label\n");
        let err = load_csv(file.path(), &schema()).unwrap_err();
        assert!(matches!(err, Error::ZeroParseableRows { .. }));
    }

    #[test]
    fn missing_mandatory_column_is_named() {
        let file = write_csv("Dur,TotPkts,InBytes,OutBytes,Proto\n1,2,3,4,tcp\n");
        match load_csv(file.path(), &schema()) {
            Err(Error::MissingColumn(name)) => assert_eq!(name, "Label"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_reported() {
        let err = load_csv(Path::new("/nonexistent/flows.csv"), &schema()).unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));
    }

    #[test]
    fn empty_cells_become_missing_values() {
        let file = write_csv(
            "Dur,TotPkts,InBytes,OutBytes,Proto,Label\n\
             ,10,100,50,tcp,benign\n\
             1.0,10,100,50,tcp,benign\n",
        );
        let loaded = load_csv(file.path(), &schema()).unwrap();
        assert_eq!(loaded.dataset.len(), 2);
        assert!(loaded.dataset.records[0].duration.is_nan());
    }
}
