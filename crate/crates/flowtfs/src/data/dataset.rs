//! Datasets, min-max scaling, preprocessing, and stratified splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::record::{Feature, FlowRecord, Label};
use crate::error::{Error, Result};

/// Per-feature (min, max) pairs fitted on a dataset, in canonical
/// feature order. Constant columns (max == min) map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub ranges: Vec<(f64, f64)>,
}

impl ScalerParams {
    /// Fit min/max per feature over the given records.
    pub fn fit(records: &[FlowRecord]) -> ScalerParams {
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); Feature::COUNT];
        for record in records {
            for feature in Feature::all() {
                let v = record.get(feature);
                let slot = &mut ranges[feature.index()];
                slot.0 = slot.0.min(v);
                slot.1 = slot.1.max(v);
            }
        }
        ScalerParams { ranges }
    }

    pub fn transform_value(&self, feature: Feature, value: f64) -> f64 {
        let (min, max) = self.ranges[feature.index()];
        if max > min {
            (value - min) / (max - min)
        } else {
            0.0
        }
    }

    pub fn invert_value(&self, feature: Feature, value: f64) -> f64 {
        let (min, max) = self.ranges[feature.index()];
        if max > min {
            min + value * (max - min)
        } else {
            min
        }
    }

    pub fn transform_record(&self, record: &FlowRecord) -> FlowRecord {
        let mut out = record.clone();
        for feature in Feature::all() {
            out.set(feature, self.transform_value(feature, record.get(feature)));
        }
        out
    }
}

/// An ordered collection of flow records over the canonical seven-feature
/// universe, plus the scaler that normalized it (when one has been applied).
///
/// Datasets are immutable after construction; all pipeline operations
/// build fresh values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<FlowRecord>,
    pub scaler: Option<ScalerParams>,
}

impl Dataset {
    pub fn new(records: Vec<FlowRecord>) -> Dataset {
        Dataset {
            records,
            scaler: None,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The fixed feature universe every record carries, in order.
    pub fn feature_names(&self) -> [Feature; 7] {
        Feature::all()
    }

    /// (benign, malicious) row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let benign = self
            .records
            .iter()
            .filter(|r| r.label == Label::Benign)
            .count();
        (benign, self.records.len() - benign)
    }

    /// One feature's values across all rows.
    pub fn feature_column(&self, feature: Feature) -> Vec<f64> {
        self.records.iter().map(|r| r.get(feature)).collect()
    }

    pub fn has_both_classes(&self) -> bool {
        let (benign, malicious) = self.class_counts();
        benign > 0 && malicious > 0
    }
}

/// Options for [`preprocess`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    /// Keep only TCP rows when protocol metadata is present.
    pub tcp_only: bool,
    /// Protocol column values treated as TCP (case-insensitive). Numeric
    /// exports commonly use IANA protocol number 6.
    pub tcp_values: Vec<String>,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            tcp_only: true,
            tcp_values: vec!["tcp".to_string(), "6".to_string()],
        }
    }
}

/// Clean, derive, and normalize a raw dataset.
///
/// Steps, in fixed order: TCP filtering (when protocol metadata is
/// present), metadata drop, removal of rows whose base features are
/// missing or negative, recomputation of the three derived features from
/// the base four, then min-max normalization fitted on the result.
/// Derived columns from the input are never trusted; they are always
/// recomputed so the inter-feature constraints hold exactly.
pub fn preprocess(raw: &Dataset, opts: &PreprocessOptions) -> Result<Dataset> {
    preprocess_inner(raw, opts, None)
}

/// Like [`preprocess`] but applying an existing scaler instead of fitting
/// a new one, so two datasets can share one normalization. Values may
/// fall outside [0, 1] when the data exceeds the scaler's fitted range.
pub fn preprocess_with_scaler(
    raw: &Dataset,
    opts: &PreprocessOptions,
    scaler: &ScalerParams,
) -> Result<Dataset> {
    preprocess_inner(raw, opts, Some(scaler))
}

fn preprocess_inner(
    raw: &Dataset,
    opts: &PreprocessOptions,
    shared: Option<&ScalerParams>,
) -> Result<Dataset> {
    if raw.is_empty() {
        return Err(Error::EmptyAfterPreprocess("input"));
    }

    let mut records: Vec<FlowRecord> = raw.records.clone();

    // Protocol filter applies only when the column was actually present.
    let has_protocol = records.iter().any(|r| r.protocol.is_some());
    if opts.tcp_only && has_protocol {
        let tcp: Vec<String> = opts
            .tcp_values
            .iter()
            .map(|v| v.trim().to_ascii_lowercase())
            .collect();
        records.retain(|r| match &r.protocol {
            Some(p) => tcp.contains(&p.trim().to_ascii_lowercase()),
            None => false,
        });
        if records.is_empty() {
            return Err(Error::EmptyAfterPreprocess("tcp filtering"));
        }
    }

    // Metadata columns are dropped after filtering.
    for record in &mut records {
        record.protocol = None;
    }

    records.retain(FlowRecord::base_is_clean);
    if records.is_empty() {
        return Err(Error::EmptyAfterPreprocess("missing-value cleaning"));
    }

    for record in &mut records {
        record.recompute_derived();
    }

    let scaler = match shared {
        Some(s) => s.clone(),
        None => ScalerParams::fit(&records),
    };
    let normalized = records
        .iter()
        .map(|r| scaler.transform_record(r))
        .collect();

    Ok(Dataset {
        records: normalized,
        scaler: Some(scaler),
    })
}

/// Deterministic per-class split into train and test sets.
///
/// Membership is decided by a seeded shuffle of each class's row indices;
/// the output preserves the input row order within each split. The train
/// side receives `round(train_fraction * class_count)` rows per class.
pub fn stratified_split(
    dataset: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    if !dataset.has_both_classes() {
        return Err(Error::SingleClass);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_indices: Vec<usize> = Vec::new();
    let mut test_indices: Vec<usize> = Vec::new();

    for label in [Label::Benign, Label::Malicious] {
        let mut class_indices: Vec<usize> = dataset
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.label == label)
            .map(|(i, _)| i)
            .collect();
        let take = (train_fraction * class_indices.len() as f64).round() as usize;
        if take == 0 {
            return Err(Error::InvalidParameter(format!(
                "train_fraction {train_fraction} leaves no {label} rows for training"
            )));
        }
        class_indices.shuffle(&mut rng);
        train_indices.extend_from_slice(&class_indices[..take]);
        test_indices.extend_from_slice(&class_indices[take..]);
    }

    train_indices.sort_unstable();
    test_indices.sort_unstable();

    let pick = |indices: &[usize]| Dataset {
        records: indices.iter().map(|&i| dataset.records[i].clone()).collect(),
        scaler: dataset.scaler.clone(),
    };

    Ok((pick(&train_indices), pick(&test_indices)))
}
