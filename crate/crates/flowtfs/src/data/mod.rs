//! Labeled network-flow datasets: ingestion, cleaning, derived-feature
//! engineering, normalization, splitting, and synthesis.

mod csv;
mod dataset;
mod record;
mod synth;

pub use csv::{load_csv, CsvSchema, LoadedCsv};
pub use dataset::{
    preprocess, preprocess_with_scaler, stratified_split, Dataset, PreprocessOptions,
    ScalerParams,
};
pub use record::{Feature, FlowRecord, Label, EPSILON_GUARD};
pub use synth::{presets, synthesize_flows, ClassProfile, LogNormalParams, SynthSpec};
