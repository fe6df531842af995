//! Trainable classifiers with a uniform prediction interface and
//! architecture-descriptor extraction.

mod forest;
mod mlp;

pub use forest::{train_random_forest, ForestModel, Node, RandomForestParams, Tree};
pub use mlp::{train_mlp, DenseLayer, MlpModel, MlpParams};

use serde::{Deserialize, Serialize};

use crate::data::{Feature, FlowRecord, Label};
use crate::error::{Error, Result};

/// Model family tags used in descriptors and serialized artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    RandomForest,
    Mlp,
}

impl ModelFamily {
    pub fn code(self) -> f64 {
        match self {
            ModelFamily::RandomForest => 0.0,
            ModelFamily::Mlp => 1.0,
        }
    }
}

/// Fixed-order architecture summary:
/// `[family code, depth, width, log10(parameter count), output classes]`.
///
/// Depth is the tree depth cap (or the deepest tree actually grown when
/// uncapped) for forests and the hidden-layer count for MLPs; width is
/// the estimator count or the widest hidden layer; the parameter count
/// is decision nodes or trainable weights respectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureDescriptor(pub [f64; 5]);

impl ArchitectureDescriptor {
    pub const LENGTH: usize = 5;

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn family_code(&self) -> f64 {
        self.0[0]
    }

    pub fn depth(&self) -> f64 {
        self.0[1]
    }

    pub fn width(&self) -> f64 {
        self.0[2]
    }

    pub fn log10_parameters(&self) -> f64 {
        self.0[3]
    }

    pub fn output_classes(&self) -> f64 {
        self.0[4]
    }
}

/// A prediction: the argmax label and the class probabilities
/// (benign first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub probabilities: [f64; 2],
}

/// A trained target or surrogate classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClassifierModel {
    RandomForest(ForestModel),
    Mlp(MlpModel),
}

impl ClassifierModel {
    pub fn family(&self) -> ModelFamily {
        match self {
            ClassifierModel::RandomForest(_) => ModelFamily::RandomForest,
            ClassifierModel::Mlp(_) => ModelFamily::Mlp,
        }
    }

    /// The ordered feature subset this model consumes.
    pub fn features(&self) -> &[Feature] {
        match self {
            ClassifierModel::RandomForest(m) => &m.features,
            ClassifierModel::Mlp(m) => &m.features,
        }
    }

    /// Classify a feature vector ordered like [`Self::features`].
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let expected = self.features().len();
        if x.len() != expected {
            return Err(Error::ArityMismatch {
                expected,
                got: x.len(),
            });
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(self.features()[pos].name().to_string()));
        }

        let probabilities = match self {
            ClassifierModel::RandomForest(m) => m.probabilities(x),
            ClassifierModel::Mlp(m) => {
                let p = m.probabilities(x);
                [p[0], p[1]]
            }
        };
        let label = if probabilities[0] >= probabilities[1] {
            Label::Benign
        } else {
            Label::Malicious
        };
        Ok(Prediction {
            label,
            probabilities,
        })
    }

    /// Classify a full flow record by selecting this model's features.
    pub fn predict_record(&self, record: &FlowRecord) -> Result<Prediction> {
        self.predict(&record.select(self.features()))
    }

    /// Deterministic architecture summary for similarity scoring.
    pub fn descriptor(&self) -> ArchitectureDescriptor {
        match self {
            ClassifierModel::RandomForest(m) => {
                let depth = m.params.max_depth.unwrap_or(m.realized_max_depth) as f64;
                let params = m.decision_parameter_count().max(1) as f64;
                ArchitectureDescriptor([
                    ModelFamily::RandomForest.code(),
                    depth,
                    m.params.n_estimators as f64,
                    params.log10(),
                    2.0,
                ])
            }
            ClassifierModel::Mlp(m) => {
                let width = m.params.hidden_layers.iter().copied().max().unwrap_or(0) as f64;
                ArchitectureDescriptor([
                    ModelFamily::Mlp.code(),
                    m.params.hidden_layers.len() as f64,
                    width,
                    (m.parameter_count().max(1) as f64).log10(),
                    2.0,
                ])
            }
        }
    }
}
