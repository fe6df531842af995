//! The transferability feasibility score: feature alignment,
//! architecture similarity, data homogeneity, their weighted
//! combination, and weight fitting from observed success rates.

mod regression;
mod wasserstein;

pub use regression::{fit_weights, SuccessRateObservation, WeightFit};
pub use wasserstein::wasserstein_1d;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Feature};
use crate::error::{Error, Result};
use crate::model::ArchitectureDescriptor;

/// An unordered set of case-normalized feature names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet(BTreeSet<String>);

impl FeatureSet {
    pub fn new<I, S>(names: I) -> FeatureSet
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        FeatureSet(
            names
                .into_iter()
                .map(|n| n.as_ref().trim().to_ascii_lowercase())
                .filter(|n| !n.is_empty())
                .collect(),
        )
    }

    pub fn from_features(features: &[Feature]) -> FeatureSet {
        FeatureSet::new(features.iter().map(|f| f.name()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(&name.trim().to_ascii_lowercase())
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|s| s.as_str())
    }

    pub fn union(&self, other: &FeatureSet) -> FeatureSet {
        FeatureSet(self.0.union(&other.0).cloned().collect())
    }
}

/// The three score components.
///
/// `f_align` is a set overlap in [0, 1]; `d_hom` is a reciprocal distance
/// in (0, 1]; `a_sim` is 1 minus a normalized distance and goes negative
/// once the descriptors differ by more than the target's norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfsComponents {
    pub f_align: f64,
    pub a_sim: f64,
    pub d_hom: f64,
}

impl TfsComponents {
    pub fn new(f_align: f64, a_sim: f64, d_hom: f64) -> Result<TfsComponents> {
        let c = TfsComponents {
            f_align,
            a_sim,
            d_hom,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.f_align) {
            return Err(Error::InvalidParameter(format!(
                "f_align must be in [0, 1], got {}",
                self.f_align
            )));
        }
        if !(self.a_sim.is_finite() && self.a_sim <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "a_sim must be finite and at most 1, got {}",
                self.a_sim
            )));
        }
        if !(self.d_hom.is_finite() && self.d_hom > 0.0 && self.d_hom <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "d_hom must be in (0, 1], got {}",
                self.d_hom
            )));
        }
        Ok(())
    }
}

/// Component weights (alpha, beta, gamma).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfsWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl TfsWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> TfsWeights {
        TfsWeights { alpha, beta, gamma }
    }

    /// Equal weighting, summing to one.
    pub fn equal() -> TfsWeights {
        TfsWeights {
            alpha: 1.0 / 3.0,
            beta: 1.0 / 3.0,
            gamma: 1.0 / 3.0,
        }
    }

    pub fn sum(&self) -> f64 {
        self.alpha + self.beta + self.gamma
    }

    /// True when the weights sum to one within `1e-9`.
    pub fn sums_to_one(&self) -> bool {
        (self.sum() - 1.0).abs() <= 1e-9
    }
}

/// Jaccard overlap of two feature sets. Errors when both are empty
/// (0/0 is undefined).
pub fn feature_alignment(fs: &FeatureSet, ft: &FeatureSet) -> Result<f64> {
    if fs.is_empty() && ft.is_empty() {
        return Err(Error::EmptyFeatureSets);
    }
    let intersection = fs.0.intersection(&ft.0).count();
    let union = fs.0.union(&ft.0).count();
    Ok(intersection as f64 / union as f64)
}

/// One minus the Euclidean distance between descriptors, normalized by
/// the target descriptor's norm. Equals 1 only for identical
/// descriptors and is unbounded below.
pub fn architecture_similarity(
    surrogate: &ArchitectureDescriptor,
    target: &ArchitectureDescriptor,
) -> Result<f64> {
    let target_norm = norm(target.as_slice());
    if target_norm == 0.0 {
        return Err(Error::ZeroNormDescriptor);
    }
    let diff: Vec<f64> = surrogate
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(s, t)| s - t)
        .collect();
    Ok(1.0 - norm(&diff) / target_norm)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The reciprocal transform from an aggregate distance to a homogeneity
/// score in (0, 1].
pub fn homogeneity_from_distance(distance: f64) -> f64 {
    1.0 / (1.0 + distance)
}

/// Data homogeneity between two datasets over a shared feature subset:
/// per-feature 1-D Wasserstein distances averaged, then mapped through
/// the reciprocal transform.
///
/// Both datasets must be normalized with the same scaler, otherwise raw
/// feature scales would dominate the distance.
pub fn data_homogeneity(
    surrogate_data: &Dataset,
    target_data: &Dataset,
    features: &FeatureSet,
) -> Result<f64> {
    let scaler_s = surrogate_data
        .scaler
        .as_ref()
        .ok_or_else(|| Error::ScalerMismatch("surrogate dataset is unnormalized".to_string()))?;
    let scaler_t = target_data
        .scaler
        .as_ref()
        .ok_or_else(|| Error::ScalerMismatch("target dataset is unnormalized".to_string()))?;
    if scaler_s != scaler_t {
        return Err(Error::ScalerMismatch(
            "datasets were normalized with different scalers".to_string(),
        ));
    }

    let shared: Vec<Feature> = Feature::all()
        .into_iter()
        .filter(|f| features.contains(f.name()))
        .collect();
    if shared.is_empty() {
        return Err(Error::EmptySharedFeatures);
    }

    let mut total = 0.0;
    for feature in &shared {
        total += wasserstein_1d(
            &surrogate_data.feature_column(*feature),
            &target_data.feature_column(*feature),
        )?;
    }
    Ok(homogeneity_from_distance(total / shared.len() as f64))
}

/// The weighted combination of raw component values.
pub fn weighted_combination(f_align: f64, a_sim: f64, d_hom: f64, w: &TfsWeights) -> f64 {
    w.alpha * f_align + w.beta * a_sim + w.gamma * d_hom
}

/// The score itself: a plain weighted sum with no clamping, so negative
/// components propagate.
pub fn compute_tfs(components: &TfsComponents, weights: &TfsWeights) -> f64 {
    weighted_combination(
        components.f_align,
        components.a_sim,
        components.d_hom,
        weights,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FlowRecord, Label, ScalerParams};

    #[test]
    fn alignment_identities() {
        let base = FeatureSet::from_features(&Feature::base());
        let six = FeatureSet::from_features(&Feature::base_and_rates());
        assert_eq!(feature_alignment(&base, &base).unwrap(), 1.0);

        let disjoint = FeatureSet::new(["ratio_out_in"]);
        assert_eq!(feature_alignment(&base, &disjoint).unwrap(), 0.0);

        // 4 shared of 6 distinct features.
        let overlap = feature_alignment(&base, &six).unwrap();
        assert!((overlap - 4.0 / 6.0).abs() <= 1e-12);
    }

    #[test]
    fn alignment_is_case_insensitive_and_errors_on_double_empty() {
        let a = FeatureSet::new(["Duration", "TOTPKTS".to_lowercase()]);
        let b = FeatureSet::new(["duration", "totpkts"]);
        assert_eq!(feature_alignment(&a, &b).unwrap(), 1.0);
        assert!(matches!(
            feature_alignment(&FeatureSet::new::<_, &str>([]), &FeatureSet::new::<_, &str>([])),
            Err(Error::EmptyFeatureSets)
        ));
    }

    #[test]
    fn architecture_similarity_identities() {
        let p = ArchitectureDescriptor([0.0, 3.0, 128.0, 4.5, 2.0]);
        assert_eq!(architecture_similarity(&p, &p).unwrap(), 1.0);

        let zero = ArchitectureDescriptor([0.0; 5]);
        assert_eq!(architecture_similarity(&zero, &p).unwrap(), 0.0);

        let negated = ArchitectureDescriptor([-0.0, -3.0, -128.0, -4.5, -2.0]);
        assert_eq!(architecture_similarity(&negated, &p).unwrap(), -1.0);

        assert!(matches!(
            architecture_similarity(&p, &zero),
            Err(Error::ZeroNormDescriptor)
        ));
    }

    fn unit_scaled(rows: Vec<FlowRecord>) -> Dataset {
        let mut d = Dataset::new(rows);
        d.scaler = Some(ScalerParams {
            ranges: vec![(0.0, 1.0); Feature::COUNT],
        });
        d
    }

    fn row_with(duration: f64, tot_pkts: f64) -> FlowRecord {
        let mut r = FlowRecord::from_base(0.0, 0.0, 0.0, 0.0, Label::Benign);
        r.duration = duration;
        r.tot_pkts = tot_pkts;
        r
    }

    #[test]
    fn homogeneity_of_identical_data_is_one() {
        let d = unit_scaled(vec![row_with(0.2, 0.4), row_with(0.5, 0.9)]);
        let features = FeatureSet::from_features(&Feature::all());
        assert_eq!(data_homogeneity(&d, &d, &features).unwrap(), 1.0);
    }

    #[test]
    fn homogeneity_averages_per_feature_distances() {
        // duration distance 0.2, tot_pkts distance 0.4: mean 0.3.
        let a = unit_scaled(vec![row_with(0.0, 0.0)]);
        let b = unit_scaled(vec![row_with(0.2, 0.4)]);
        let features = FeatureSet::new(["duration", "tot_pkts"]);
        let h = data_homogeneity(&a, &b, &features).unwrap();
        assert!((h - 1.0 / 1.3).abs() <= 1e-12);
        assert!((h - 0.7692307692307692).abs() <= 1e-12);
    }

    #[test]
    fn homogeneity_requires_shared_scaler_and_features() {
        let mut a = unit_scaled(vec![row_with(0.1, 0.1)]);
        let b = unit_scaled(vec![row_with(0.2, 0.2)]);
        let features = FeatureSet::new(["duration"]);

        a.scaler = None;
        assert!(matches!(
            data_homogeneity(&a, &b, &features),
            Err(Error::ScalerMismatch(_))
        ));

        a.scaler = Some(ScalerParams {
            ranges: vec![(0.0, 2.0); Feature::COUNT],
        });
        assert!(matches!(
            data_homogeneity(&a, &b, &features),
            Err(Error::ScalerMismatch(_))
        ));

        let unknown = FeatureSet::new(["not_a_feature"]);
        assert!(matches!(
            data_homogeneity(&b, &b, &unknown),
            Err(Error::EmptySharedFeatures)
        ));
    }

    #[test]
    fn reciprocal_transform_matches_reported_component() {
        let h = homogeneity_from_distance(0.6404);
        assert!((h - 0.6096).abs() < 5e-4);
    }

    #[test]
    fn score_combination_identities() {
        let equal = TfsWeights::equal();
        let unit = TfsComponents::new(1.0, 1.0, 1.0).unwrap();
        assert!((compute_tfs(&unit, &equal) - 1.0).abs() <= 1e-12);

        let zero = TfsComponents {
            f_align: 0.0,
            a_sim: 0.0,
            d_hom: 0.5,
        };
        let w = TfsWeights::new(0.9, 0.1, 0.0);
        assert_eq!(compute_tfs(&zero, &w), 0.0);

        // Negative architecture similarity propagates unclamped.
        let mixed = TfsComponents::new(1.0, -0.6061, 0.6096).unwrap();
        let score = compute_tfs(&mixed, &equal);
        assert!((score - 0.3345).abs() < 1e-4);
    }

    #[test]
    fn component_validation_enforces_ranges() {
        assert!(TfsComponents::new(1.1, 0.0, 0.5).is_err());
        assert!(TfsComponents::new(0.5, 1.5, 0.5).is_err());
        assert!(TfsComponents::new(0.5, -2.0, 0.5).is_ok());
        assert!(TfsComponents::new(0.5, 0.5, 0.0).is_err());
        assert!(TfsComponents::new(0.5, 0.5, 1.0).is_ok());
    }

    #[test]
    fn equal_weights_sum_to_one() {
        assert!(TfsWeights::equal().sums_to_one());
    }
}
