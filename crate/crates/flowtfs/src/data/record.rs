//! Flow records and the canonical feature universe.

use serde::{Deserialize, Serialize};

/// Shared guard constant: substituted for zero durations before rate
/// derivation and added to the denominator of the byte ratio.
pub const EPSILON_GUARD: f64 = 1e-6;

/// The seven canonical flow features carried by every record.
///
/// The first four are base features measured directly from a flow; the
/// last three are derived from them and recomputed whenever the base
/// features change.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Duration,
    TotPkts,
    InBytes,
    OutBytes,
    BytesPerSec,
    PktsPerSec,
    RatioOutIn,
}

impl Feature {
    /// Number of features in the universe.
    pub const COUNT: usize = 7;

    /// All seven features in canonical order.
    pub fn all() -> [Feature; 7] {
        [
            Feature::Duration,
            Feature::TotPkts,
            Feature::InBytes,
            Feature::OutBytes,
            Feature::BytesPerSec,
            Feature::PktsPerSec,
            Feature::RatioOutIn,
        ]
    }

    /// The four directly measured base features.
    pub fn base() -> [Feature; 4] {
        [
            Feature::Duration,
            Feature::TotPkts,
            Feature::InBytes,
            Feature::OutBytes,
        ]
    }

    /// Base features plus the two rate features (the default detector view).
    pub fn base_and_rates() -> [Feature; 6] {
        [
            Feature::Duration,
            Feature::TotPkts,
            Feature::InBytes,
            Feature::OutBytes,
            Feature::BytesPerSec,
            Feature::PktsPerSec,
        ]
    }

    /// Position in canonical order.
    pub fn index(self) -> usize {
        match self {
            Feature::Duration => 0,
            Feature::TotPkts => 1,
            Feature::InBytes => 2,
            Feature::OutBytes => 3,
            Feature::BytesPerSec => 4,
            Feature::PktsPerSec => 5,
            Feature::RatioOutIn => 6,
        }
    }

    /// Canonical lower-case name.
    pub fn name(self) -> &'static str {
        match self {
            Feature::Duration => "duration",
            Feature::TotPkts => "tot_pkts",
            Feature::InBytes => "in_bytes",
            Feature::OutBytes => "out_bytes",
            Feature::BytesPerSec => "bytes_per_sec",
            Feature::PktsPerSec => "pkts_per_sec",
            Feature::RatioOutIn => "ratio_out_in",
        }
    }

    /// Case-insensitive lookup by canonical name.
    pub fn parse(name: &str) -> Option<Feature> {
        let lowered = name.trim().to_ascii_lowercase();
        Feature::all().into_iter().find(|f| f.name() == lowered)
    }

    /// True for the three features that are functions of the base four.
    pub fn is_derived(self) -> bool {
        self.index() >= 4
    }

    /// Features whose value changes when this base feature changes
    /// (including the feature itself). Derived features only move
    /// through their inputs, so they map to themselves alone.
    pub fn influences(self) -> &'static [Feature] {
        match self {
            Feature::Duration => &[
                Feature::Duration,
                Feature::BytesPerSec,
                Feature::PktsPerSec,
            ],
            Feature::TotPkts => &[Feature::TotPkts, Feature::PktsPerSec],
            Feature::InBytes => &[
                Feature::InBytes,
                Feature::BytesPerSec,
                Feature::RatioOutIn,
            ],
            Feature::OutBytes => &[
                Feature::OutBytes,
                Feature::BytesPerSec,
                Feature::RatioOutIn,
            ],
            other => match other {
                Feature::BytesPerSec => &[Feature::BytesPerSec],
                Feature::PktsPerSec => &[Feature::PktsPerSec],
                _ => &[Feature::RatioOutIn],
            },
        }
    }
}

impl std::fmt::Display for Feature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Binary traffic label.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Benign,
    Malicious,
}

impl Label {
    /// Class index: benign = 0, malicious = 1.
    pub fn index(self) -> usize {
        match self {
            Label::Benign => 0,
            Label::Malicious => 1,
        }
    }

    pub fn from_index(index: usize) -> Label {
        if index == 0 {
            Label::Benign
        } else {
            Label::Malicious
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Label::Benign => "benign",
            Label::Malicious => "malicious",
        })
    }
}

/// One aggregated network flow: four base features, three derived
/// features, a class label, and (before preprocessing drops it) the
/// transport protocol the flow was observed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub duration: f64,
    pub tot_pkts: f64,
    pub in_bytes: f64,
    pub out_bytes: f64,
    pub bytes_per_sec: f64,
    pub pkts_per_sec: f64,
    pub ratio_out_in: f64,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<String>,
}

impl FlowRecord {
    /// Build a record from base features, deriving the rest.
    pub fn from_base(
        duration: f64,
        tot_pkts: f64,
        in_bytes: f64,
        out_bytes: f64,
        label: Label,
    ) -> FlowRecord {
        let mut record = FlowRecord {
            duration,
            tot_pkts,
            in_bytes,
            out_bytes,
            bytes_per_sec: 0.0,
            pkts_per_sec: 0.0,
            ratio_out_in: 0.0,
            label,
            protocol: None,
        };
        record.recompute_derived();
        record
    }

    pub fn get(&self, feature: Feature) -> f64 {
        match feature {
            Feature::Duration => self.duration,
            Feature::TotPkts => self.tot_pkts,
            Feature::InBytes => self.in_bytes,
            Feature::OutBytes => self.out_bytes,
            Feature::BytesPerSec => self.bytes_per_sec,
            Feature::PktsPerSec => self.pkts_per_sec,
            Feature::RatioOutIn => self.ratio_out_in,
        }
    }

    pub fn set(&mut self, feature: Feature, value: f64) {
        match feature {
            Feature::Duration => self.duration = value,
            Feature::TotPkts => self.tot_pkts = value,
            Feature::InBytes => self.in_bytes = value,
            Feature::OutBytes => self.out_bytes = value,
            Feature::BytesPerSec => self.bytes_per_sec = value,
            Feature::PktsPerSec => self.pkts_per_sec = value,
            Feature::RatioOutIn => self.ratio_out_in = value,
        }
    }

    /// Extract the given features in order.
    pub fn select(&self, features: &[Feature]) -> Vec<f64> {
        features.iter().map(|f| self.get(*f)).collect()
    }

    /// Recompute the three derived features from the base four.
    ///
    /// Zero (or sub-guard) durations are replaced by [`EPSILON_GUARD`] in
    /// the rate denominators, and the byte ratio adds the same guard to
    /// its denominator so a zero-inbyte flow stays finite.
    pub fn recompute_derived(&mut self) {
        let denom = self.duration.max(EPSILON_GUARD);
        self.bytes_per_sec = (self.in_bytes + self.out_bytes) / denom;
        self.pkts_per_sec = self.tot_pkts / denom;
        self.ratio_out_in = self.out_bytes / (self.in_bytes + EPSILON_GUARD);
    }

    /// All base features finite and nonnegative.
    pub fn base_is_clean(&self) -> bool {
        [self.duration, self.tot_pkts, self.in_bytes, self.out_bytes]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_features_follow_base() {
        let r = FlowRecord::from_base(2.0, 10.0, 100.0, 300.0, Label::Benign);
        assert!((r.bytes_per_sec - 200.0).abs() <= 1e-9);
        assert!((r.pkts_per_sec - 5.0).abs() <= 1e-9);
        assert!((r.ratio_out_in - 300.0 / (100.0 + EPSILON_GUARD)).abs() <= 1e-9);
    }

    #[test]
    fn zero_duration_uses_guard() {
        let r = FlowRecord::from_base(0.0, 10.0, 0.0, 0.0, Label::Malicious);
        assert_eq!(r.pkts_per_sec, 10.0 / 1e-6);
        assert_eq!(r.pkts_per_sec, 1e7);
    }

    #[test]
    fn feature_roundtrip_by_name() {
        for f in Feature::all() {
            assert_eq!(Feature::parse(f.name()), Some(f));
            assert_eq!(Feature::parse(&f.name().to_uppercase()), Some(f));
        }
        assert_eq!(Feature::parse("unknown"), None);
    }

    #[test]
    fn get_set_cover_all_features() {
        let mut r = FlowRecord::from_base(1.0, 1.0, 1.0, 1.0, Label::Benign);
        for (i, f) in Feature::all().into_iter().enumerate() {
            r.set(f, i as f64);
            assert_eq!(r.get(f), i as f64);
            assert_eq!(f.index(), i);
        }
    }
}
