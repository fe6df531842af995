//! Random forest of CART-style trees with Gini splits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Feature, Label};
use crate::error::{Error, Result};

/// Random-forest hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestParams {
    pub n_estimators: usize,
    /// `None` grows trees until pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for RandomForestParams {
    fn default() -> Self {
        RandomForestParams {
            n_estimators: 200,
            max_depth: None,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        label: Label,
    },
    Split {
        /// Index into the model's feature list.
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn vote(&self, x: &[f64]) -> Label {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    fn split_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Split { .. }))
            .count()
    }
}

/// A trained random forest over a fixed feature subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub features: Vec<Feature>,
    pub trees: Vec<Tree>,
    pub params: RandomForestParams,
    /// Deepest path actually grown across the ensemble.
    pub realized_max_depth: usize,
}

impl ForestModel {
    /// Fraction of trees voting for each class, benign first.
    pub fn probabilities(&self, x: &[f64]) -> [f64; 2] {
        let malicious = self
            .trees
            .iter()
            .filter(|t| t.vote(x) == Label::Malicious)
            .count();
        let n = self.trees.len() as f64;
        [(self.trees.len() - malicious) as f64 / n, malicious as f64 / n]
    }

    /// Total split nodes across the ensemble.
    pub fn decision_parameter_count(&self) -> usize {
        self.trees.iter().map(Tree::split_count).sum()
    }
}

fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

fn majority(counts: [usize; 2]) -> Label {
    if counts[0] >= counts[1] {
        Label::Benign
    } else {
        Label::Malicious
    }
}

struct TreeBuilder<'a> {
    xs: &'a [Vec<f64>],
    ys: &'a [Label],
    max_depth: Option<usize>,
    min_samples_split: usize,
    features_per_split: usize,
    n_features: usize,
    nodes: Vec<Node>,
    deepest: usize,
}

impl<'a> TreeBuilder<'a> {
    fn class_counts(&self, indices: &[usize]) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &i in indices {
            counts[self.ys[i].index()] += 1;
        }
        counts
    }

    fn build(&mut self, indices: &mut Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        self.deepest = self.deepest.max(depth);
        let counts = self.class_counts(indices);
        let node_gini = gini(counts);

        let depth_capped = self.max_depth.is_some_and(|cap| depth >= cap);
        if node_gini == 0.0 || indices.len() < self.min_samples_split || depth_capped {
            self.nodes.push(Node::Leaf { label: majority(counts) });
            return self.nodes.len() - 1;
        }

        let candidates =
            rand::seq::index::sample(rng, self.n_features, self.features_per_split).into_vec();

        let mut best: Option<(f64, usize, f64)> = None; // (weighted gini, feature, threshold)
        let total = indices.len();
        for feature in candidates {
            let mut ordered: Vec<(f64, Label)> = indices
                .iter()
                .map(|&i| (self.xs[i][feature], self.ys[i]))
                .collect();
            ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));

            let mut left = [0usize; 2];
            let mut right = counts;
            for i in 0..total - 1 {
                left[ordered[i].1.index()] += 1;
                right[ordered[i].1.index()] -= 1;
                if ordered[i + 1].0 > ordered[i].0 {
                    let n_left = (i + 1) as f64;
                    let n_right = (total - i - 1) as f64;
                    let weighted =
                        (n_left * gini(left) + n_right * gini(right)) / total as f64;
                    let threshold = (ordered[i].0 + ordered[i + 1].0) / 2.0;
                    if best.map_or(true, |(g, _, _)| weighted < g - 1e-12) {
                        best = Some((weighted, feature, threshold));
                    }
                }
            }
        }

        match best {
            Some((weighted, feature, threshold)) if weighted < node_gini - 1e-12 => {
                let (mut left_idx, mut right_idx): (Vec<usize>, Vec<usize>) = indices
                    .drain(..)
                    .partition(|&i| self.xs[i][feature] <= threshold);
                let slot = self.nodes.len();
                self.nodes.push(Node::Leaf { label: Label::Benign }); // placeholder
                let left = self.build(&mut left_idx, depth + 1, rng);
                let right = self.build(&mut right_idx, depth + 1, rng);
                self.nodes[slot] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                slot
            }
            _ => {
                self.nodes.push(Node::Leaf { label: majority(counts) });
                self.nodes.len() - 1
            }
        }
    }
}

/// Train a forest of `n_estimators` trees, each on a bootstrap sample
/// with `floor(sqrt(d))` random candidate features per split.
/// Deterministic for a fixed seed.
pub fn train_random_forest(
    train: &Dataset,
    features: &[Feature],
    params: &RandomForestParams,
) -> Result<ForestModel> {
    if train.is_empty() {
        return Err(Error::InvalidParameter("empty training set".to_string()));
    }
    if !train.has_both_classes() {
        return Err(Error::SingleClass);
    }
    if params.n_estimators == 0 {
        return Err(Error::InvalidParameter(
            "n_estimators must be at least 1".to_string(),
        ));
    }
    if features.is_empty() {
        return Err(Error::InvalidParameter("empty feature list".to_string()));
    }

    let xs: Vec<Vec<f64>> = train.records.iter().map(|r| r.select(features)).collect();
    let ys: Vec<Label> = train.records.iter().map(|r| r.label).collect();
    let n = xs.len();
    let d = features.len();
    let features_per_split = ((d as f64).sqrt() as usize).max(1);

    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let tree_seeds: Vec<u64> = (0..params.n_estimators).map(|_| master.gen()).collect();

    let mut trees = Vec::with_capacity(params.n_estimators);
    let mut realized_max_depth = 0usize;
    for seed in tree_seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let mut builder = TreeBuilder {
            xs: &xs,
            ys: &ys,
            max_depth: params.max_depth,
            min_samples_split: params.min_samples_split.max(2),
            features_per_split,
            n_features: d,
            nodes: Vec::new(),
            deepest: 0,
        };
        builder.build(&mut bootstrap, 0, &mut rng);
        realized_max_depth = realized_max_depth.max(builder.deepest);
        trees.push(Tree { nodes: builder.nodes });
    }

    Ok(ForestModel {
        features: features.to_vec(),
        trees,
        params: params.clone(),
        realized_max_depth,
    })
}
