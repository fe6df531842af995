//! Multilayer perceptron trained with Adam on softmax cross-entropy.
//!
//! ReLU hidden layers with inverted dropout during training, integer
//! labels, deterministic seeded initialization and shuffling. The
//! parameter/gradient accessors exist so training can be verified against
//! finite differences from outside the crate.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Feature, Label};
use crate::error::{Error, Result};

/// MLP hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden_layers: Vec<usize>,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden_layers: vec![128, 128, 128],
            dropout_rate: 0.2,
            learning_rate: 0.001,
            epochs: 30,
            batch_size: 64,
            seed: 0,
        }
    }
}

impl MlpParams {
    fn validate(&self) -> Result<()> {
        if self.hidden_layers.iter().any(|w| *w == 0) {
            return Err(Error::InvalidParameter(
                "hidden layer widths must be at least 1".to_string(),
            ));
        }
        if !(self.dropout_rate >= 0.0 && self.dropout_rate < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "dropout_rate must be in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidParameter(
                "epochs and batch_size must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `[out_dim x in_dim]`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum();
            out.push(z + self.biases[o]);
        }
    }
}

/// A trained MLP over a fixed feature subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub features: Vec<Feature>,
    pub layers: Vec<DenseLayer>,
    pub params: MlpParams,
}

const OUTPUT_CLASSES: usize = 2;
const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Per-layer gradient buffers matching a model's layer shapes.
#[derive(Debug, Clone)]
struct LayerGrads {
    weights: Vec<f64>,
    biases: Vec<f64>,
}

fn zero_grads(layers: &[DenseLayer]) -> Vec<LayerGrads> {
    layers
        .iter()
        .map(|l| LayerGrads {
            weights: vec![0.0; l.weights.len()],
            biases: vec![0.0; l.biases.len()],
        })
        .collect()
}

/// Forward/backward over a batch, accumulating mean loss and mean
/// gradients. `dropout` supplies (rate, rng) during training; `None`
/// disables dropout entirely.
fn batch_gradients(
    layers: &[DenseLayer],
    xs: &[&[f64]],
    ys: &[usize],
    mut dropout: Option<(f64, &mut ChaCha8Rng)>,
    grads: &mut [LayerGrads],
) -> f64 {
    let n_layers = layers.len();
    let scale = 1.0 / xs.len() as f64;
    let mut total_loss = 0.0;

    let mut activations: Vec<Vec<f64>> = vec![Vec::new(); n_layers];
    let mut masks: Vec<Vec<f64>> = vec![Vec::new(); n_layers];

    for (x, &y) in xs.iter().zip(ys) {
        // Forward: hidden layers get ReLU (+ dropout), the last is linear.
        let mut input: Vec<f64> = x.to_vec();
        for (li, layer) in layers.iter().enumerate() {
            let mut z = Vec::with_capacity(layer.out_dim);
            layer.forward(&input, &mut z);
            if li < n_layers - 1 {
                for v in z.iter_mut() {
                    *v = v.max(0.0);
                }
                masks[li].clear();
                if let Some((rate, ref mut rng)) = dropout {
                    let keep = 1.0 - rate;
                    for v in z.iter_mut() {
                        let kept = rng.gen::<f64>() < keep;
                        let m = if kept { 1.0 / keep } else { 0.0 };
                        masks[li].push(m);
                        *v *= m;
                    }
                } else {
                    masks[li].resize(z.len(), 1.0);
                }
            }
            activations[li] = z.clone();
            input = z;
        }

        let probs = softmax(&activations[n_layers - 1]);
        total_loss -= probs[y].max(1e-300).ln();

        // Backward from the softmax cross-entropy gradient.
        let mut delta: Vec<f64> = probs;
        delta[y] -= 1.0;

        for li in (0..n_layers).rev() {
            let layer = &layers[li];
            let below: &[f64] = if li == 0 { x } else { &activations[li - 1] };
            for o in 0..layer.out_dim {
                let g = delta[o] * scale;
                let row = &mut grads[li].weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (slot, v) in row.iter_mut().zip(below) {
                    *slot += g * v;
                }
                grads[li].biases[o] += g;
            }
            if li > 0 {
                let mut next = vec![0.0; layer.in_dim];
                for o in 0..layer.out_dim {
                    let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                    let d = delta[o];
                    for (slot, w) in next.iter_mut().zip(row) {
                        *slot += d * w;
                    }
                }
                // Through dropout, then ReLU.
                for (i, slot) in next.iter_mut().enumerate() {
                    *slot *= masks[li - 1][i];
                    if activations[li - 1][i] <= 0.0 {
                        *slot = 0.0;
                    }
                }
                delta = next;
            }
        }
    }

    total_loss * scale
}

impl MlpModel {
    /// Seeded He-uniform initialization for the given feature subset.
    pub fn new(features: &[Feature], params: &MlpParams) -> Result<MlpModel> {
        params.validate()?;
        if features.is_empty() {
            return Err(Error::InvalidParameter("empty feature list".to_string()));
        }
        let mut dims = vec![features.len()];
        dims.extend_from_slice(&params.hidden_layers);
        dims.push(OUTPUT_CLASSES);

        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let layers = dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / fan_in as f64).sqrt();
                DenseLayer {
                    in_dim: fan_in,
                    out_dim: fan_out,
                    weights: (0..fan_in * fan_out)
                        .map(|_| rng.gen_range(-limit..limit))
                        .collect(),
                    biases: vec![0.0; fan_out],
                }
            })
            .collect();

        Ok(MlpModel {
            features: features.to_vec(),
            layers,
            params: params.clone(),
        })
    }

    /// Class probabilities with dropout disabled.
    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let mut input = x.to_vec();
        let mut out = Vec::new();
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            layer.forward(&input, &mut out);
            if li < last {
                for v in out.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            std::mem::swap(&mut input, &mut out);
        }
        softmax(&input)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Flattened parameters, layer by layer (weights then biases).
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.biases);
        }
        out
    }

    pub fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.parameter_count() {
            return Err(Error::ArityMismatch {
                expected: self.parameter_count(),
                got: values.len(),
            });
        }
        let mut at = 0usize;
        for layer in &mut self.layers {
            layer.weights.copy_from_slice(&values[at..at + layer.weights.len()]);
            at += layer.weights.len();
            layer.biases.copy_from_slice(&values[at..at + layer.biases.len()]);
            at += layer.biases.len();
        }
        Ok(())
    }

    /// Mean cross-entropy over a batch, dropout disabled.
    pub fn loss(&self, xs: &[Vec<f64>], ys: &[usize]) -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(x, &y)| -self.probabilities(x)[y].max(1e-300).ln())
            .sum::<f64>()
            / xs.len() as f64
    }

    /// Mean loss and its gradient w.r.t. the flattened parameters,
    /// dropout disabled.
    pub fn loss_gradients(&self, xs: &[Vec<f64>], ys: &[usize]) -> (f64, Vec<f64>) {
        let refs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
        let mut grads = zero_grads(&self.layers);
        let loss = batch_gradients(&self.layers, &refs, ys, None, &mut grads);
        let mut flat = Vec::with_capacity(self.parameter_count());
        for g in &grads {
            flat.extend_from_slice(&g.weights);
            flat.extend_from_slice(&g.biases);
        }
        (loss, flat)
    }
}

/// Train an MLP on the dataset's feature subset. Fails with
/// [`Error::TrainingDiverged`] if the loss ever becomes non-finite.
pub fn train_mlp(train: &Dataset, features: &[Feature], params: &MlpParams) -> Result<MlpModel> {
    if train.is_empty() {
        return Err(Error::InvalidParameter("empty training set".to_string()));
    }
    if !train.has_both_classes() {
        return Err(Error::SingleClass);
    }
    for record in &train.records {
        for feature in features {
            if !record.get(*feature).is_finite() {
                return Err(Error::NonFiniteInput(feature.name().to_string()));
            }
        }
    }

    let mut model = MlpModel::new(features, params)?;
    let xs: Vec<Vec<f64>> = train.records.iter().map(|r| r.select(features)).collect();
    let ys: Vec<usize> = train.records.iter().map(|r| r.label.index()).collect();

    // Initialization consumed the parameter seed; derive training rng
    // from it so init and shuffling stay independent but reproducible.
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(0x9e3779b97f4a7c15));

    let mut m = zero_grads(&model.layers);
    let mut v = zero_grads(&model.layers);
    let mut step = 0usize;
    let mut indices: Vec<usize> = (0..xs.len()).collect();
    let dropout_active = params.dropout_rate > 0.0;

    for epoch in 0..params.epochs {
        indices.shuffle(&mut rng);
        for batch in indices.chunks(params.batch_size) {
            let bx: Vec<&[f64]> = batch.iter().map(|&i| xs[i].as_slice()).collect();
            let by: Vec<usize> = batch.iter().map(|&i| ys[i]).collect();

            let mut grads = zero_grads(&model.layers);
            let dropout = if dropout_active {
                Some((params.dropout_rate, &mut rng))
            } else {
                None
            };
            let loss = batch_gradients(&model.layers, &bx, &by, dropout, &mut grads);
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }

            step += 1;
            let bc1 = 1.0 - ADAM_BETA1.powi(step as i32);
            let bc2 = 1.0 - ADAM_BETA2.powi(step as i32);
            for ((layer, grad), (ms, vs)) in model
                .layers
                .iter_mut()
                .zip(&grads)
                .zip(m.iter_mut().zip(v.iter_mut()))
            {
                let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                    for i in 0..p.len() {
                        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                        let m_hat = m[i] / bc1;
                        let v_hat = v[i] / bc2;
                        p[i] -= params.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
                    }
                };
                update(&mut layer.weights, &grad.weights, &mut ms.weights, &mut vs.weights);
                update(&mut layer.biases, &grad.biases, &mut ms.biases, &mut vs.biases);
            }
        }
    }

    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FlowRecord;

    fn xor_dataset(per_corner: usize) -> Dataset {
        let mut records = Vec::new();
        for i in 0..per_corner {
            let jitter = (i % 7) as f64 * 0.002;
            for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                let label = if (a > 0.5) != (b > 0.5) {
                    Label::Malicious
                } else {
                    Label::Benign
                };
                records.push(FlowRecord::from_base(
                    a + jitter,
                    b + jitter,
                    1.0,
                    1.0,
                    label,
                ));
            }
        }
        Dataset::new(records)
    }

    #[test]
    fn learns_xor() {
        let data = xor_dataset(40);
        let params = MlpParams {
            hidden_layers: vec![16],
            dropout_rate: 0.0,
            learning_rate: 0.01,
            epochs: 300,
            batch_size: 32,
            seed: 4,
        };
        let feats = [Feature::Duration, Feature::TotPkts];
        let model = train_mlp(&data, &feats, &params).unwrap();
        let hits = data
            .records
            .iter()
            .filter(|r| {
                let p = model.probabilities(&r.select(&feats));
                let predicted = if p[0] >= p[1] { Label::Benign } else { Label::Malicious };
                predicted == r.label
            })
            .count();
        let acc = hits as f64 / data.len() as f64;
        assert!(acc >= 0.95, "training accuracy {acc}");
    }

    #[test]
    fn untrained_probabilities_sum_to_one() {
        let model = MlpModel::new(&[Feature::Duration, Feature::InBytes], &MlpParams::default())
            .unwrap();
        let p = model.probabilities(&[0.3, 0.7]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn zero_weights_give_uniform_probabilities() {
        let mut model = MlpModel::new(
            &[Feature::Duration, Feature::TotPkts],
            &MlpParams {
                hidden_layers: vec![4],
                ..Default::default()
            },
        )
        .unwrap();
        let zeros = vec![0.0; model.parameter_count()];
        model.set_parameters(&zeros).unwrap();
        let p = model.probabilities(&[0.9, 0.1]);
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn one_adam_step_decreases_single_sample_loss() {
        let data = Dataset::new(vec![
            FlowRecord::from_base(0.9, 0.1, 1.0, 1.0, Label::Malicious),
            FlowRecord::from_base(0.1, 0.9, 1.0, 1.0, Label::Benign),
        ]);
        let feats = [Feature::Duration, Feature::TotPkts];
        let params = MlpParams {
            hidden_layers: vec![8],
            dropout_rate: 0.0,
            learning_rate: 1e-3,
            epochs: 1,
            batch_size: 2,
            seed: 7,
        };
        let before = MlpModel::new(&feats, &params).unwrap();
        let xs: Vec<Vec<f64>> = data.records.iter().map(|r| r.select(&feats)).collect();
        let ys: Vec<usize> = data.records.iter().map(|r| r.label.index()).collect();
        let loss_before = before.loss(&xs, &ys);

        let after = train_mlp(&data, &feats, &params).unwrap();
        let loss_after = after.loss(&xs, &ys);
        assert!(
            loss_after < loss_before,
            "loss went {loss_before} -> {loss_after}"
        );
    }

    #[test]
    fn inference_is_deterministic_despite_training_dropout() {
        let data = xor_dataset(10);
        let params = MlpParams {
            hidden_layers: vec![8],
            dropout_rate: 0.5,
            learning_rate: 0.01,
            epochs: 5,
            batch_size: 16,
            seed: 2,
        };
        let feats = [Feature::Duration, Feature::TotPkts];
        let model = train_mlp(&data, &feats, &params).unwrap();
        let a = model.probabilities(&[0.4, 0.6]);
        let b = model.probabilities(&[0.4, 0.6]);
        assert_eq!(a, b);
    }

    #[test]
    fn training_is_deterministic_for_fixed_seed() {
        let data = xor_dataset(15);
        let params = MlpParams {
            hidden_layers: vec![8, 8],
            dropout_rate: 0.2,
            learning_rate: 0.005,
            epochs: 8,
            batch_size: 16,
            seed: 31,
        };
        let feats = [Feature::Duration, Feature::TotPkts];
        let a = train_mlp(&data, &feats, &params).unwrap();
        let b = train_mlp(&data, &feats, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let model = MlpModel::new(
            &[Feature::Duration, Feature::TotPkts, Feature::InBytes],
            &MlpParams {
                hidden_layers: vec![5],
                seed: 13,
                ..Default::default()
            },
        )
        .unwrap();
        let xs = vec![
            vec![0.2, 0.8, 0.5],
            vec![0.9, 0.1, 0.3],
            vec![0.4, 0.4, 0.9],
        ];
        let ys = vec![0usize, 1, 0];
        let (_, analytic) = model.loss_gradients(&xs, &ys);

        let h = 1e-6;
        let mut probe = model.clone();
        let base = model.parameters();
        for (i, g) in analytic.iter().enumerate() {
            let mut plus = base.clone();
            plus[i] += h;
            probe.set_parameters(&plus).unwrap();
            let up = probe.loss(&xs, &ys);
            let mut minus = base.clone();
            minus[i] -= h;
            probe.set_parameters(&minus).unwrap();
            let down = probe.loss(&xs, &ys);
            let numeric = (up - down) / (2.0 * h);
            let denom = g.abs().max(numeric.abs()).max(1e-8);
            assert!(
                ((g - numeric) / denom).abs() < 1e-4,
                "param {i}: analytic {g}, numeric {numeric}"
            );
        }
    }
}
