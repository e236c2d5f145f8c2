//! ReLU multilayer perceptron with activation recording, analytic backprop
//! and Adam-based MAP training.
//!
//! A net with `layer_dims = [n_0, ..., n_{L-1}, c]` has `L` affine layers;
//! every layer except the last is followed by a ReLU. The forward pass
//! records the input and every post-ReLU activation, which is exactly the
//! stack of representations the layered DSCS kernel is evaluated on.

use serde::{Deserialize, Serialize};

use crate::data::{LabeledDataset, Targets};
use crate::error::{Error, Result};
use crate::numerics::{dot, Matrix, Rng};

/// Which flattened parameter subset an operation refers to.
///
/// Flattening order: per layer, weights row-major, then the bias vector.
/// `LastLayer` covers only the final affine layer; `All` covers every layer
/// in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamSubset {
    LastLayer,
    All,
}

/// Feed-forward ReLU network. Weight `l` has shape `n_{l+1} x n_l`; the
/// output layer is affine with no activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReluNet {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

/// Record of one forward pass: the input, every post-ReLU hidden
/// activation, and the logits.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// `activations[0]` is the raw input; `activations[l]` for `l >= 1` is
    /// the (entrywise nonnegative) output of hidden layer `l`.
    pub activations: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
}

impl ForwardTrace {
    /// Concatenated active-ReLU mask over all hidden layers; identifies the
    /// linear region the input lies in.
    pub fn active_pattern(&self) -> Vec<bool> {
        self.activations[1..]
            .iter()
            .flat_map(|h| h.iter().map(|v| *v > 0.0))
            .collect()
    }
}

/// MAP training configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Precision of the isotropic Gaussian prior on the parameters.
    pub prior_precision: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            prior_precision: 1e-2,
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl ReluNet {
    /// He-uniform initialization scaled by layer fan-in.
    pub fn init(layer_dims: &[usize], rng: &mut Rng) -> ReluNet {
        assert!(layer_dims.len() >= 2, "need at least input and output dims");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..layer_dims.len() - 1 {
            let (fan_in, fan_out) = (layer_dims[l], layer_dims[l + 1]);
            let limit = (6.0 / fan_in as f64).sqrt();
            weights.push(Matrix::from_fn(fan_out, fan_in, |_, _| {
                rng.uniform_in(-limit, limit)
            }));
            biases.push(vec![0.0; fan_out]);
        }
        ReluNet {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
        }
    }

    /// Number of affine layers.
    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    /// Number of representation spaces seen by the layered kernel: the
    /// input plus every hidden layer.
    pub fn n_representations(&self) -> usize {
        self.n_layers()
    }

    /// Flattened length of a parameter subset.
    pub fn subset_len(&self, subset: ParamSubset) -> usize {
        match subset {
            ParamSubset::LastLayer => {
                let l = self.n_layers() - 1;
                self.weights[l].rows() * self.weights[l].cols() + self.biases[l].len()
            }
            ParamSubset::All => self
                .weights
                .iter()
                .zip(&self.biases)
                .map(|(w, b)| w.rows() * w.cols() + b.len())
                .sum(),
        }
    }

    /// Flattened copy of a parameter subset.
    pub fn flatten_subset(&self, subset: ParamSubset) -> Vec<f64> {
        let range = match subset {
            ParamSubset::LastLayer => self.n_layers() - 1..self.n_layers(),
            ParamSubset::All => 0..self.n_layers(),
        };
        let mut out = Vec::with_capacity(self.subset_len(subset));
        for l in range {
            out.extend_from_slice(self.weights[l].as_slice());
            out.extend_from_slice(&self.biases[l]);
        }
        out
    }

    /// Writes a flattened parameter subset back into the network.
    pub fn unflatten_subset(&mut self, subset: ParamSubset, theta: &[f64]) {
        assert_eq!(theta.len(), self.subset_len(subset));
        let range = match subset {
            ParamSubset::LastLayer => self.n_layers() - 1..self.n_layers(),
            ParamSubset::All => 0..self.n_layers(),
        };
        let mut pos = 0;
        for l in range {
            let w_len = self.weights[l].as_slice().len();
            self.weights[l]
                .as_mut_slice()
                .copy_from_slice(&theta[pos..pos + w_len]);
            pos += w_len;
            let b_len = self.biases[l].len();
            self.biases[l].copy_from_slice(&theta[pos..pos + b_len]);
            pos += b_len;
        }
    }
}

/// Forward pass recording all activations.
pub fn forward(net: &ReluNet, x: &[f64]) -> Result<ForwardTrace> {
    if x.len() != net.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "forward: input length {} vs network input dim {}",
            x.len(),
            net.input_dim()
        )));
    }
    let l_total = net.n_layers();
    let mut activations = Vec::with_capacity(l_total);
    activations.push(x.to_vec());
    let mut h = x.to_vec();
    for l in 0..l_total {
        let mut z = net.weights[l].matvec(&h);
        for (zi, bi) in z.iter_mut().zip(&net.biases[l]) {
            *zi += bi;
        }
        if l + 1 < l_total {
            for zi in z.iter_mut() {
                *zi = zi.max(0.0);
            }
            activations.push(z.clone());
            h = z;
        } else {
            return Ok(ForwardTrace {
                activations,
                logits: z,
            });
        }
    }
    unreachable!("networks always have at least one layer")
}

/// Per-layer gradients, laid out like the network parameters.
struct Gradients {
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros(net: &ReluNet) -> Gradients {
        Gradients {
            weights: net
                .weights
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    fn flatten_subset(&self, subset: ParamSubset) -> Vec<f64> {
        let range = match subset {
            ParamSubset::LastLayer => self.weights.len() - 1..self.weights.len(),
            ParamSubset::All => 0..self.weights.len(),
        };
        let mut out = Vec::new();
        for l in range {
            out.extend_from_slice(self.weights[l].as_slice());
            out.extend_from_slice(&self.biases[l]);
        }
        out
    }
}

/// Backpropagates a logit-space delta through the recorded trace and
/// accumulates parameter gradients (scaled by `scale`) into `grads`.
fn backprop_into(
    net: &ReluNet,
    trace: &ForwardTrace,
    output_delta: &[f64],
    scale: f64,
    grads: &mut Gradients,
) {
    let l_total = net.n_layers();
    let mut delta = output_delta.to_vec();
    for l in (0..l_total).rev() {
        let h_in = &trace.activations[l];
        for (r, d) in delta.iter().enumerate() {
            if *d != 0.0 {
                let row = grads.weights[l].row_mut(r);
                for (j, hj) in h_in.iter().enumerate() {
                    row[j] += scale * d * hj;
                }
            }
            grads.biases[l][r] += scale * d;
        }
        if l == 0 {
            break;
        }
        // delta at the output of hidden layer l-1, masked by active units.
        let mut next = vec![0.0; net.weights[l].cols()];
        for (r, d) in delta.iter().enumerate() {
            if *d != 0.0 {
                let row = net.weights[l].row(r);
                for (j, nj) in next.iter_mut().enumerate() {
                    *nj += row[j] * d;
                }
            }
        }
        for (nj, hj) in next.iter_mut().zip(&trace.activations[l]) {
            if *hj <= 0.0 {
                *nj = 0.0;
            }
        }
        delta = next;
    }
}

/// Gradient of one logit with respect to a flattened parameter subset at
/// the current weights.
pub fn grad_logit(
    net: &ReluNet,
    x: &[f64],
    class_index: usize,
    subset: ParamSubset,
) -> Result<Vec<f64>> {
    let c = net.output_dim();
    if class_index >= c {
        return Err(Error::DimensionMismatch(format!(
            "grad_logit: class {class_index} out of {c}"
        )));
    }
    let trace = forward(net, x)?;
    let mut delta = vec![0.0; c];
    delta[class_index] = 1.0;
    let mut grads = Gradients::zeros(net);
    backprop_into(net, &trace, &delta, 1.0, &mut grads);
    Ok(grads.flatten_subset(subset))
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|v| v / sum).collect()
}

fn per_sample_loss_and_delta(logits: &[f64], target: TargetRef) -> (f64, Vec<f64>) {
    match target {
        TargetRef::Class(y) => {
            let p = softmax(logits);
            let loss = -(p[y].max(1e-300)).ln();
            let mut delta = p;
            delta[y] -= 1.0;
            (loss, delta)
        }
        TargetRef::Value(y) => {
            let r = logits[0] - y;
            (0.5 * r * r, vec![r])
        }
    }
}

#[derive(Clone, Copy)]
enum TargetRef {
    Class(usize),
    Value(f64),
}

impl TargetRef {
    fn get(targets: &Targets, i: usize) -> TargetRef {
        match targets {
            Targets::Classes(v) => TargetRef::Class(v[i]),
            Targets::Values(v) => TargetRef::Value(v[i]),
        }
    }
}

/// Full MAP objective: summed data loss plus `lambda/2 * |theta|^2`.
pub fn map_objective(net: &ReluNet, data: &LabeledDataset, prior_precision: f64) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..data.len() {
        let trace = forward(net, data.input(i))?;
        let (loss, _) = per_sample_loss_and_delta(&trace.logits, TargetRef::get(&data.targets, i));
        total += loss;
    }
    let theta = net.flatten_subset(ParamSubset::All);
    total += 0.5 * prior_precision * dot(&theta, &theta);
    Ok(total)
}

/// Trains a MAP network with Adam (beta1 = 0.9, beta2 = 0.999) on the
/// regularized empirical risk. Classification uses softmax cross-entropy,
/// regression squared error. Fails with [`Error::NonFiniteLoss`] if the
/// objective stops being finite.
pub fn train_map(
    data: &LabeledDataset,
    cfg: &TrainConfig,
    arch: &[usize],
    rng: &mut Rng,
) -> Result<ReluNet> {
    let mut net = ReluNet::init(arch, rng);
    if cfg.epochs == 0 {
        return Ok(net);
    }
    let m = data.len();
    assert!(m > 0, "train_map needs data");
    let n_params = net.subset_len(ParamSubset::All);
    let (beta1, beta2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
    let mut adam_m = vec![0.0; n_params];
    let mut adam_v = vec![0.0; n_params];
    let mut step = 0usize;
    let mut order: Vec<usize> = (0..m).collect();
    let batch = cfg.batch_size.max(1).min(m);
    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(batch) {
            // Mean data gradient over the batch plus lambda/M * theta, i.e.
            // the gradient of the per-sample-averaged MAP objective.
            let mut grads = Gradients::zeros(&net);
            let scale = 1.0 / chunk.len() as f64;
            for &i in chunk {
                let trace = forward(&net, data.input(i))?;
                let (_, delta) =
                    per_sample_loss_and_delta(&trace.logits, TargetRef::get(&data.targets, i));
                backprop_into(&net, &trace, &delta, scale, &mut grads);
            }
            let mut g = grads.flatten_subset(ParamSubset::All);
            let mut theta = net.flatten_subset(ParamSubset::All);
            let reg = cfg.prior_precision / m as f64;
            for (gi, ti) in g.iter_mut().zip(&theta) {
                *gi += reg * ti;
            }
            step += 1;
            let bc1 = 1.0 - beta1.powi(step as i32);
            let bc2 = 1.0 - beta2.powi(step as i32);
            for p in 0..n_params {
                adam_m[p] = beta1 * adam_m[p] + (1.0 - beta1) * g[p];
                adam_v[p] = beta2 * adam_v[p] + (1.0 - beta2) * g[p] * g[p];
                let mhat = adam_m[p] / bc1;
                let vhat = adam_v[p] / bc2;
                theta[p] -= cfg.learning_rate * mhat / (vhat.sqrt() + eps);
            }
            net.unflatten_subset(ParamSubset::All, &theta);
        }
        let objective = map_objective(&net, data, cfg.prior_precision)?;
        if !objective.is_finite() {
            return Err(Error::NonFiniteLoss {
                context: format!("train_map epoch {epoch}"),
                value: objective,
            });
        }
    }
    Ok(net)
}

/// Fraction of points whose argmax logit matches the label.
pub fn classification_accuracy(net: &ReluNet, data: &LabeledDataset) -> Result<f64> {
    let Targets::Classes(labels) = &data.targets else {
        return Err(Error::DimensionMismatch(
            "accuracy needs class targets".into(),
        ));
    };
    if data.is_empty() {
        return Err(Error::EmptyInput("accuracy on empty dataset".into()));
    }
    let mut hits = 0usize;
    for i in 0..data.len() {
        let trace = forward(net, data.input(i))?;
        let pred = argmax(&trace.logits);
        if pred == labels[i] {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

/// Root mean squared error of the MAP prediction on a regression set.
pub fn regression_rmse(net: &ReluNet, data: &LabeledDataset) -> Result<f64> {
    let Targets::Values(values) = &data.targets else {
        return Err(Error::DimensionMismatch("rmse needs value targets".into()));
    };
    if data.is_empty() {
        return Err(Error::EmptyInput("rmse on empty dataset".into()));
    }
    let mut ss = 0.0;
    for i in 0..data.len() {
        let trace = forward(net, data.input(i))?;
        ss += (trace.logits[0] - values[i]).powi(2);
    }
    Ok((ss / data.len() as f64).sqrt())
}

/// Index of the largest entry.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::two_moons;

    fn zero_net(dims: &[usize]) -> ReluNet {
        let mut rng = Rng::new(0);
        let mut net = ReluNet::init(dims, &mut rng);
        for w in &mut net.weights {
            w.as_mut_slice().fill(0.0);
        }
        net
    }

    #[test]
    fn forward_zero_net_is_zero() {
        let net = zero_net(&[2, 3, 2]);
        let t = forward(&net, &[1.0, -1.0]).unwrap();
        assert_eq!(t.logits, vec![0.0, 0.0]);
        assert_eq!(t.activations[1], vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn forward_single_identity_layer_passes_through() {
        let mut net = zero_net(&[2, 2]);
        net.weights[0] = Matrix::identity(2);
        let t = forward(&net, &[1.0, -1.0]).unwrap();
        // Output layer is affine: no ReLU on the logits.
        assert_eq!(t.logits, vec![1.0, -1.0]);
        assert_eq!(t.activations.len(), 1);
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = Rng::new(42);
        let net = ReluNet::init(&[3, 8, 4], &mut rng);
        let x = [0.3, -0.7, 1.1];
        assert_eq!(forward(&net, &x).unwrap(), forward(&net, &x).unwrap());
    }

    #[test]
    fn forward_rejects_bad_input_dim() {
        let net = zero_net(&[2, 2]);
        assert!(matches!(
            forward(&net, &[1.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn grad_logit_last_layer_structure() {
        let mut rng = Rng::new(1);
        let net = ReluNet::init(&[2, 4, 3], &mut rng);
        let x = [0.5, -0.3];
        let trace = forward(&net, &x).unwrap();
        let h = &trace.activations[1];
        let g = grad_logit(&net, &x, 1, ParamSubset::LastLayer).unwrap();
        // Layout: W (3x4 row-major), then bias (3).
        for r in 0..3 {
            for j in 0..4 {
                let expect = if r == 1 { h[j] } else { 0.0 };
                assert_eq!(g[r * 4 + j], expect);
            }
        }
        for r in 0..3 {
            let expect = if r == 1 { 1.0 } else { 0.0 };
            assert_eq!(g[12 + r], expect);
        }
    }

    #[test]
    fn grad_logit_zero_input_zero_bias() {
        let mut rng = Rng::new(2);
        let mut net = ReluNet::init(&[2, 3, 2], &mut rng);
        for b in &mut net.biases {
            b.fill(0.0);
        }
        let g = grad_logit(&net, &[0.0, 0.0], 0, ParamSubset::LastLayer).unwrap();
        // Hidden activations vanish, so only the class bias entry remains.
        let (w_len, b_len) = (2 * 3, 2);
        assert!(g[..w_len].iter().all(|v| *v == 0.0));
        assert_eq!(g[w_len..w_len + b_len], [1.0, 0.0]);
    }

    #[test]
    fn grad_logit_matches_finite_differences() {
        let mut rng = Rng::new(3);
        for subset in [ParamSubset::LastLayer, ParamSubset::All] {
            let net = ReluNet::init(&[3, 6, 5, 2], &mut rng);
            let x = [0.4, -0.2, 0.9];
            for class in 0..2 {
                let analytic = grad_logit(&net, &x, class, subset).unwrap();
                let theta = net.flatten_subset(subset);
                let h = 1e-5;
                let mut max_err = 0.0f64;
                for p in 0..theta.len() {
                    let mut probe = net.clone();
                    let mut tp = theta.clone();
                    tp[p] = theta[p] + h;
                    probe.unflatten_subset(subset, &tp);
                    let up = forward(&probe, &x).unwrap().logits[class];
                    tp[p] = theta[p] - h;
                    probe.unflatten_subset(subset, &tp);
                    let dn = forward(&probe, &x).unwrap().logits[class];
                    max_err = max_err.max(((up - dn) / (2.0 * h) - analytic[p]).abs());
                }
                assert!(max_err < 1e-5, "fd mismatch {max_err} for {subset:?}");
            }
        }
    }

    #[test]
    fn train_map_zero_epochs_returns_init() {
        let data = two_moons(10, 0.1, &mut Rng::new(4));
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let a = train_map(&data, &cfg, &[2, 4, 2], &mut Rng::new(5)).unwrap();
        let b = ReluNet::init(&[2, 4, 2], &mut Rng::new(5));
        assert_eq!(a, b);
    }

    #[test]
    fn train_map_fits_two_point_set() {
        let inputs = Matrix::from_rows(&[vec![-1.0, 0.0], vec![1.0, 0.0]]);
        let data = LabeledDataset::new(inputs, Targets::Classes(vec![0, 1]));
        let cfg = TrainConfig {
            learning_rate: 0.05,
            epochs: 100,
            batch_size: 2,
            ..TrainConfig::default()
        };
        let net = train_map(&data, &cfg, &[2, 4, 2], &mut Rng::new(6)).unwrap();
        assert_eq!(classification_accuracy(&net, &data).unwrap(), 1.0);
    }

    #[test]
    fn train_map_two_moons_accuracy() {
        let mut data = two_moons(500, 0.1, &mut Rng::new(7));
        data.standardize();
        let cfg = TrainConfig {
            prior_precision: 1e-2,
            learning_rate: 5e-3,
            epochs: 200,
            batch_size: 32,
            seed: 0,
        };
        let net = train_map(&data, &cfg, &[2, 20, 20, 2], &mut Rng::new(8)).unwrap();
        let acc = classification_accuracy(&net, &data).unwrap();
        assert!(acc >= 0.95, "train accuracy {acc}");
    }

    #[test]
    fn train_map_objective_decreases() {
        let mut data = two_moons(200, 0.1, &mut Rng::new(9));
        data.standardize();
        let cfg = TrainConfig {
            learning_rate: 5e-3,
            epochs: 50,
            batch_size: 32,
            ..TrainConfig::default()
        };
        let init = ReluNet::init(&[2, 10, 2], &mut Rng::new(10));
        let before = map_objective(&init, &data, cfg.prior_precision).unwrap();
        let net = train_map(&data, &cfg, &[2, 10, 2], &mut Rng::new(10)).unwrap();
        let after = map_objective(&net, &data, cfg.prior_precision).unwrap();
        assert!(after < before, "objective {before} -> {after}");
    }
}
