//! One-hidden-layer denoising autoencoder with masking noise, trained by
//! minibatch Adam on sigmoid cross-entropy reconstruction loss.
//!
//! Parameters live in one flat buffer laid out as
//! `[W (h x d, row-major) | b (h) | W' (d x h, row-major) | b' (d)]`.
//!
//! Random schedule for a given seed: weights are drawn first (`W` then `W'`,
//! row-major, uniform in `±sqrt(6 / (d + h))`, biases zero); each epoch then
//! shuffles the example order once, and each minibatch corrupts its examples
//! in order, drawing one uniform per non-zero input component.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::rng::{self, Rng};
use crate::sparse::SparseVec;

#[derive(Debug, Error)]
pub enum AeError {
    #[error("input dimension mismatch: model expects {expected}, got {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("no training data")]
    EmptyData,
    #[error("training row {row} has value {value} outside [0, 1]")]
    InputOutOfRange { row: usize, value: f64 },
    #[error("non-finite training loss in epoch {epoch}; the learning rate is likely too high")]
    NonFiniteLoss { epoch: usize },
    #[error("checkpoint line {line}: {message}")]
    Checkpoint { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeTrainConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub masking_prob: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AeTrainConfig {
    fn default() -> Self {
        Self {
            hidden: 1000,
            epochs: 50,
            masking_prob: 0.8,
            learning_rate: 1e-3,
            batch_size: 64,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AeTrainConfig {
    pub fn validate(&self) -> Result<(), AeError> {
        let bad = |m: &str| Err(AeError::InvalidConfig(m.to_owned()));
        if !(0.0..1.0).contains(&self.masking_prob) {
            return bad("masking_prob must lie in [0, 1)");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.hidden == 0 {
            return bad("hidden must be at least 1");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-[x ln s(z) + (1 - x) ln(1 - s(z))]` computed from the logit.
fn bce_with_logit(z: f64, x: f64) -> f64 {
    z.max(0.0) - x * z + (-z.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeModel {
    input_dim: usize,
    hidden_dim: usize,
    params: Vec<f64>,
}

impl AeModel {
    pub fn n_params(input_dim: usize, hidden_dim: usize) -> usize {
        2 * input_dim * hidden_dim + input_dim + hidden_dim
    }

    /// Seeded symmetric-uniform initialization with zero biases.
    pub fn init(input_dim: usize, hidden_dim: usize, rng: &mut Rng) -> Self {
        let mut m = Self::zeros(input_dim, hidden_dim);
        let r = (6.0 / (input_dim + hidden_dim) as f64).sqrt();
        let (d, h) = (input_dim, hidden_dim);
        for w in &mut m.params[..h * d] {
            *w = rng.gen_range(-r..r);
        }
        let off = h * d + h;
        for w in &mut m.params[off..off + d * h] {
            *w = rng.gen_range(-r..r);
        }
        m
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self { input_dim, hidden_dim, params: vec![0.0; Self::n_params(input_dim, hidden_dim)] }
    }

    /// Assembles a model from its four parameter blocks.
    pub fn from_parts(
        input_dim: usize,
        hidden_dim: usize,
        w_in: &[f64],
        b_in: &[f64],
        w_out: &[f64],
        b_out: &[f64],
    ) -> Result<Self, AeError> {
        let (d, h) = (input_dim, hidden_dim);
        for (found, expected) in [(w_in.len(), h * d), (b_in.len(), h), (w_out.len(), d * h), (b_out.len(), d)] {
            if found != expected {
                return Err(AeError::DimMismatch { expected, found });
            }
        }
        let params = [w_in, b_in, w_out, b_out].concat();
        Ok(Self { input_dim, hidden_dim, params })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let (d, h) = (self.input_dim, self.hidden_dim);
        (h * d, h * d + h, 2 * h * d + h)
    }

    pub fn w_in(&self) -> &[f64] {
        &self.params[..self.offsets().0]
    }

    pub fn b_in(&self) -> &[f64] {
        let (a, b, _) = self.offsets();
        &self.params[a..b]
    }

    pub fn w_out(&self) -> &[f64] {
        let (_, b, c) = self.offsets();
        &self.params[b..c]
    }

    pub fn b_out(&self) -> &[f64] {
        &self.params[self.offsets().2..]
    }

    fn hidden_sparse(&self, x: &SparseVec) -> Vec<f64> {
        let d = self.input_dim;
        let w = self.w_in();
        self.b_in()
            .iter()
            .enumerate()
            .map(|(k, &b)| {
                let row = &w[k * d..(k + 1) * d];
                sigmoid(b + x.iter().map(|(j, v)| row[j] * v).sum::<f64>())
            })
            .collect()
    }

    /// `sigmoid(W x + b)` for a dense input.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>, AeError> {
        if x.len() != self.input_dim {
            return Err(AeError::DimMismatch { expected: self.input_dim, found: x.len() });
        }
        let d = self.input_dim;
        let w = self.w_in();
        Ok(self
            .b_in()
            .iter()
            .enumerate()
            .map(|(k, &b)| {
                let row = &w[k * d..(k + 1) * d];
                sigmoid(b + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
            })
            .collect())
    }

    pub fn encode_sparse(&self, x: &SparseVec) -> Result<Vec<f64>, AeError> {
        if x.dim() != self.input_dim {
            return Err(AeError::DimMismatch { expected: self.input_dim, found: x.dim() });
        }
        Ok(self.hidden_sparse(x))
    }

    /// Reconstruction loss of one example, `input` being fed to the encoder
    /// and `target` being reconstructed.
    pub fn loss(&self, input: &SparseVec, target: &[f64]) -> f64 {
        let hidden = self.hidden_sparse(input);
        let (d, h) = (self.input_dim, self.hidden_dim);
        let w = self.w_out();
        let b = self.b_out();
        (0..d)
            .map(|j| {
                let row = &w[j * h..(j + 1) * h];
                let z = b[j] + row.iter().zip(&hidden).map(|(a, v)| a * v).sum::<f64>();
                bce_with_logit(z, target[j])
            })
            .sum()
    }

    /// Mean loss over a batch and its gradient, written into `grad`
    /// (same layout as the parameters). Every gradient entry is a fixed-order
    /// sum over the batch, so the result does not depend on threading.
    pub fn batch_gradient(&self, inputs: &[SparseVec], targets: &[&SparseVec], grad: &mut [f64]) -> f64 {
        assert_eq!(inputs.len(), targets.len());
        assert_eq!(grad.len(), self.params.len());
        let (d, h) = (self.input_dim, self.hidden_dim);
        let bsz = inputs.len() as f64;
        let w_out = self.w_out();
        let b_out = self.b_out();

        struct Pass {
            hidden: Vec<f64>,
            dz_out: Vec<f64>,
            dz_hidden: Vec<f64>,
            loss: f64,
        }
        let passes: Vec<Pass> = par::map_range(inputs.len(), |b| {
            let hidden = self.hidden_sparse(&inputs[b]);
            let target = targets[b].to_dense();
            let mut loss = 0.0;
            let mut dz_out = vec![0.0; d];
            for j in 0..d {
                let row = &w_out[j * h..(j + 1) * h];
                let z = b_out[j] + row.iter().zip(&hidden).map(|(a, v)| a * v).sum::<f64>();
                loss += bce_with_logit(z, target[j]);
                dz_out[j] = sigmoid(z) - target[j];
            }
            let mut dh = vec![0.0; h];
            for j in 0..d {
                let g = dz_out[j];
                if g != 0.0 {
                    for (acc, w) in dh.iter_mut().zip(&w_out[j * h..(j + 1) * h]) {
                        *acc += g * w;
                    }
                }
            }
            let dz_hidden = dh.iter().zip(&hidden).map(|(g, a)| g * a * (1.0 - a)).collect();
            Pass { hidden, dz_out, dz_hidden, loss }
        });

        let (o1, o2, o3) = self.offsets();
        let (g_w_in, rest) = grad.split_at_mut(o1);
        let (g_b_in, rest) = rest.split_at_mut(o2 - o1);
        let (g_w_out, g_b_out) = rest.split_at_mut(o3 - o2);

        {
            let mut rows: Vec<&mut [f64]> = g_w_in.chunks_mut(d).collect();
            par::for_each_mut(&mut rows, |k, row| {
                row.iter_mut().for_each(|g| *g = 0.0);
                for (p, x) in passes.iter().zip(inputs) {
                    let g = p.dz_hidden[k] / bsz;
                    for (j, v) in x.iter() {
                        row[j] += g * v;
                    }
                }
            });
        }
        for (k, g) in g_b_in.iter_mut().enumerate() {
            *g = passes.iter().map(|p| p.dz_hidden[k]).sum::<f64>() / bsz;
        }
        {
            let mut rows: Vec<&mut [f64]> = g_w_out.chunks_mut(h).collect();
            par::for_each_mut(&mut rows, |j, row| {
                row.iter_mut().for_each(|g| *g = 0.0);
                for p in &passes {
                    let g = p.dz_out[j] / bsz;
                    if g != 0.0 {
                        for (r, a) in row.iter_mut().zip(&p.hidden) {
                            *r += g * a;
                        }
                    }
                }
            });
        }
        for (j, g) in g_b_out.iter_mut().enumerate() {
            *g = passes.iter().map(|p| p.dz_out[j]).sum::<f64>() / bsz;
        }
        passes.iter().map(|p| p.loss).sum::<f64>() / bsz
    }

    pub fn write_checkpoint<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let (d, h) = (self.input_dim, self.hidden_dim);
        writeln!(out, "datasel-autoencoder\tv1")?;
        writeln!(out, "dims\t{d}\t{h}")?;
        let mut block = |name: &str, data: &[f64], rows: usize, cols: usize| -> std::io::Result<()> {
            writeln!(out, "{name}\t{rows}\t{cols}")?;
            for r in 0..rows {
                let line: Vec<String> = data[r * cols..(r + 1) * cols].iter().map(f64::to_string).collect();
                writeln!(out, "{}", line.join("\t"))?;
            }
            Ok(())
        };
        block("w_in", self.w_in(), h, d)?;
        block("b_in", self.b_in(), 1, h)?;
        block("w_out", self.w_out(), d, h)?;
        block("b_out", self.b_out(), 1, d)
    }

    pub fn read_checkpoint<R: BufRead>(reader: R) -> Result<Self, AeError> {
        let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| -> Result<(usize, String), AeError> {
            match lines.next() {
                Some((n, Ok(l))) => Ok((n, l)),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(AeError::Checkpoint { line: 0, message: format!("unexpected end of file, wanted {what}") }),
            }
        };
        let bad = |line: usize, message: String| AeError::Checkpoint { line, message };
        let (n, header) = next("header")?;
        if header != "datasel-autoencoder\tv1" {
            return Err(bad(n, format!("unrecognized header {header:?}")));
        }
        let parse_usize = |n: usize, s: Option<&str>| -> Result<usize, AeError> {
            s.and_then(|s| s.parse().ok()).ok_or_else(|| bad(n, "expected an integer".into()))
        };
        let (n, dims) = next("dims")?;
        let mut f = dims.split('\t');
        if f.next() != Some("dims") {
            return Err(bad(n, "expected dims line".into()));
        }
        let d = parse_usize(n, f.next())?;
        let h = parse_usize(n, f.next())?;
        let mut blocks = Vec::new();
        for (name, rows, cols) in [("w_in", h, d), ("b_in", 1, h), ("w_out", d, h), ("b_out", 1, d)] {
            let (n, head) = next(name)?;
            let mut f = head.split('\t');
            if f.next() != Some(name) {
                return Err(bad(n, format!("expected block {name}")));
            }
            let (r, c) = (parse_usize(n, f.next())?, parse_usize(n, f.next())?);
            if (r, c) != (rows, cols) {
                return Err(bad(n, format!("block {name} is {r}x{c}, expected {rows}x{cols}")));
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (n, line) = next(name)?;
                let before = data.len();
                for field in line.split('\t') {
                    let v: f64 = field.parse().map_err(|_| bad(n, format!("non-numeric value {field:?}")))?;
                    if !v.is_finite() {
                        return Err(bad(n, "non-finite parameter".into()));
                    }
                    data.push(v);
                }
                if data.len() - before != cols {
                    return Err(bad(n, format!("expected {cols} values")));
                }
            }
            blocks.push(data);
        }
        Self::from_parts(d, h, &blocks[0], &blocks[1], &blocks[2], &blocks[3])
    }
}

/// Zeroes each non-zero component independently with probability
/// `masking_prob` (zeros stay zero and consume no randomness).
pub fn corrupt(x: &[f64], masking_prob: f64, rng: &mut Rng) -> Vec<f64> {
    x.iter()
        .map(|&v| if v != 0.0 && rng.gen::<f64>() < masking_prob { 0.0 } else { v })
        .collect()
}

/// Sparse counterpart of [`corrupt`] with the identical random schedule.
pub fn corrupt_sparse(x: &SparseVec, masking_prob: f64, rng: &mut Rng) -> SparseVec {
    let kept: Vec<(u32, f64)> = x
        .iter()
        .filter(|_| rng.gen::<f64>() >= masking_prob)
        .map(|(i, v)| (i as u32, v))
        .collect();
    SparseVec::from_sorted_pairs(x.dim(), kept)
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize, lr: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self { lr, beta1, beta2, epsilon, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.epsilon);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        }
    }
}

/// Trained model plus the mean training loss of every epoch.
#[derive(Debug, Clone)]
pub struct TrainedAutoencoder {
    pub model: AeModel,
    pub epoch_losses: Vec<f64>,
}

/// Trains on feature rows whose values lie in `[0, 1]`.
pub fn train(data: &[SparseVec], config: &AeTrainConfig) -> Result<TrainedAutoencoder, AeError> {
    config.validate()?;
    let first = data.first().ok_or(AeError::EmptyData)?;
    let d = first.dim();
    for (row, x) in data.iter().enumerate() {
        if x.dim() != d {
            return Err(AeError::DimMismatch { expected: d, found: x.dim() });
        }
        if let Some(&value) = x.values().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(AeError::InputOutOfRange { row, value });
        }
    }
    let mut rng = rng::seeded(config.seed);
    let mut model = AeModel::init(d, config.hidden, &mut rng);
    let mut adam = Adam::new(model.params.len(), config.learning_rate, config.beta1, config.beta2, config.epsilon);
    let mut grad = vec![0.0; model.params.len()];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let inputs: Vec<SparseVec> =
                batch.iter().map(|&i| corrupt_sparse(&data[i], config.masking_prob, &mut rng)).collect();
            let targets: Vec<&SparseVec> = batch.iter().map(|&i| &data[i]).collect();
            let loss = model.batch_gradient(&inputs, &targets, &mut grad);
            if !loss.is_finite() {
                return Err(AeError::NonFiniteLoss { epoch });
            }
            total += loss * batch.len() as f64;
            adam.step(&mut model.params, &grad);
        }
        let mean = total / data.len() as f64;
        log::debug!("autoencoder epoch {epoch}: loss {mean:.6}");
        epoch_losses.push(mean);
    }
    Ok(TrainedAutoencoder { model, epoch_losses })
}

/// Largest relative discrepancy between the analytic gradient of the
/// reconstruction loss at `x` (uncorrupted, reconstructing itself) and central
/// finite differences with step `h_step`, over every parameter. Relative error
/// is `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn gradient_check(model: &AeModel, x: &[f64], h_step: f64) -> f64 {
    assert!((1e-7..=1e-3).contains(&h_step), "h_step must lie in [1e-7, 1e-3]");
    let input = SparseVec::from_dense(x);
    let analytic = analytic_gradient(model, x);
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for i in 0..model.params.len() {
        let orig = probe.params[i];
        probe.params[i] = orig + h_step;
        let up = probe.loss(&input, x);
        probe.params[i] = orig - h_step;
        let down = probe.loss(&input, x);
        probe.params[i] = orig;
        let numeric = (up - down) / (2.0 * h_step);
        let a = analytic[i];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    worst
}

/// Gradient of the single-example reconstruction loss at `x`.
pub fn analytic_gradient(model: &AeModel, x: &[f64]) -> Vec<f64> {
    let input = SparseVec::from_dense(x);
    let mut grad = vec![0.0; model.params.len()];
    model.batch_gradient(std::slice::from_ref(&input), &[&input], &mut grad);
    grad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_input_encodes_to_sigmoid_of_bias() {
        let mut rng = rng::seeded(3);
        let mut m = AeModel::init(5, 3, &mut rng);
        let off = 15;
        m.params_mut()[off..off + 3].copy_from_slice(&[0.5, -1.0, 2.0]);
        let code = m.encode(&[0.0; 5]).unwrap();
        for (c, b) in code.iter().zip([0.5, -1.0, 2.0]) {
            assert!((c - sigmoid(b)).abs() < 1e-15);
        }
        assert_eq!(AeModel::zeros(4, 2).encode(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn encode_rejects_wrong_dim() {
        let m = AeModel::zeros(4, 2);
        assert!(matches!(m.encode(&[1.0]), Err(AeError::DimMismatch { expected: 4, found: 1 })));
    }

    #[test]
    fn sparse_and_dense_encode_agree() {
        let mut rng = rng::seeded(9);
        let m = AeModel::init(6, 4, &mut rng);
        let x = [0.0, 0.3, 0.0, 0.9, 0.1, 0.0];
        assert_eq!(m.encode(&x).unwrap(), m.encode_sparse(&SparseVec::from_dense(&x)).unwrap());
    }

    #[test]
    fn corrupt_with_zero_prob_is_identity() {
        let mut rng = rng::seeded(1);
        let x = vec![0.2, 0.0, 1.0];
        assert_eq!(corrupt(&x, 0.0, &mut rng), x);
    }

    #[test]
    fn dense_and_sparse_corruption_share_schedule() {
        let x = [0.0, 0.4, 0.5, 0.0, 0.7, 0.1];
        let dense = corrupt(&x, 0.5, &mut rng::seeded(11));
        let sparse = corrupt_sparse(&SparseVec::from_dense(&x), 0.5, &mut rng::seeded(11));
        assert_eq!(dense, sparse.to_dense());
    }

    #[test]
    fn config_validation() {
        let ok = AeTrainConfig::default();
        assert!(ok.validate().is_ok());
        assert!(AeTrainConfig { masking_prob: 1.0, ..ok.clone() }.validate().is_err());
        assert!(AeTrainConfig { epochs: 0, ..ok.clone() }.validate().is_err());
        assert!(AeTrainConfig { batch_size: 0, ..ok }.validate().is_err());
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        let data = [SparseVec::from_dense(&[0.5, 2.0])];
        let cfg = AeTrainConfig { hidden: 2, epochs: 1, ..Default::default() };
        assert!(matches!(train(&data, &cfg), Err(AeError::InputOutOfRange { row: 0, .. })));
    }

    #[test]
    fn huge_learning_rate_reports_non_finite_loss_or_trains() {
        let data: Vec<SparseVec> = (0..8).map(|i| SparseVec::from_dense(&[1.0, (i % 2) as f64])).collect();
        let cfg = AeTrainConfig { hidden: 2, epochs: 3, learning_rate: f64::MAX, masking_prob: 0.0, ..Default::default() };
        match train(&data, &cfg) {
            Err(AeError::NonFiniteLoss { .. }) => {}
            Ok(t) => assert!(t.epoch_losses.iter().all(|l| l.is_finite())),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut rng = rng::seeded(5);
        let m = AeModel::init(3, 2, &mut rng);
        let mut buf = Vec::new();
        m.write_checkpoint(&mut buf).unwrap();
        let back = AeModel::read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn checkpoint_with_wrong_block_shape_is_rejected() {
        let mut buf = Vec::new();
        AeModel::zeros(3, 2).write_checkpoint(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("b_in\t1\t2", "b_in\t1\t3");
        assert!(matches!(AeModel::read_checkpoint(text.as_bytes()), Err(AeError::Checkpoint { .. })));
    }
}
