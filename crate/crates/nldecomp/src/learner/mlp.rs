//! A shallow tanh network trained by plain mini-batch gradient descent.
//!
//! Deliberately stateless optimization: fixed step size, seeded shuffling, no
//! momentum or adaptivity, so iteration counts reflect the difficulty of the
//! target rather than optimizer state. Features are standardized and targets
//! scaled to unit RMS internally (both recorded in the model), which keeps
//! one step size usable across targets of very different power.
//!
//! Training is bit-deterministic: identical (config, data) produces an
//! identical model and trace.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
}

/// One-hidden-layer network mapping a real feature row to an I/Q pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpModel {
    /// [inputs, hidden, 2].
    pub layer_sizes: Vec<usize>,
    /// Hidden weights, row-major hidden x inputs.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// Output weights, row-major 2 x hidden.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub activation: Activation,
    pub seed: u64,
    pub preset: Option<String>,
    /// Input standardization learned from the training rows.
    pub feature_mean: Vec<f64>,
    pub feature_scale: Vec<f64>,
    /// Targets were divided by this during training; predictions multiply it
    /// back.
    pub target_scale: f64,
}

/// Training knobs. `max_iters` counts mini-batches.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden: usize,
    pub seed: u64,
    pub step_size: f64,
    pub max_iters: usize,
    pub batch_size: usize,
    /// Stop once full-training-set NMSE (dB) reaches this value; checked
    /// once per epoch.
    pub target_nmse_db: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: 25,
            seed: 0,
            step_size: 0.25,
            max_iters: 3000,
            batch_size: 256,
            target_nmse_db: None,
        }
    }
}

/// Hidden-layer gradient norm ceiling per batch.
const GRAD_CLIP: f64 = 1.0;

/// Complexity accounting and convergence record of one training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingTrace {
    /// Mini-batches processed.
    pub iterations: usize,
    /// Full-training-set loss in normalized units (equals linear NMSE of the
    /// prediction), one entry per epoch plus the initial loss.
    pub loss_curve: Vec<f64>,
    pub train_samples_used: usize,
    pub mac_per_inference: usize,
    pub param_count: usize,
    pub wall_time_budget_respected: bool,
}

impl MlpModel {
    fn hidden(&self) -> usize {
        self.layer_sizes[1]
    }

    fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    /// Network output for one raw (unstandardized) feature row.
    pub fn predict(&self, features: &[f64]) -> Complex64 {
        let nin = self.inputs();
        let nh = self.hidden();
        debug_assert_eq!(features.len(), nin);
        let mut a1 = vec![0.0f64; nh];
        for j in 0..nh {
            let mut z = self.b1[j];
            let wrow = &self.w1[j * nin..(j + 1) * nin];
            for i in 0..nin {
                let xs = (features[i] - self.feature_mean[i]) / self.feature_scale[i];
                z += wrow[i] * xs;
            }
            a1[j] = z.tanh();
        }
        let mut out = [self.b2[0], self.b2[1]];
        for (o, out_v) in out.iter_mut().enumerate() {
            let wrow = &self.w2[o * nh..(o + 1) * nh];
            for j in 0..nh {
                *out_v += wrow[j] * a1[j];
            }
        }
        Complex64::new(out[0], out[1]) * self.target_scale
    }

    /// Predictions for every row of a feature matrix.
    pub fn predict_all(&self, features: &FeatureMatrix) -> Vec<Complex64> {
        (0..features.rows())
            .map(|i| self.predict(features.row(i)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Total number of trainable parameters (weights and biases).
    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    /// Flat parameter access in w1|b1|w2|b2 order, for gradient checks.
    pub fn get_param(&self, idx: usize) -> f64 {
        let (v, i) = self.param_slot(idx);
        match v {
            0 => self.w1[i],
            1 => self.b1[i],
            2 => self.w2[i],
            _ => self.b2[i],
        }
    }

    pub fn set_param(&mut self, idx: usize, value: f64) {
        let (v, i) = self.param_slot(idx);
        match v {
            0 => self.w1[i] = value,
            1 => self.b1[i] = value,
            2 => self.w2[i] = value,
            _ => self.b2[i] = value,
        }
    }

    fn param_slot(&self, idx: usize) -> (u8, usize) {
        let mut i = idx;
        if i < self.w1.len() {
            return (0, i);
        }
        i -= self.w1.len();
        if i < self.b1.len() {
            return (1, i);
        }
        i -= self.b1.len();
        if i < self.w2.len() {
            return (2, i);
        }
        (3, i - self.w2.len())
    }
}

/// Exact parameter and multiply-accumulate counts from the layer shapes.
pub fn complexity_account(model: &MlpModel) -> (usize, usize) {
    let nin = model.inputs();
    let nh = model.hidden();
    let params = (nin + 1) * nh + (nh + 1) * 2;
    let macs = nin * nh + nh * 2;
    (params, macs)
}

/// Mean squared error (both output components) of the model against
/// normalized targets, plus the full gradient, over the given rows.
///
/// Loss and gradients are in the model's normalized units; with unit-RMS
/// targets the loss equals the linear NMSE.
pub fn loss_and_gradient(
    model: &MlpModel,
    features: &FeatureMatrix,
    targets: &[Complex64],
    rows: &[usize],
) -> (f64, Vec<f64>) {
    let nin = model.inputs();
    let nh = model.hidden();
    let inv_b = 1.0 / rows.len() as f64;
    let mut gw1 = vec![0.0f64; model.w1.len()];
    let mut gb1 = vec![0.0f64; model.b1.len()];
    let mut gw2 = vec![0.0f64; model.w2.len()];
    let mut gb2 = vec![0.0f64; model.b2.len()];
    let mut loss = 0.0f64;

    let mut xs = vec![0.0f64; nin];
    let mut a1 = vec![0.0f64; nh];
    for &row in rows {
        let raw = features.row(row);
        for i in 0..nin {
            xs[i] = (raw[i] - model.feature_mean[i]) / model.feature_scale[i];
        }
        for j in 0..nh {
            let mut z = model.b1[j];
            let wrow = &model.w1[j * nin..(j + 1) * nin];
            for i in 0..nin {
                z += wrow[i] * xs[i];
            }
            a1[j] = z.tanh();
        }
        let t = targets[row] / model.target_scale;
        let mut delta2 = [0.0f64; 2];
        for o in 0..2 {
            let mut out = model.b2[o];
            let wrow = &model.w2[o * nh..(o + 1) * nh];
            for j in 0..nh {
                out += wrow[j] * a1[j];
            }
            let err = out - if o == 0 { t.re } else { t.im };
            loss += err * err * inv_b;
            delta2[o] = 2.0 * err * inv_b;
        }
        for o in 0..2 {
            let gw_row = &mut gw2[o * nh..(o + 1) * nh];
            for j in 0..nh {
                gw_row[j] += delta2[o] * a1[j];
            }
            gb2[o] += delta2[o];
        }
        for j in 0..nh {
            let back = delta2[0] * model.w2[j] + delta2[1] * model.w2[nh + j];
            let d1 = back * (1.0 - a1[j] * a1[j]);
            let gw_row = &mut gw1[j * nin..(j + 1) * nin];
            for i in 0..nin {
                gw_row[i] += d1 * xs[i];
            }
            gb1[j] += d1;
        }
    }

    let mut grad = gw1;
    grad.extend(gb1);
    grad.extend(gw2);
    grad.extend(gb2);
    (loss, grad)
}

fn standardization(features: &FeatureMatrix, rows: usize) -> (Vec<f64>, Vec<f64>) {
    let cols = features.cols();
    let mut mean = vec![0.0f64; cols];
    for i in 0..rows {
        for (m, v) in mean.iter_mut().zip(features.row(i)) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= rows as f64;
    }
    let mut var = vec![0.0f64; cols];
    for i in 0..rows {
        for ((s, v), m) in var.iter_mut().zip(features.row(i)).zip(&mean) {
            let d = v - m;
            *s += d * d;
        }
    }
    let scale: Vec<f64> = var
        .iter()
        .map(|&s| {
            let sd = (s / rows as f64).sqrt();
            if sd > 1e-12 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    (mean, scale)
}

/// Ridge least-squares solve of the output layer (weights and bias of both
/// outputs) against the normalized targets, given the current hidden layer.
fn solve_output_layer(
    model: &mut MlpModel,
    features: &FeatureMatrix,
    targets: &[Complex64],
) -> Result<()> {
    let rows = features.rows();
    let nin = model.inputs();
    let nh = model.hidden();
    let mut gram = nalgebra::DMatrix::<f64>::zeros(nh + 1, nh + 1);
    let mut rhs = nalgebra::DMatrix::<f64>::zeros(nh + 1, 2);
    let mut a1 = vec![0.0f64; nh + 1];
    for i in 0..rows {
        let raw = features.row(i);
        for j in 0..nh {
            let mut z = model.b1[j];
            let wrow = &model.w1[j * nin..(j + 1) * nin];
            for c in 0..nin {
                z += wrow[c] * ((raw[c] - model.feature_mean[c]) / model.feature_scale[c]);
            }
            a1[j] = z.tanh();
        }
        a1[nh] = 1.0;
        let t = targets[i] / model.target_scale;
        for a in 0..=nh {
            for b in a..=nh {
                gram[(a, b)] += a1[a] * a1[b];
            }
            rhs[(a, 0)] += a1[a] * t.re;
            rhs[(a, 1)] += a1[a] * t.im;
        }
    }
    for a in 0..=nh {
        for b in a..=nh {
            gram[(b, a)] = gram[(a, b)];
        }
    }
    let ridge = 1e-9 * gram.trace().max(f64::MIN_POSITIVE) / (nh + 1) as f64;
    for a in 0..=nh {
        gram[(a, a)] += ridge;
    }
    let chol = gram.cholesky().ok_or(Error::IllConditioned {
        condition_number: f64::INFINITY,
    })?;
    let sol = chol.solve(&rhs);
    for o in 0..2 {
        for j in 0..nh {
            model.w2[o * nh + j] = sol[(j, o)];
        }
        model.b2[o] = sol[(nh, o)];
    }
    Ok(())
}

/// Hidden-unit input weights: bundles of mutually orthogonalized random
/// directions (Gram-Schmidt within each bundle of up to `cols` units),
/// scaled to the given pre-activation spread on whitened unit-variance
/// inputs.
fn init_directions(rng: &mut ChaCha8Rng, units: usize, cols: usize, scale: f64) -> Vec<f64> {
    let mut w = vec![0.0f64; units * cols];
    let mut bundle: Vec<Vec<f64>> = Vec::new();
    for j in 0..units {
        if bundle.len() == cols {
            bundle.clear();
        }
        let mut dir: Vec<f64> = (0..cols).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        for prev in &bundle {
            let dot: f64 = dir.iter().zip(prev).map(|(a, b)| a * b).sum();
            for (d, p) in dir.iter_mut().zip(prev) {
                *d -= dot * p;
            }
        }
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-9 {
            for d in dir.iter_mut() {
                *d /= norm;
            }
        }
        for (c, d) in dir.iter().enumerate() {
            w[j * cols + c] = d * scale;
        }
        bundle.push(dir);
    }
    w
}

/// PCA whitening matrix of the standardized training features. Time-delay
/// features are strongly collinear (|x|, |x|^2, |x|^3 and neighbouring
/// taps), which cripples fixed-step gradient descent; whitening is done once
/// as preprocessing and folded back into the first layer afterwards, so the
/// stored network keeps the plain [in, hidden, 2] shape and MAC count.
fn whitening_matrix(
    features: &FeatureMatrix,
    rows: usize,
    mean: &[f64],
    scale: &[f64],
) -> nalgebra::DMatrix<f64> {
    let cols = features.cols();
    let mut cov = nalgebra::DMatrix::<f64>::zeros(cols, cols);
    let mut xs = vec![0.0f64; cols];
    for i in 0..rows {
        let raw = features.row(i);
        for c in 0..cols {
            xs[c] = (raw[c] - mean[c]) / scale[c];
        }
        for a in 0..cols {
            for b in a..cols {
                cov[(a, b)] += xs[a] * xs[b];
            }
        }
    }
    let inv = 1.0 / rows as f64;
    for a in 0..cols {
        for b in a..cols {
            let v = cov[(a, b)] * inv;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let floor = 1e-10 * lambda_max.max(f64::MIN_POSITIVE);
    let mut w = nalgebra::DMatrix::<f64>::zeros(cols, cols);
    for r in 0..cols {
        let lambda = eig.eigenvalues[r];
        let g = if lambda > floor { 1.0 / lambda.sqrt() } else { 0.0 };
        for c in 0..cols {
            w[(r, c)] = g * eig.eigenvectors[(c, r)];
        }
    }
    w
}

/// Train a fresh network on (features, targets) pairs.
///
/// Stops at `target_nmse_db` (checked per epoch on the full training set) or
/// after `max_iters` mini-batches. Errors with [`Error::DivergedLoss`] if the
/// loss goes non-finite, which signals a step size too large for the data.
pub fn train(
    features: &FeatureMatrix,
    targets: &[Complex64],
    config: &TrainConfig,
) -> Result<(MlpModel, TrainingTrace)> {
    let rows = features.rows();
    if rows != targets.len() {
        return Err(Error::LengthMismatch {
            left: rows,
            right: targets.len(),
        });
    }
    let nin = features.cols();
    let nh = config.hidden;

    let (feature_mean, feature_scale) = standardization(features, rows);
    let white = whitening_matrix(features, rows, &feature_mean, &feature_scale);
    let target_rms = (targets.iter().map(|t| t.norm_sqr()).sum::<f64>() / rows as f64).sqrt();
    let target_scale = if target_rms > 1e-300 { target_rms } else { 1.0 };

    // Pre-transformed copy of the features; the training model sees
    // whitened coordinates with identity mean/scale.
    let whitened = {
        let mut data = Vec::with_capacity(rows * nin);
        let mut xs = vec![0.0f64; nin];
        for i in 0..rows {
            let raw = features.row(i);
            for c in 0..nin {
                xs[c] = (raw[c] - feature_mean[c]) / feature_scale[c];
            }
            for r in 0..nin {
                let mut acc = 0.0;
                for c in 0..nin {
                    acc += white[(r, c)] * xs[c];
                }
                data.push(acc);
            }
        }
        FeatureMatrix::from_raw(data, rows, nin)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // Hidden layer init: orthogonalized direction bundles at a scale that
    // keeps pre-activations in tanh's informative range, with biases spread
    // out. tanh is odd, and without bias offsets the units carry no
    // even-order terms, which the distortion surfaces need (products of I/Q
    // with |x|^k). The output layer starts at zero, so the first epochs are
    // linear regression on the initial tanh features.
    let w1 = init_directions(&mut rng, nh, nin, 0.5);
    let b1: Vec<f64> = (0..nh).map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * 0.9).collect();
    let mut model = MlpModel {
        layer_sizes: vec![nin, nh, 2],
        w1,
        b1,
        w2: vec![0.0; 2 * nh],
        b2: vec![0.0; 2],
        activation: Activation::Tanh,
        seed: config.seed,
        preset: None,
        feature_mean: vec![0.0; nin],
        feature_scale: vec![1.0; nin],
        target_scale,
    };

    let all_rows: Vec<usize> = (0..rows).collect();
    let (initial_loss, _) = loss_and_gradient(&model, &whitened, targets, &all_rows);
    let mut loss_curve = vec![initial_loss];
    let target_loss = config.target_nmse_db.map(|db| 10f64.powf(db / 10.0));

    // Epoch boundaries re-solve the linear output layer in closed form
    // (ridge least squares on the current hidden activations). The solve is
    // a pure function of the current state and data, so training remains
    // stateless and bit-deterministic; mini-batch descent then only has to
    // move the hidden layer, whose geometry is what distinguishes easy
    // targets from hard ones. Plain fixed-step descent on the collinear
    // output layer stalls orders of magnitude short of the accuracy this
    // toolkit needs.
    solve_output_layer(&mut model, &whitened, targets)?;

    let mut order: Vec<usize> = (0..rows).collect();
    let mut iterations = 0usize;
    'training: while iterations < config.max_iters {
        // Fisher-Yates reshuffle each epoch.
        for i in (1..rows).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut start = 0usize;
        while start < rows && iterations < config.max_iters {
            let end = (start + config.batch_size).min(rows);
            let batch = &order[start..end];
            let (batch_loss, grad) = loss_and_gradient(&model, &whitened, targets, batch);
            if !batch_loss.is_finite() {
                return Err(Error::DivergedLoss {
                    iteration: iterations,
                });
            }
            // Clip the hidden-layer gradient norm: after an output solve the
            // backpropagated gradients can spike through large cancelling
            // output weights. Pure function of the current gradient; no
            // state.
            let w1_len = nh * nin;
            let gnorm = grad[..w1_len + nh]
                .iter()
                .map(|g| g * g)
                .sum::<f64>()
                .sqrt();
            let clip = if gnorm > GRAD_CLIP { GRAD_CLIP / gnorm } else { 1.0 };
            let lr = config.step_size * clip;
            for (w, g) in model.w1.iter_mut().zip(&grad[..w1_len]) {
                *w -= lr * g;
            }
            for (b, g) in model.b1.iter_mut().zip(&grad[w1_len..w1_len + nh]) {
                *b -= lr * g;
            }
            iterations += 1;
            start = end;
        }
        solve_output_layer(&mut model, &whitened, targets)?;
        let (epoch_loss, _) = loss_and_gradient(&model, &whitened, targets, &all_rows);
        if !epoch_loss.is_finite() {
            return Err(Error::DivergedLoss {
                iteration: iterations,
            });
        }
        loss_curve.push(epoch_loss);
        if let Some(tl) = target_loss {
            if epoch_loss <= tl {
                break 'training;
            }
        }
    }

    // Fold the whitening into the first layer; the stored model maps raw
    // standardized features with the plain layer shapes.
    let mut folded_w1 = vec![0.0f64; nh * nin];
    for j in 0..nh {
        for c in 0..nin {
            let mut acc = 0.0;
            for r in 0..nin {
                acc += model.w1[j * nin + r] * white[(r, c)];
            }
            folded_w1[j * nin + c] = acc;
        }
    }
    model.w1 = folded_w1;
    model.feature_mean = feature_mean;
    model.feature_scale = feature_scale;

    let (params, macs) = complexity_account(&model);
    let trace = TrainingTrace {
        iterations,
        loss_curve,
        train_samples_used: rows,
        mac_per_inference: macs,
        param_count: params,
        wall_time_budget_respected: true,
    };
    Ok((model, trace))
}
