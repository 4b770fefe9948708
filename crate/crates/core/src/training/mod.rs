//! Datasets, encoders, forward pass, parameter-shift gradients and SGD.

mod data;
mod encode;

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use data::{
    generate_synthetic, generate_synthetic_with, load_csv, parse_csv, pool_28_to_4, Dataset, Sample,
    SyntheticSpec, IMAGE_SIDE,
};
pub use encode::{encode, prepare_state, Encoded, EncoderSpec};

use crate::circuit::{
    circular_residual, measure_outputs, run_circuit, run_gates, wrap_unchecked, Circuit, GateKind, ParameterVector,
    StateVector, TWO_PI,
};
use crate::error::{Error, Result};

pub fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn outputs_from(circuit: &Circuit, params: &[f64], input: &StateVector) -> Result<Vec<f64>> {
    let out = run_circuit(circuit, params, input.clone())?;
    measure_outputs(&out, &circuit.measurement)
}

/// Class probabilities for one input.
pub fn forward(circuit: &Circuit, params: &[f64], features: &[f64]) -> Result<Vec<f64>> {
    let input = prepare_state(circuit, features)?;
    Ok(softmax(&outputs_from(circuit, params, &input)?))
}

fn argmax(p: &[f64]) -> usize {
    p.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

fn cross_entropy(p: &[f64], label: usize) -> f64 {
    -p[label].max(f64::MIN_POSITIVE).ln()
}

/// Mean cross-entropy and argmax accuracy over `samples`.
pub fn loss_and_accuracy(circuit: &Circuit, params: &[f64], samples: &[Sample]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::Data("cannot evaluate on an empty sample set".into()));
    }
    let per: Vec<(f64, bool)> = samples
        .par_iter()
        .map(|s| {
            let p = forward(circuit, params, &s.features)?;
            check_label(s.label, p.len())?;
            Ok((cross_entropy(&p, s.label), argmax(&p) == s.label))
        })
        .collect::<Result<_>>()?;
    let n = samples.len() as f64;
    let loss = per.iter().map(|x| x.0).sum::<f64>() / n;
    let acc = per.iter().filter(|x| x.1).count() as f64 / n;
    Ok((loss, acc))
}

pub fn accuracy(circuit: &Circuit, params: &[f64], samples: &[Sample]) -> Result<f64> {
    loss_and_accuracy(circuit, params, samples).map(|r| r.1)
}

fn check_label(label: usize, n_classes: usize) -> Result<()> {
    if label >= n_classes {
        return Err(Error::Data(format!("label {label} >= {n_classes} outputs")));
    }
    Ok(())
}

/// Gate kind owning each parameter slot.
pub fn slot_kinds(circuit: &Circuit) -> Vec<GateKind> {
    let mut kinds = vec![GateKind::Id; circuit.n_params()];
    for g in &circuit.layers {
        for s in g.slots() {
            kinds[s] = g.kind;
        }
    }
    kinds
}

/// Step used for the finite-difference fallback on three-angle gates.
pub const FD_STEP: f64 = 1e-5;

/// `∂ out_k / ∂ θ_s` for every slot `s`, as `jac[s][k]`.
///
/// Single-qubit rotations use the two-term rule at `±π/2`. Controlled
/// rotations have generator eigenvalues `{0, ±1/2}` and use the four-term rule
/// at `±π/2, ±3π/2`. Three-angle gates fall back to central differences.
pub fn output_jacobian(circuit: &Circuit, params: &[f64], input: &StateVector) -> Result<Vec<Vec<f64>>> {
    outputs_and_jacobian(circuit, params, input).map(|r| r.1)
}

fn outputs_and_jacobian(
    circuit: &Circuit,
    params: &[f64],
    input: &StateVector,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if input.n_qubits() != circuit.n_qubits {
        return Err(Error::Value("input state does not match the circuit".into()));
    }
    let kinds = slot_kinds(circuit);
    let mut slot_gate = vec![0usize; kinds.len()];
    // states before each layer gate; shifted runs restart from there
    let mut prefix = Vec::with_capacity(circuit.layers.len() + 1);
    let mut state = input.clone();
    for (gi, g) in circuit.layers.iter().enumerate() {
        g.slots().for_each(|s| slot_gate[s] = gi);
        prefix.push(state.clone());
        state.apply_kind(g, &g.resolve(params, &[])?)?;
    }
    let base = measure_outputs(&state, &circuit.measurement)?;

    let mut shifted = params.to_vec();
    let mut eval = |s: usize, delta: f64| -> Result<Vec<f64>> {
        let gi = slot_gate[s];
        shifted[s] = params[s] + delta;
        let r = run_gates(&circuit.layers[gi..], &shifted, &[], prefix[gi].clone())
            .and_then(|st| measure_outputs(&st, &circuit.measurement));
        shifted[s] = params[s];
        r
    };
    let c_plus = (SQRT_2 + 1.0) / (4.0 * SQRT_2);
    let c_minus = (SQRT_2 - 1.0) / (4.0 * SQRT_2);
    let mut jac = Vec::with_capacity(kinds.len());
    for (s, &kind) in kinds.iter().enumerate() {
        let row = if kind.is_controlled_rotation() {
            let (a, b) = (eval(s, FRAC_PI_2)?, eval(s, -FRAC_PI_2)?);
            let (c, d) = (eval(s, 1.5 * PI)?, eval(s, -1.5 * PI)?);
            (0..a.len())
                .map(|k| c_plus * (a[k] - b[k]) - c_minus * (c[k] - d[k]))
                .collect()
        } else if kind.is_rotation() {
            let (a, b) = (eval(s, FRAC_PI_2)?, eval(s, -FRAC_PI_2)?);
            a.iter().zip(&b).map(|(x, y)| 0.5 * (x - y)).collect()
        } else {
            let (a, b) = (eval(s, FD_STEP)?, eval(s, -FD_STEP)?);
            a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * FD_STEP)).collect()
        };
        jac.push(row);
    }
    Ok((base, jac))
}

/// Loss and gradient of cross-entropy for a single sample.
fn sample_loss_grad(circuit: &Circuit, params: &[f64], s: &Sample) -> Result<(f64, Vec<f64>)> {
    let input = prepare_state(circuit, &s.features)?;
    let (out, jac) = outputs_and_jacobian(circuit, params, &input)?;
    let p = softmax(&out);
    check_label(s.label, p.len())?;
    let dl_do: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(k, &pk)| pk - f64::from(u8::from(k == s.label)))
        .collect();
    let grad = jac
        .iter()
        .map(|row| row.iter().zip(&dl_do).map(|(j, d)| j * d).sum())
        .collect();
    Ok((cross_entropy(&p, s.label), grad))
}

/// Mean loss and gradient over `batch`. Per-sample work runs in parallel and
/// is reduced in sample order.
fn batch_loss_grad(circuit: &Circuit, params: &[f64], batch: &[&Sample]) -> Result<(f64, Vec<f64>)> {
    let per: Vec<(f64, Vec<f64>)> = batch
        .par_iter()
        .map(|s| sample_loss_grad(circuit, params, s))
        .collect::<Result<_>>()?;
    let n = batch.len() as f64;
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    for (l, g) in &per {
        loss += l;
        for (acc, v) in grad.iter_mut().zip(g) {
            *acc += v;
        }
    }
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((loss / n, grad))
}

/// Gradient of the mean cross-entropy over `batch`.
pub fn param_shift_gradient(circuit: &Circuit, params: &[f64], batch: &[Sample]) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::Data("gradient of an empty batch".into()));
    }
    let refs: Vec<&Sample> = batch.iter().collect();
    batch_loss_grad(circuit, params, &refs).map(|r| r.1)
}

/// Central-difference gradient of the mean cross-entropy; used as an oracle.
pub fn finite_difference_gradient(circuit: &Circuit, params: &[f64], batch: &[Sample], h: f64) -> Result<Vec<f64>> {
    let mut p = params.to_vec();
    (0..params.len())
        .map(|s| {
            p[s] = params[s] + h;
            let up = loss_and_accuracy(circuit, &p, batch)?.0;
            p[s] = params[s] - h;
            let down = loss_and_accuracy(circuit, &p, batch)?.0;
            p[s] = params[s];
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitScheme {
    /// Uniform in `[0, 2π)`.
    Uniform2Pi,
    Zeros,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub init: InitScheme,
    /// Heavy-ball momentum; 0 disables it.
    pub momentum: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 200,
            batch_size: 10,
            seed: 0,
            init: InitScheme::Uniform2Pi,
            momentum: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        Ok(())
    }
}

pub fn init_params(n_params: usize, scheme: InitScheme, seed: u64) -> ParameterVector {
    match scheme {
        InitScheme::Zeros => ParameterVector::zeros(n_params),
        InitScheme::Uniform2Pi => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(2);
            let v = (0..n_params).map(|_| rng.random_range(0.0..TWO_PI)).collect();
            ParameterVector::new(v).expect("finite")
        }
    }
}

/// Quadratic pull `ρ/2 ‖θ − Z + λ/ρ‖²` added to the loss.
#[derive(Clone, Debug, PartialEq)]
pub struct Proximal {
    pub z: Vec<f64>,
    pub lambda: Vec<f64>,
    pub rho: f64,
}

impl Proximal {
    /// `ρ·(θ − Z) + λ`, with `θ − Z` taken on the 4π circle.
    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(&self.z)
            .zip(&self.lambda)
            .map(|((&t, &z), &l)| self.rho * circular_residual(t, z) + l)
            .collect()
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        theta
            .iter()
            .zip(&self.z)
            .zip(&self.lambda)
            .map(|((&t, &z), &l)| {
                let r = circular_residual(t, z) + l / self.rho;
                0.5 * self.rho * r * r
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainResult {
    pub params: ParameterVector,
    /// Mean minibatch loss (cross-entropy plus proximal term) per epoch.
    pub epoch_loss: Vec<f64>,
}

/// Minibatch SGD. Slots with `frozen[s] == true` are never updated.
/// Parameters are wrapped into `[0, 4π)` after every step.
pub fn sgd_train(
    circuit: &Circuit,
    params0: &ParameterVector,
    train: &[Sample],
    config: &TrainConfig,
    proximal: Option<&Proximal>,
    frozen: Option<&[bool]>,
) -> Result<TrainResult> {
    config.validate()?;
    let n = circuit.n_params();
    if params0.len() != n {
        return Err(Error::Value(format!("{} parameters for a {n}-slot circuit", params0.len())));
    }
    if train.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }
    if let Some(p) = proximal {
        if p.z.len() != n || p.lambda.len() != n || !(p.rho > 0.0 && p.rho.is_finite()) {
            return Err(Error::Value("proximal term does not match the parameter vector".into()));
        }
    }
    if frozen.is_some_and(|f| f.len() != n) {
        return Err(Error::Value("frozen mask does not match the parameter vector".into()));
    }

    let mut theta = params0.as_slice().to_vec();
    let mut velocity = vec![0.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut epoch_loss = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &train[i]).collect();
            let (mut loss, mut grad) = batch_loss_grad(circuit, &theta, &batch)?;
            if let Some(p) = proximal {
                loss += p.value(&theta);
                for (g, pg) in grad.iter_mut().zip(p.gradient(&theta)) {
                    *g += pg;
                }
            }
            for s in 0..n {
                if frozen.is_some_and(|f| f[s]) {
                    continue;
                }
                velocity[s] = config.momentum * velocity[s] + grad[s];
                theta[s] = wrap_unchecked(theta[s] - config.learning_rate * velocity[s]);
            }
            total += loss;
            batches += 1;
        }
        epoch_loss.push(total / batches as f64);
    }
    Ok(TrainResult {
        params: ParameterVector::new(theta)?,
        epoch_loss,
    })
}
