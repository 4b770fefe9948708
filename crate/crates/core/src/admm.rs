//! Compilation-aware constrained training by ADMM.
//!
//! Each iteration runs proximal SGD on `θ`, rebuilds the compression mask,
//! projects the masked entries of `Z` onto their selected levels and updates
//! the multipliers `λ`. After the loop the masked slots are frozen at their
//! levels and the remaining slots are retrained.

use std::f64::consts::PI;

use crate::circuit::{circular_residual, wrap_unchecked, Circuit, ParameterVector};
use crate::error::{Error, Result};
use crate::lut::{CompressionLUT, LevelTag};
use crate::recl::{reconstruct_lut, ReconstructedLUT, TauOrientation};
use crate::training::{loss_and_accuracy, sgd_train, Dataset, Proximal, TrainConfig};
use crate::transpiler::{tcd, BasisGateSet};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub struct ADMMConfig {
    /// Penalty `ρ`.
    pub rho: f64,
    /// Weight of the distance term in the mask score, in `(0, 1)`.
    pub alpha: f64,
    /// Fraction of trainable gates to compress.
    pub target_ratio: f64,
    /// Stopping threshold on squared parameter and auxiliary changes.
    pub zeta: f64,
    pub max_iters: usize,
    pub epochs_per_iter: usize,
    /// Epochs of the final masked retrain.
    pub retrain_epochs: usize,
    /// Measure the mask distance from `θ + λ/ρ` instead of `θ + λ`.
    pub scaled_distance: bool,
    pub orientation: TauOrientation,
    /// Learning rate, batch size and momentum for the inner SGD runs. Its
    /// `epochs` and `seed` are overridden.
    pub train: TrainConfig,
}

impl Default for ADMMConfig {
    fn default() -> Self {
        Self {
            rho: 3.0,
            alpha: 0.5,
            target_ratio: 0.5,
            zeta: 1e-4,
            max_iters: 15,
            epochs_per_iter: 30,
            retrain_epochs: 50,
            scaled_distance: false,
            orientation: TauOrientation::Speedup,
            train: TrainConfig::default(),
        }
    }
}

impl ADMMConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.target_ratio) {
            return bad(format!("target ratio must lie in [0, 1], got {}", self.target_ratio));
        }
        if !(self.zeta > 0.0 && self.zeta.is_finite()) {
            return bad(format!("zeta must be positive, got {}", self.zeta));
        }
        if self.max_iters == 0 || self.epochs_per_iter == 0 {
            return bad("max_iters and epochs_per_iter must be positive".into());
        }
        self.train.validate()
    }

    fn inner(&self, epochs: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs,
            seed,
            ..self.train.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ADMMState {
    pub theta: Vec<f64>,
    pub z: Vec<f64>,
    pub lambda: Vec<f64>,
    pub iter: usize,
}

impl ADMMState {
    /// `Z = θ`, `λ = 0`.
    pub fn new(theta: &[f64]) -> Self {
        Self {
            theta: theta.to_vec(),
            z: theta.to_vec(),
            lambda: vec![0.0; theta.len()],
            iter: 0,
        }
    }

    /// `‖θ − Z‖₂` over circular residuals.
    pub fn theta_z_gap(&self) -> f64 {
        sq_dist(&self.theta, &self.z).sqrt()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| circular_residual(x, y).powi(2)).sum()
}

/// Which layer gates are forced to their compression level.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressionMask {
    /// Indexed like `circuit.layers`; encoder gates are never represented.
    pub bits: Vec<bool>,
    /// Mask score per layer gate; `+∞` for gates that cannot be compressed.
    pub scores: Vec<f64>,
}

impl CompressionMask {
    pub fn empty(n_layers: usize) -> Self {
        Self {
            bits: vec![false; n_layers],
            scores: vec![f64::INFINITY; n_layers],
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn masked(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// Per-slot frozen flags for `circuit`.
    pub fn frozen_slots(&self, circuit: &Circuit) -> Vec<bool> {
        let mut f = vec![false; circuit.n_params()];
        for i in self.masked() {
            circuit.layers[i].slots().for_each(|s| f[s] = true);
        }
        f
    }
}

/// Number of gates to compress: `round(ratio · |G|)`.
pub fn mask_size(target_ratio: f64, n_trainable: usize) -> usize {
    (target_ratio * n_trainable as f64).round() as usize
}

/// Scores every gate in `recon` by `α·distance + (1 − α)·depth` (both scaled
/// to `[0, 1]`) and masks the `round(ratio · |G|)` lowest scores. Ties go to
/// the earlier gate. Gates absent from `recon` are never masked.
pub fn build_mask(
    circuit: &Circuit,
    theta_next: &[f64],
    lambda: &[f64],
    recon: &ReconstructedLUT,
    config: &ADMMConfig,
) -> Result<CompressionMask> {
    if !(0.0..=1.0).contains(&config.target_ratio) {
        return Err(Error::Config(format!(
            "target ratio must lie in [0, 1], got {}",
            config.target_ratio
        )));
    }
    let mut mask = CompressionMask::empty(circuit.layers.len());
    let max_depth = recon.max_depth();
    for e in &recon.entries {
        let g = &circuit.layers[e.gate_index];
        let dist = g
            .slots()
            .zip(&e.level.value)
            .map(|(s, &v)| {
                let shift = if config.scaled_distance {
                    lambda[s] / config.rho
                } else {
                    lambda[s]
                };
                circular_residual(wrap_unchecked(theta_next[s] + shift), v).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        let dist = dist / (2.0 * PI * (g.kind.arity() as f64).sqrt());
        let depth = if max_depth == 0 {
            0.0
        } else {
            e.level.depth as f64 / max_depth as f64
        };
        mask.scores[e.gate_index] = config.alpha * dist + (1.0 - config.alpha) * depth;
    }
    let mut order: Vec<usize> = recon.entries.iter().map(|e| e.gate_index).collect();
    order.sort_by(|&a, &b| mask.scores[a].total_cmp(&mask.scores[b]).then(a.cmp(&b)));
    let k = mask_size(config.target_ratio, circuit.trainable_gates().len()).min(order.len());
    for &i in &order[..k] {
        mask.bits[i] = true;
    }
    Ok(mask)
}

/// `Z_i ← T^admm(G_i)` for masked gates, previous `Z_i` otherwise.
pub fn project_z(
    circuit: &Circuit,
    state: &ADMMState,
    mask: &CompressionMask,
    recon: &ReconstructedLUT,
) -> Result<Vec<f64>> {
    let mut z = state.z.clone();
    for i in mask.masked() {
        let e = recon
            .get(i)
            .ok_or_else(|| Error::Lut(format!("masked gate {i} has no selected level")))?;
        for (s, &v) in circuit.layers[i].slots().zip(&e.level.value) {
            z[s] = v;
        }
    }
    Ok(z)
}

/// `λ + ρ·(θ − Z)`, residuals taken on the 4π circle.
pub fn update_lambda(lambda: &[f64], theta: &[f64], z: &[f64], rho: f64) -> Vec<f64> {
    lambda
        .iter()
        .zip(theta.iter().zip(z))
        .map(|(&l, (&t, &zz))| l + rho * circular_residual(t, zz))
        .collect()
}

/// `‖θ^r − θ^{r+1}‖² < ζ` and `‖Z^r − Z^{r+1}‖² < ζ`.
pub fn check_stop(prev: &ADMMState, next: &ADMMState, zeta: f64) -> bool {
    sq_dist(&prev.theta, &next.theta) < zeta && sq_dist(&prev.z, &next.z) < zeta
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub r: usize,
    /// Training loss of `θ^{r+1}` (cross-entropy only).
    pub loss: f64,
    /// Training accuracy of `θ^{r+1}`.
    pub accuracy: f64,
    /// Depth of the circuit at `Z^{r+1}`.
    pub tcd: usize,
    pub theta_z_gap: f64,
    pub masked: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ADMMReport {
    pub iterations: Vec<IterationRecord>,
    /// Iteration (1-based) at which the stopping rule fired.
    pub converged_at: Option<usize>,
    /// Set when `max_iters` ran out before the stopping rule fired.
    pub not_converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressionOutcome {
    pub params: ParameterVector,
    pub mask: CompressionMask,
    pub recon: ReconstructedLUT,
    pub report: ADMMReport,
}

impl CompressionOutcome {
    fn unchanged(circuit: &Circuit, warm: &ParameterVector) -> Self {
        Self {
            params: warm.clone(),
            mask: CompressionMask::empty(circuit.layers.len()),
            recon: ReconstructedLUT::default(),
            report: ADMMReport {
                converged_at: Some(0),
                ..ADMMReport::default()
            },
        }
    }
}

/// Sets masked slots to their levels, freezes them and retrains the rest.
fn finalize(
    circuit: &Circuit,
    theta: &[f64],
    mask: &CompressionMask,
    levels: impl Fn(usize) -> Result<Vec<f64>>,
    dataset: &Dataset,
    config: &ADMMConfig,
    seed: u64,
) -> Result<ParameterVector> {
    let mut fixed = theta.to_vec();
    for i in mask.masked() {
        for (s, v) in circuit.layers[i].slots().zip(levels(i)?) {
            fixed[s] = v;
        }
    }
    let fixed = ParameterVector::new(fixed)?;
    if config.retrain_epochs == 0 || mask.count() == circuit.trainable_gates().len() {
        return Ok(fixed);
    }
    let frozen = mask.frozen_slots(circuit);
    let out = sgd_train(
        circuit,
        &fixed,
        &dataset.train,
        &config.inner(config.retrain_epochs, seed),
        None,
        Some(&frozen),
    )?;
    Ok(out.params)
}

/// Runs the ADMM loop from the trained warm start `warm`. With
/// `target_ratio = 0` the warm start is returned untouched.
pub fn run_cqcp_admm(
    circuit: &Circuit,
    dataset: &Dataset,
    lut: &CompressionLUT,
    warm: &ParameterVector,
    config: &ADMMConfig,
    basis: &BasisGateSet,
    seed: u64,
) -> Result<CompressionOutcome> {
    config.validate()?;
    if warm.len() != circuit.n_params() {
        return Err(Error::Value("warm start does not match the circuit".into()));
    }
    if mask_size(config.target_ratio, circuit.trainable_gates().len()) == 0 {
        return Ok(CompressionOutcome::unchanged(circuit, warm));
    }
    let recon = reconstruct_lut(circuit, warm, lut, &dataset.train, basis, config.orientation)?;
    let mut state = ADMMState::new(warm);
    let mut mask = CompressionMask::empty(circuit.layers.len());
    let mut report = ADMMReport::default();
    let inner = config.inner(config.epochs_per_iter, seed);

    for r in 0..config.max_iters {
        let prox = Proximal {
            z: state.z.clone(),
            lambda: state.lambda.clone(),
            rho: config.rho,
        };
        let start = ParameterVector::new(state.theta.clone())?;
        let theta = sgd_train(circuit, &start, &dataset.train, &inner, Some(&prox), None)?
            .params
            .into_inner();
        mask = build_mask(circuit, &theta, &state.lambda, &recon, config)?;
        let stepped = ADMMState {
            theta,
            ..state.clone()
        };
        let z = project_z(circuit, &stepped, &mask, &recon)?;
        let lambda = update_lambda(&state.lambda, &stepped.theta, &z, config.rho);
        let next = ADMMState {
            theta: stepped.theta,
            z,
            lambda,
            iter: r + 1,
        };
        let (loss, acc) = loss_and_accuracy(circuit, &next.theta, &dataset.train)?;
        report.iterations.push(IterationRecord {
            r: r + 1,
            loss,
            accuracy: acc,
            tcd: tcd(circuit, &next.z, basis)?,
            theta_z_gap: next.theta_z_gap(),
            masked: mask.count(),
        });
        let stop = check_stop(&state, &next, config.zeta);
        state = next;
        if stop {
            report.converged_at = Some(r + 1);
            break;
        }
    }
    report.not_converged = report.converged_at.is_none();

    let params = finalize(
        circuit,
        &state.theta,
        &mask,
        |i| {
            recon
                .get(i)
                .map(|e| e.level.value.clone())
                .ok_or_else(|| Error::Lut(format!("masked gate {i} has no selected level")))
        },
        dataset,
        config,
        seed,
    )?;
    Ok(CompressionOutcome {
        params,
        mask,
        recon,
        report,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineMode {
    /// Magnitude pruning: compress the gates whose angles are closest to 0.
    ZeroOnlyPruning,
    /// ADMM restricted to pruning levels.
    PruneOnly,
    /// ADMM restricted to quantization levels.
    QuantOnly,
}

#[allow(clippy::too_many_arguments)]
pub fn baseline_compress(
    mode: BaselineMode,
    circuit: &Circuit,
    dataset: &Dataset,
    lut: &CompressionLUT,
    warm: &ParameterVector,
    config: &ADMMConfig,
    basis: &BasisGateSet,
    seed: u64,
) -> Result<CompressionOutcome> {
    match mode {
        BaselineMode::PruneOnly => {
            run_cqcp_admm(circuit, dataset, &lut.filtered(LevelTag::Prune), warm, config, basis, seed)
        }
        BaselineMode::QuantOnly => {
            run_cqcp_admm(circuit, dataset, &lut.filtered(LevelTag::Quantize), warm, config, basis, seed)
        }
        BaselineMode::ZeroOnlyPruning => zero_only_pruning(circuit, dataset, warm, config, seed),
    }
}

fn zero_only_pruning(
    circuit: &Circuit,
    dataset: &Dataset,
    warm: &ParameterVector,
    config: &ADMMConfig,
    seed: u64,
) -> Result<CompressionOutcome> {
    config.validate()?;
    let gates = circuit.trainable_gates();
    let k = mask_size(config.target_ratio, gates.len());
    if k == 0 {
        return Ok(CompressionOutcome::unchanged(circuit, warm));
    }
    let mut mask = CompressionMask::empty(circuit.layers.len());
    for &i in &gates {
        let d: f64 = circuit.layers[i]
            .slots()
            .map(|s| circular_residual(warm[s], 0.0).powi(2))
            .sum();
        mask.scores[i] = d.sqrt();
    }
    let mut order = gates.clone();
    order.sort_by(|&a, &b| mask.scores[a].total_cmp(&mask.scores[b]).then(a.cmp(&b)));
    for &i in &order[..k] {
        mask.bits[i] = true;
    }
    let params = finalize(
        circuit,
        warm,
        &mask,
        |i| Ok(vec![0.0; circuit.layers[i].kind.arity()]),
        dataset,
        config,
        seed,
    )?;
    Ok(CompressionOutcome {
        params,
        mask,
        recon: ReconstructedLUT::default(),
        report: ADMMReport::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Encoding, Gate, GateKind, MeasurementSpec};
    use crate::lut::CompressionLevel;
    use crate::recl::ReconstructedEntry;

    fn three_rx() -> Circuit {
        Circuit::new(
            1,
            Encoding::Angle,
            vec![],
            (0..3).map(|i| Gate::trainable(GateKind::Rx, &[0], i).unwrap()).collect(),
            MeasurementSpec::per_qubit_z(1),
        )
        .unwrap()
    }

    fn entry(i: usize, v: f64, depth: usize) -> ReconstructedEntry {
        ReconstructedEntry {
            gate_index: i,
            level: CompressionLevel {
                value: vec![v],
                tag: LevelTag::Quantize,
                depth,
            },
            metric: 0.0,
        }
    }

    fn recon() -> ReconstructedLUT {
        ReconstructedLUT {
            entries: vec![entry(0, 0.0, 0), entry(1, PI, 1), entry(2, 0.5 * PI, 1)],
            depth_guards: 0,
        }
    }

    #[test]
    fn mask_scores_by_hand() {
        let c = three_rx();
        let theta = [0.2, PI, 0.5 * PI + 1.0];
        let cfg = ADMMConfig {
            target_ratio: 1.0 / 3.0,
            ..ADMMConfig::default()
        };
        let m = build_mask(&c, &theta, &[0.0; 3], &recon(), &cfg).unwrap();
        let two_pi = 2.0 * PI;
        let want = [0.5 * 0.2 / two_pi, 0.5 * 1.0, 0.5 * (1.0 / two_pi) + 0.5];
        for (s, w) in m.scores.iter().zip(want) {
            assert!((s - w).abs() < 1e-12);
        }
        assert_eq!(m.bits, vec![true, false, false]);
    }

    #[test]
    fn mask_extremes_and_projection() {
        let c = three_rx();
        let st = ADMMState::new(&[0.1, 2.0, 3.0]);
        for (ratio, n) in [(0.0, 0), (1.0, 3)] {
            let cfg = ADMMConfig {
                target_ratio: ratio,
                ..ADMMConfig::default()
            };
            let m = build_mask(&c, &st.theta, &st.lambda, &recon(), &cfg).unwrap();
            assert_eq!(m.count(), n);
            let z = project_z(&c, &st, &m, &recon()).unwrap();
            if n == 0 {
                assert_eq!(z, st.z);
            } else {
                assert_eq!(z, vec![0.0, PI, 0.5 * PI]);
            }
        }
        let cfg = ADMMConfig {
            target_ratio: 1.5,
            ..ADMMConfig::default()
        };
        assert!(build_mask(&c, &st.theta, &st.lambda, &recon(), &cfg).unwrap_err().is_config());
    }

    #[test]
    fn lambda_and_stop_rule() {
        let l = update_lambda(&[0.0, 1.0], &[1.0, 2.0], &[0.5, 2.0], 1.0);
        assert_eq!(l, vec![0.5, 1.0]);
        let mut lam = vec![0.0];
        for _ in 0..4 {
            lam = update_lambda(&lam, &[1.0], &[0.75], 0.5);
        }
        assert!((lam[0] - 4.0 * 0.5 * 0.25).abs() < 1e-15);

        let a = ADMMState::new(&[1.0, 2.0]);
        assert!(check_stop(&a, &a, 1e-4));
        let mut b = a.clone();
        b.theta[0] += 1.0;
        assert!(!check_stop(&a, &b, 1e-4));
        let mut c = a.clone();
        c.theta[0] += 0.5;
        c.z[0] += 0.5;
        assert!(!check_stop(&a, &c, 0.25));
    }
}
