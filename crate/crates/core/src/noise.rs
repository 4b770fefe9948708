//! Shot-based simulation under per-gate depolarizing noise.
//!
//! Each shot follows one stochastic trajectory: after every physical gate,
//! with probability `p` each qubit the gate acted on receives a Pauli drawn
//! uniformly from `{I, X, Y, Z}`. The final state is then sampled once.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Encoding, Mat, MeasurementSpec, Readout, StateVector, C64};
use crate::error::{Error, Result};
use crate::training::{prepare_state, Sample};
use crate::transpiler::{transpile_gates, BasisGateSet, TranspiledCircuit};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    /// Per-gate error probability.
    pub p: f64,
    pub shots: usize,
}

impl NoiseModel {
    pub fn new(p: f64, shots: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Value(format!("error probability {p} outside [0, 1]")));
        }
        if shots == 0 {
            return Err(Error::Value("shot count must be positive".into()));
        }
        Ok(Self { p, shots })
    }
}

fn paulis() -> [Mat; 3] {
    let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    [
        Mat::from_row_major(vec![z, o, o, z]),
        Mat::from_row_major(vec![z, -i, i, z]),
        Mat::from_row_major(vec![o, z, z, -o]),
    ]
}

fn sample_index(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Estimated readout values of `circuit` applied to `input`, from
/// `model.shots` noisy trajectories. Deterministic for a given `seed`.
pub fn apply_depolarizing_noise(
    circuit: &TranspiledCircuit,
    input: &StateVector,
    spec: &MeasurementSpec,
    model: &NoiseModel,
    seed: u64,
) -> Result<Vec<f64>> {
    NoiseModel::new(model.p, model.shots)?;
    spec.validate(circuit.n_qubits)?;
    if input.n_qubits() != circuit.n_qubits {
        return Err(Error::Value("input state does not match the circuit".into()));
    }
    let mats = circuit
        .gates
        .iter()
        .map(|g| g.matrix())
        .collect::<Result<Vec<_>>>()?;
    let pauli = paulis();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut clean: Option<Vec<f64>> = None;
    let mut counts = vec![0usize; 1 << circuit.n_qubits];
    for _ in 0..model.shots {
        let mut state = input.clone();
        let mut hit = false;
        for (g, m) in circuit.gates.iter().zip(&mats) {
            state.apply_matrix(m, &g.qubits)?;
            if model.p > 0.0 && rng.random::<f64>() < model.p {
                for &q in &g.qubits {
                    let k = rng.random_range(0..4usize);
                    if k > 0 {
                        state.apply_matrix(&pauli[k - 1], &[q])?;
                    }
                }
                hit = true;
            }
        }
        let probs = if hit {
            state.probabilities()
        } else {
            clean.get_or_insert_with(|| state.probabilities()).clone()
        };
        counts[sample_index(&probs, &mut rng)] += 1;
    }

    let shots = model.shots as f64;
    Ok(match &spec.readout {
        Readout::PerQubitZ => (0..spec.n_classes)
            .map(|q| {
                counts
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| if (i >> q) & 1 == 0 { c as f64 } else { -(c as f64) })
                    .sum::<f64>()
                    / shots
            })
            .collect(),
        Readout::StateGrouping(groups) => groups
            .iter()
            .map(|g| g.iter().map(|&i| counts[i] as f64).sum::<f64>() / shots)
            .collect(),
    })
}

/// Physical circuit for one input: angle encoder and trainable layers,
/// transpiled together. Amplitude inputs are prepared directly.
fn physical_for(circuit: &Circuit, params: &[f64], s: &Sample, basis: &BasisGateSet) -> Result<(TranspiledCircuit, StateVector)> {
    let mut logical = Vec::with_capacity(circuit.encoder.len() + circuit.layers.len());
    let input = match circuit.encoding {
        Encoding::Angle => {
            for g in &circuit.encoder {
                logical.push((g.kind, g.qubits.clone(), g.resolve(params, &s.features)?));
            }
            StateVector::zero(circuit.n_qubits)
        }
        Encoding::Amplitude => prepare_state(circuit, &s.features)?,
    };
    for g in &circuit.layers {
        logical.push((g.kind, g.qubits.clone(), g.resolve(params, &[])?));
    }
    Ok((transpile_gates(circuit.n_qubits, &logical, basis)?, input))
}

/// Argmax accuracy with readouts estimated under `model`. Sample `k` uses
/// trajectory seed `seed + k`.
pub fn noisy_accuracy(
    circuit: &Circuit,
    params: &[f64],
    samples: &[Sample],
    basis: &BasisGateSet,
    model: &NoiseModel,
    seed: u64,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Data("cannot evaluate on an empty sample set".into()));
    }
    let mut correct = 0usize;
    for (k, s) in samples.iter().enumerate() {
        let (tc, input) = physical_for(circuit, params, s, basis)?;
        let out = apply_depolarizing_noise(&tc, &input, &circuit.measurement, model, seed.wrapping_add(k as u64))?;
        // softmax is monotone, so argmax of the raw readout decides the class
        let pred = out
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
            .0;
        correct += usize::from(pred == s.label);
    }
    Ok(correct as f64 / samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;

    // X chains, built directly so that no rewrite shortens them
    fn chain(n: usize) -> TranspiledCircuit {
        let mut tc = TranspiledCircuit::empty(1);
        for i in 0..n {
            tc.gates.push(crate::transpiler::PhysicalGate {
                kind: GateKind::X,
                qubits: vec![0],
                params: vec![],
            });
            tc.source_map.push(i);
        }
        tc
    }

    #[test]
    fn zero_noise_matches_exact() {
        let tc = chain(3);
        let spec = MeasurementSpec::per_qubit_z(1);
        let out = apply_depolarizing_noise(&tc, &StateVector::zero(1), &spec, &NoiseModel::new(0.0, 100).unwrap(), 1).unwrap();
        assert_eq!(out, vec![-1.0]);
    }

    #[test]
    fn full_noise_depolarizes() {
        let shots = 20_000;
        let out = apply_depolarizing_noise(
            &chain(1),
            &StateVector::zero(1),
            &MeasurementSpec::per_qubit_z(1),
            &NoiseModel::new(1.0, shots).unwrap(),
            9,
        )
        .unwrap();
        let sigma = 1.0 / (shots as f64).sqrt();
        assert!(out[0].abs() < 3.0 * sigma, "{}", out[0]);
    }

    #[test]
    fn validation_and_determinism() {
        assert!(NoiseModel::new(1.5, 10).is_err());
        assert!(NoiseModel::new(-0.1, 10).is_err());
        let spec = MeasurementSpec::per_qubit_z(1);
        let m = NoiseModel::new(0.2, 500).unwrap();
        let a = apply_depolarizing_noise(&chain(4), &StateVector::zero(1), &spec, &m, 3).unwrap();
        let b = apply_depolarizing_noise(&chain(4), &StateVector::zero(1), &spec, &m, 3).unwrap();
        assert_eq!(a, b);
    }
}
