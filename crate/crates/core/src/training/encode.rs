use std::f64::consts::PI;

use crate::circuit::{run_gates, Circuit, Encoding, Gate, GateKind, ParamRef, StateVector, C64};
use crate::error::{Error, Result};

/// How features enter the circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderSpec {
    pub scheme: Encoding,
    /// Gate `k` of the plan carries feature `k`. Empty for amplitude encoding.
    pub gate_plan: Vec<(GateKind, usize)>,
}

/// Rotation kinds cycled through by [`EncoderSpec::angle`], one block of
/// `n_qubits` gates per kind.
const ANGLE_KINDS: [GateKind; 4] = [GateKind::Ry, GateKind::Rz, GateKind::Rx, GateKind::Ry];

impl EncoderSpec {
    /// Angle plan: blocks of RY, RZ, RX, RY, each block placing one gate on
    /// every qubit in turn. Four features on two qubits give `RY RY RZ RZ`;
    /// sixteen on four give `4RY 4RZ 4RX 4RY`.
    pub fn angle(n_features: usize, n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_features == 0 || n_features > n_qubits * ANGLE_KINDS.len() {
            return Err(Error::Encode(format!(
                "cannot angle-encode {n_features} features on {n_qubits} qubits"
            )));
        }
        let gate_plan = (0..n_features)
            .map(|k| (ANGLE_KINDS[k / n_qubits], k % n_qubits))
            .collect();
        Ok(Self {
            scheme: Encoding::Angle,
            gate_plan,
        })
    }

    pub fn amplitude() -> Self {
        Self {
            scheme: Encoding::Amplitude,
            gate_plan: Vec::new(),
        }
    }

    /// Plan read back from a circuit's encoder section.
    pub fn of_circuit(circuit: &Circuit) -> Result<Self> {
        match circuit.encoding {
            Encoding::Amplitude => Ok(Self::amplitude()),
            Encoding::Angle => {
                let mut plan = Vec::new();
                for g in &circuit.encoder {
                    match g.params.as_slice() {
                        [ParamRef::Feature(k)] if *k == plan.len() => plan.push((g.kind, g.qubits[0])),
                        _ => {
                            return Err(Error::Encode(
                                "encoder is not a one-feature-per-gate plan in feature order".into(),
                            ))
                        }
                    }
                }
                Ok(Self {
                    scheme: Encoding::Angle,
                    gate_plan: plan,
                })
            }
        }
    }

    /// Encoder gates reading features by index.
    pub fn gates(&self) -> Result<Vec<Gate>> {
        self.gate_plan
            .iter()
            .enumerate()
            .map(|(k, &(kind, q))| Gate::new(kind, vec![q], vec![ParamRef::Feature(k)]))
            .collect()
    }
}

/// Result of encoding one sample.
#[derive(Clone, Debug, PartialEq)]
pub enum Encoded {
    /// Fixed-angle gates to apply to `|0…0⟩`.
    Gates(Vec<Gate>),
    /// Initial state.
    State(StateVector),
}

pub fn encode(features: &[f64], spec: &EncoderSpec, n_qubits: usize) -> Result<Encoded> {
    match spec.scheme {
        Encoding::Angle => {
            if features.len() != spec.gate_plan.len() {
                return Err(Error::Encode(format!(
                    "{} features for a {}-gate plan",
                    features.len(),
                    spec.gate_plan.len()
                )));
            }
            if let Some(&(_, q)) = spec.gate_plan.iter().find(|(_, q)| *q >= n_qubits) {
                return Err(Error::Index { index: q, n_qubits });
            }
            spec.gate_plan
                .iter()
                .zip(features)
                .map(|(&(kind, q), &x)| Gate::fixed(kind, &[q], &[PI * x]))
                .collect::<Result<_>>()
                .map(Encoded::Gates)
        }
        Encoding::Amplitude => amplitude_state(features, n_qubits).map(Encoded::State),
    }
}

fn amplitude_state(features: &[f64], n_qubits: usize) -> Result<StateVector> {
    let dim = 1usize << n_qubits;
    if features.len() != dim {
        return Err(Error::Encode(format!(
            "amplitude encoding needs {dim} features, got {}",
            features.len()
        )));
    }
    let norm = features.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Encode("feature vector has zero or non-finite norm".into()));
    }
    StateVector::from_amplitudes(features.iter().map(|&x| C64::new(x / norm, 0.0)).collect())
}

/// Input state `|ψ_x⟩` for `circuit` before the trainable layers.
pub fn prepare_state(circuit: &Circuit, features: &[f64]) -> Result<StateVector> {
    match circuit.encoding {
        Encoding::Amplitude => amplitude_state(features, circuit.n_qubits),
        Encoding::Angle => {
            let need = circuit.n_features();
            if features.len() != need {
                return Err(Error::Encode(format!(
                    "circuit encodes {need} features, sample has {}",
                    features.len()
                )));
            }
            run_gates(&circuit.encoder, &[], features, StateVector::zero(circuit.n_qubits))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_plans() {
        let p = EncoderSpec::angle(4, 2).unwrap();
        assert_eq!(
            p.gate_plan,
            vec![(GateKind::Ry, 0), (GateKind::Ry, 1), (GateKind::Rz, 0), (GateKind::Rz, 1)]
        );
        let p = EncoderSpec::angle(16, 4).unwrap();
        let kinds: Vec<_> = p.gate_plan.iter().map(|g| g.0).collect();
        assert_eq!(&kinds[8..12], &[GateKind::Rx; 4]);
        assert_eq!(&kinds[12..], &[GateKind::Ry; 4]);
        assert!(EncoderSpec::angle(17, 4).is_err());
    }

    #[test]
    fn reference_circuits_follow_the_plan() {
        for (name, nf, nq) in [("syn4", 4, 2), ("syn16", 16, 4)] {
            let c = crate::circuit::reference_circuit(name).unwrap();
            assert_eq!(EncoderSpec::of_circuit(&c).unwrap(), EncoderSpec::angle(nf, nq).unwrap());
        }
    }

    #[test]
    fn amplitude_examples() {
        let s = amplitude_state(&[1.0, 0.0, 0.0, 0.0], 2).unwrap();
        assert_eq!(s, StateVector::zero(2));
        let s = amplitude_state(&[1.0; 4], 2).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a.re - 0.5).abs() < 1e-15 && a.im == 0.0));
        assert!(matches!(amplitude_state(&[0.0; 4], 2), Err(Error::Encode(_))));
    }

    #[test]
    fn zero_features_encode_identity() {
        let c = crate::circuit::reference_circuit("syn4").unwrap();
        let s = prepare_state(&c, &[0.0; 4]).unwrap();
        assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
        let Encoded::Gates(g) = encode(&[0.0; 4], &EncoderSpec::angle(4, 2).unwrap(), 2).unwrap() else {
            panic!()
        };
        assert!(g.iter().all(|g| g.params == vec![ParamRef::Const(0.0)]));
    }
}
