use super::{gate_matrix, Circuit, Gate, Mat, MeasurementSpec, Readout, C64};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = C64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Wraps amplitudes that must already be normalised (to 1e-9).
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = amps.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Value(format!("{n} amplitudes is not a power of two")));
        }
        let s = Self {
            n_qubits: n.trailing_zeros() as usize,
            amps,
        };
        if (s.norm_sqr() - 1.0).abs() > 1e-9 {
            return Err(Error::Value(format!("state norm² {} != 1", s.norm_sqr())));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies a 2×2 or 4×4 matrix to `qubits` in place. For a 4×4 matrix the
    /// first qubit is the high bit of the gate-local index.
    pub fn apply_matrix(&mut self, m: &Mat, qubits: &[usize]) -> Result<()> {
        for &q in qubits {
            if q >= self.n_qubits {
                return Err(Error::Index {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        match (m.dim(), qubits) {
            (2, &[q]) => {
                let bit = 1usize << q;
                let (m00, m01, m10, m11) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        let j = i | bit;
                        let (a, b) = (self.amps[i], self.amps[j]);
                        self.amps[i] = m00 * a + m01 * b;
                        self.amps[j] = m10 * a + m11 * b;
                    }
                }
            }
            (4, &[q_hi, q_lo]) => {
                let (bh, bl) = (1usize << q_hi, 1usize << q_lo);
                for i in 0..self.amps.len() {
                    if i & bh == 0 && i & bl == 0 {
                        let idx = [i, i | bl, i | bh, i | bh | bl];
                        let v = idx.map(|k| self.amps[k]);
                        for (r, &k) in idx.iter().enumerate() {
                            self.amps[k] = (0..4).map(|c| m.get(r, c) * v[c]).sum();
                        }
                    }
                }
            }
            _ => {
                return Err(Error::Value(format!(
                    "{}x{} matrix on {} qubit(s)",
                    m.dim(),
                    m.dim(),
                    qubits.len()
                )))
            }
        }
        Ok(())
    }

    /// Applies a gate with already-resolved angles.
    pub fn apply_kind(&mut self, gate: &Gate, angles: &[f64]) -> Result<()> {
        let m = gate_matrix(gate.kind, angles)?;
        self.apply_matrix(&m, &gate.qubits)
    }

    /// `⟨Z⟩` on qubit `q`.
    pub fn expect_z(&self, q: usize) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if (i >> q) & 1 == 0 {
                    a.norm_sqr()
                } else {
                    -a.norm_sqr()
                }
            })
            .sum()
    }
}

/// `G|ψ⟩` for a single gate. Angles come from `params`; feature-encoded gates
/// must go through [`run_gates`] instead.
pub fn apply_gate(state: &StateVector, gate: &Gate, params: &[f64]) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_kind(gate, &gate.resolve(params, &[])?)?;
    Ok(out)
}

/// Applies `gates` in order.
pub fn run_gates(
    gates: &[Gate],
    params: &[f64],
    features: &[f64],
    mut state: StateVector,
) -> Result<StateVector> {
    for g in gates {
        state.apply_kind(g, &g.resolve(params, features)?)?;
    }
    Ok(state)
}

/// Applies the trainable layers `W(θ)` to an already-encoded input state.
pub fn run_circuit(circuit: &Circuit, params: &[f64], input: StateVector) -> Result<StateVector> {
    if input.n_qubits() != circuit.n_qubits {
        return Err(Error::Value(format!(
            "{}-qubit input for {}-qubit circuit",
            input.n_qubits(),
            circuit.n_qubits
        )));
    }
    run_gates(&circuit.layers, params, &[], input)
}

/// Raw readout values, before softmax.
pub fn measure_outputs(state: &StateVector, spec: &MeasurementSpec) -> Result<Vec<f64>> {
    spec.validate(state.n_qubits())?;
    Ok(match &spec.readout {
        Readout::PerQubitZ => (0..spec.n_classes).map(|q| state.expect_z(q)).collect(),
        Readout::StateGrouping(groups) => groups
            .iter()
            .map(|g| g.iter().map(|&i| state.amps[i].norm_sqr()).sum())
            .collect(),
    })
}
