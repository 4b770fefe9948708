//! Compilation of logical circuits to a basis gate set, and transpiled circuit
//! depth (TCD).
//!
//! The pipeline is: decompose each logical gate into basis gates, run the
//! peephole optimizer, then measure depth as the longest path through the
//! gate dependency DAG (two gates depend on each other iff they share a qubit).
//! No routing is performed: qubits are assumed fully connected.

mod depth_table;
mod peephole;
mod synth;

use std::collections::BTreeSet;
use std::fmt;

pub use depth_table::{DepthTable, ParamClass, GENERIC_ANGLE, GENERIC_U3};
pub use peephole::peephole_optimize;

use crate::circuit::{
    gate_matrix, wrap_param, Circuit, Gate, GateKind, Mat, StateVector, C64,
};
use crate::error::{Error, Result};
use synth::{
    crx_template, cry_template, crz_template, cu3_template, is_half_pi_multiple, snap_half_pi,
    synth_1q, Step1q, TemplateStep, SNAP_TOL,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisGateSet {
    kinds: BTreeSet<GateKind>,
}

impl BasisGateSet {
    /// Requires CX plus the RZ/SX single-qubit family.
    pub fn new(kinds: impl IntoIterator<Item = GateKind>) -> Result<Self> {
        let kinds: BTreeSet<_> = kinds.into_iter().collect();
        for need in [GateKind::Cx, GateKind::Rz, GateKind::Sx] {
            if !kinds.contains(&need) {
                return Err(Error::Config(format!("basis gate set must contain {need}")));
            }
        }
        Ok(Self { kinds })
    }

    /// `{CX, ID, RZ, SX, X}`.
    pub fn ibm() -> Self {
        Self {
            kinds: [GateKind::Cx, GateKind::Id, GateKind::Rz, GateKind::Sx, GateKind::X]
                .into_iter()
                .collect(),
        }
    }

    /// Parses a comma-separated list such as `cx,id,rz,sx,x`.
    pub fn parse(s: &str) -> Result<Self> {
        let kinds = s
            .split(',')
            .map(|t| {
                GateKind::from_name(t.trim())
                    .ok_or_else(|| Error::Config(format!("unknown basis gate {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(kinds)
    }

    pub fn contains(&self, kind: GateKind) -> bool {
        self.kinds.contains(&kind)
    }

    pub fn kinds(&self) -> impl Iterator<Item = GateKind> + '_ {
        self.kinds.iter().copied()
    }
}

impl Default for BasisGateSet {
    fn default() -> Self {
        Self::ibm()
    }
}

impl fmt::Display for BasisGateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.kinds.iter().map(|k| k.name()).collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalGate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
}

impl PhysicalGate {
    fn rz(q: usize, a: f64) -> Self {
        Self {
            kind: GateKind::Rz,
            qubits: vec![q],
            params: vec![a],
        }
    }

    fn plain(kind: GateKind, qubits: Vec<usize>) -> Self {
        Self {
            kind,
            qubits,
            params: vec![],
        }
    }

    pub fn matrix(&self) -> Result<Mat> {
        gate_matrix(self.kind, &self.params)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranspiledCircuit {
    pub n_qubits: usize,
    pub gates: Vec<PhysicalGate>,
    /// For each physical gate, the index of the logical gate it came from.
    pub source_map: Vec<usize>,
    /// Accumulated global phase: `unitary() = e^{i·phase} · Π gates`.
    pub global_phase: f64,
}

impl TranspiledCircuit {
    pub fn empty(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: vec![],
            source_map: vec![],
            global_phase: 0.0,
        }
    }

    pub fn depth(&self) -> usize {
        circuit_depth(self)
    }

    /// Dense unitary including the tracked global phase.
    pub fn unitary(&self) -> Result<Mat> {
        let mats = self
            .gates
            .iter()
            .map(|g| Ok((g.matrix()?, g.qubits.as_slice())))
            .collect::<Result<Vec<_>>>()?;
        let u = unitary_of(self.n_qubits, mats.iter().map(|(m, q)| (m, *q)))?;
        Ok(u.scale(C64::from_polar(1.0, self.global_phase)))
    }
}

/// Dense unitary of a gate sequence, assembled column by column.
pub fn unitary_of<'a>(
    n_qubits: usize,
    gates: impl Iterator<Item = (&'a Mat, &'a [usize])> + Clone,
) -> Result<Mat> {
    let dim = 1usize << n_qubits;
    let mut u = Mat::zeros(dim);
    for col in 0..dim {
        let mut s = StateVector::basis(n_qubits, col);
        for (m, q) in gates.clone() {
            s.apply_matrix(m, q)?;
        }
        for (row, a) in s.amplitudes().iter().enumerate() {
            u.set(row, col, *a);
        }
    }
    Ok(u)
}

/// Dense unitary of the trainable layers at `params`.
pub fn layers_unitary(circuit: &Circuit, params: &[f64]) -> Result<Mat> {
    let mats = circuit
        .layers
        .iter()
        .map(|g| Ok((gate_matrix(g.kind, &g.resolve(params, &[])?)?, g.qubits.as_slice())))
        .collect::<Result<Vec<_>>>()?;
    unitary_of(circuit.n_qubits, mats.iter().map(|(m, q)| (m, *q)))
}

/// Decomposition of one logical gate: basis gates on the original qubits plus
/// the global phase it introduces.
#[derive(Clone, Debug)]
pub(crate) struct Decomposition {
    pub gates: Vec<PhysicalGate>,
    pub phase: f64,
}

/// Decompose one gate at concrete angles.
pub(crate) fn decompose(
    kind: GateKind,
    qubits: &[usize],
    angles: &[f64],
    basis: &BasisGateSet,
) -> Result<Decomposition> {
    if basis.contains(kind) {
        return Ok(Decomposition {
            gates: vec![PhysicalGate {
                kind,
                qubits: qubits.to_vec(),
                params: angles.to_vec(),
            }],
            phase: 0.0,
        });
    }
    if kind == GateKind::Cx {
        return Err(Error::UnsupportedGate(kind));
    }
    let angles: Vec<f64> = angles
        .iter()
        .map(|&a| wrap_param(a).map(snap_half_pi))
        .collect::<Result<_>>()?;
    let target = gate_matrix(kind, &angles)?;

    // global-phase-only gates vanish
    if let Some(c) = target.identity_phase(SNAP_TOL) {
        return Ok(Decomposition {
            gates: vec![],
            phase: c.arg(),
        });
    }

    let has_x = basis.contains(GateKind::X);
    // local qubit ids: 1 = control / first, 0 = target / second, so the local
    // 4x4 unitary has the same layout as gate_matrix
    let local: Vec<PhysicalGate> = match kind.num_qubits() {
        1 => {
            if kind == GateKind::Rx && !is_half_pi_multiple(angles[0]) {
                rx_generic(angles[0], 0)
            } else {
                steps_to_gates(&synth_1q(&target, has_x), 0)
            }
        }
        _ => {
            let template = match kind {
                GateKind::Crx => crx_template(angles[0]),
                GateKind::Cry => cry_template(angles[0]),
                GateKind::Crz => crz_template(angles[0]),
                GateKind::Cu3 => cu3_template(angles[0], angles[1], angles[2]),
                other => return Err(Error::UnsupportedGate(other)),
            };
            let mut out = Vec::new();
            for step in template {
                match step {
                    TemplateStep::Cx => out.push(PhysicalGate::plain(GateKind::Cx, vec![1, 0])),
                    TemplateStep::OneQ { role, matrix } => {
                        out.extend(steps_to_gates(&synth_1q(&matrix, has_x), 1 - role))
                    }
                }
            }
            out
        }
    };

    let n_local = kind.num_qubits();
    let mats = local
        .iter()
        .map(|g| Ok((g.matrix()?, g.qubits.as_slice())))
        .collect::<Result<Vec<_>>>()?;
    let built = unitary_of(n_local, mats.iter().map(|(m, q)| (m, *q)))?;
    let phase = target.relative_phase(&built);

    let remap = |q: usize| if n_local == 1 { qubits[0] } else { qubits[1 - q] };
    let gates = local
        .into_iter()
        .map(|mut g| {
            g.qubits = g.qubits.iter().map(|&q| remap(q)).collect();
            g
        })
        .collect();
    Ok(Decomposition { gates, phase })
}

/// `RX(θ) = RZ(5π/2)·SX·RZ(θ+π)·SX·RZ(π/2)` (rightmost applied first).
fn rx_generic(theta: f64, q: usize) -> Vec<PhysicalGate> {
    use std::f64::consts::{FRAC_PI_2, PI};
    let wrapped_mid = crate::circuit::wrap_unchecked(theta + PI);
    vec![
        PhysicalGate::rz(q, FRAC_PI_2),
        PhysicalGate::plain(GateKind::Sx, vec![q]),
        PhysicalGate::rz(q, wrapped_mid),
        PhysicalGate::plain(GateKind::Sx, vec![q]),
        PhysicalGate::rz(q, 2.5 * PI),
    ]
}

fn steps_to_gates(steps: &[Step1q], q: usize) -> Vec<PhysicalGate> {
    steps
        .iter()
        .map(|s| match *s {
            Step1q::Rz(a) => PhysicalGate::rz(q, a),
            Step1q::Sx => PhysicalGate::plain(GateKind::Sx, vec![q]),
            Step1q::X => PhysicalGate::plain(GateKind::X, vec![q]),
        })
        .collect()
}

/// Basis-gate sequence for a logical gate, with its angles taken from `params`.
/// The product of the returned gates equals the gate's unitary up to a global
/// phase.
pub fn decompose_gate(gate: &Gate, params: &[f64], basis: &BasisGateSet) -> Result<Vec<PhysicalGate>> {
    let angles = gate.resolve(params, &[])?;
    Ok(decompose(gate.kind, &gate.qubits, &angles, basis)?.gates)
}

/// Decomposes gates that already carry concrete angles.
pub fn transpile_gates(
    n_qubits: usize,
    gates: &[(GateKind, Vec<usize>, Vec<f64>)],
    basis: &BasisGateSet,
) -> Result<TranspiledCircuit> {
    let mut tc = TranspiledCircuit::empty(n_qubits);
    for (idx, (kind, qubits, angles)) in gates.iter().enumerate() {
        let d = decompose(*kind, qubits, angles, basis)?;
        tc.global_phase += d.phase;
        tc.source_map.extend(std::iter::repeat_n(idx, d.gates.len()));
        tc.gates.extend(d.gates);
    }
    Ok(peephole_optimize(&tc))
}

/// Transpiles the trainable layers `W(θ)` at `params`. Encoder gates are data
/// dependent and are not part of the TCD.
pub fn transpile_circuit(circuit: &Circuit, params: &[f64], basis: &BasisGateSet) -> Result<TranspiledCircuit> {
    let gates = circuit
        .layers
        .iter()
        .map(|g| Ok((g.kind, g.qubits.clone(), g.resolve(params, &[])?)))
        .collect::<Result<Vec<_>>>()?;
    transpile_gates(circuit.n_qubits, &gates, basis)
}

/// Transpiled circuit depth of the layers at `params`.
pub fn tcd(circuit: &Circuit, params: &[f64], basis: &BasisGateSet) -> Result<usize> {
    Ok(transpile_circuit(circuit, params, basis)?.depth())
}

/// Longest path through the dependency DAG; gates conflict iff they share a
/// qubit.
pub fn circuit_depth(tc: &TranspiledCircuit) -> usize {
    let mut level = vec![0usize; tc.n_qubits];
    for g in &tc.gates {
        let d = g.qubits.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for &q in &g.qubits {
            level[q] = d;
        }
    }
    level.into_iter().max().unwrap_or(0)
}

/// Depth of a single gate of `kind` compiled on its own.
pub fn standalone_gate_depth(kind: GateKind, params: &[f64], basis: &BasisGateSet) -> Result<usize> {
    let qubits: Vec<usize> = (0..kind.num_qubits()).collect();
    let tc = transpile_gates(kind.num_qubits(), &[(kind, qubits, params.to_vec())], basis)?;
    Ok(tc.depth())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pg(kind: GateKind, q: &[usize], p: &[f64]) -> PhysicalGate {
        PhysicalGate {
            kind,
            qubits: q.to_vec(),
            params: p.to_vec(),
        }
    }

    #[test]
    fn rx_generic_follows_known_template() {
        let basis = BasisGateSet::ibm();
        let g = Gate::fixed(GateKind::Rx, &[0], &[1.0]).unwrap();
        let out = decompose_gate(&g, &[], &basis).unwrap();
        let kinds: Vec<GateKind> = out.iter().map(|g| g.kind).collect();
        assert_eq!(
            kinds,
            vec![GateKind::Rz, GateKind::Sx, GateKind::Rz, GateKind::Sx, GateKind::Rz]
        );
        assert_eq!(out[0].params, vec![PI / 2.0]);
        assert!((out[2].params[0] - (1.0 + PI)).abs() < 1e-15);
        assert_eq!(out[4].params, vec![2.5 * PI]);
    }

    #[test]
    fn rx_special_angles() {
        let basis = BasisGateSet::ibm();
        let g = Gate::fixed(GateKind::Rx, &[0], &[PI / 2.0]).unwrap();
        let out = decompose_gate(&g, &[], &basis).unwrap();
        assert_eq!(out, vec![pg(GateKind::Sx, &[0], &[])]);
        let g = Gate::fixed(GateKind::Rx, &[0], &[1.5 * PI]).unwrap();
        let out = decompose_gate(&g, &[], &basis).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[1].kind, GateKind::Sx);
    }

    #[test]
    fn basis_gates_pass_through() {
        let basis = BasisGateSet::ibm();
        for (kind, q, p) in [
            (GateKind::Rz, vec![1], vec![0.7]),
            (GateKind::Cx, vec![1, 0], vec![]),
            (GateKind::Sx, vec![0], vec![]),
        ] {
            let g = Gate::fixed(kind, &q, &p).unwrap();
            assert_eq!(decompose_gate(&g, &[], &basis).unwrap(), vec![pg(kind, &q, &p)]);
        }
    }

    #[test]
    fn basis_requires_universal_family() {
        assert!(BasisGateSet::new([GateKind::Rz, GateKind::Sx]).is_err());
        assert!(BasisGateSet::parse("cx,rz,sx").is_ok());
        assert!(BasisGateSet::parse("cx,rz,foo").is_err());
        // CX cannot be synthesized without itself
        let b = BasisGateSet::ibm();
        assert!(decompose(GateKind::Cx, &[0, 1], &[], &b).is_ok());
    }

    #[test]
    fn depth_examples() {
        let mut tc = TranspiledCircuit::empty(2);
        assert_eq!(circuit_depth(&tc), 0);
        tc.gates = vec![pg(GateKind::Sx, &[0], &[]), pg(GateKind::Sx, &[1], &[])];
        assert_eq!(circuit_depth(&tc), 1);
        tc.gates = vec![pg(GateKind::Sx, &[0], &[]); 3];
        assert_eq!(circuit_depth(&tc), 3);
        tc.gates = vec![
            pg(GateKind::Sx, &[0], &[]),
            pg(GateKind::Cx, &[0, 1], &[]),
            pg(GateKind::Sx, &[1], &[]),
            pg(GateKind::Sx, &[0], &[]),
        ];
        assert_eq!(circuit_depth(&tc), 3);
    }

    #[test]
    fn table_cells_spot_check() {
        let b = BasisGateSet::ibm();
        assert_eq!(standalone_gate_depth(GateKind::Rx, &[1.5 * PI], &b).unwrap(), 3);
        assert_eq!(standalone_gate_depth(GateKind::Crx, &[2.0 * PI], &b).unwrap(), 5);
        assert_eq!(standalone_gate_depth(GateKind::Cry, &[1.234], &b).unwrap(), 10);
    }

    #[test]
    fn single_gate_circuits() {
        let b = BasisGateSet::ibm();
        let tc = transpile_gates(1, &[(GateKind::Rx, vec![0], vec![PI / 2.0])], &b).unwrap();
        assert_eq!(tc.gates.len(), 1);
        let tc = transpile_gates(1, &[(GateKind::Rx, vec![0], vec![0.0])], &b).unwrap();
        assert!(tc.gates.is_empty());
    }

    #[test]
    fn controlled_templates_are_exact() {
        let b = BasisGateSet::ibm();
        for kind in [GateKind::Crx, GateKind::Cry, GateKind::Crz, GateKind::Cu3] {
            for base in [0.0, 0.4, 1.234, PI, 2.0 * PI, 3.3, 3.0 * PI, 11.0] {
                let angles: Vec<f64> = (0..kind.arity()).map(|k| base + 0.9 * k as f64).collect();
                let tc = transpile_gates(2, &[(kind, vec![1, 0], angles.clone())], &b).unwrap();
                let want = unitary_of(
                    2,
                    std::iter::once((&gate_matrix(kind, &angles).unwrap(), &[1usize, 0][..])),
                )
                .unwrap();
                assert!(
                    tc.unitary().unwrap().max_abs_diff(&want) < 1e-10,
                    "{kind}{angles:?}"
                );
            }
        }
    }
}
