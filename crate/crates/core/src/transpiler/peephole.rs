//! Local rewrites on a physical gate list. Every rewrite is exact up to a
//! global phase, which is accumulated on the circuit:
//!
//! - `ID` is dropped;
//! - `RZ(a)` with `a ≡ 0 (mod 2π)` is dropped (it equals `e^{−ia/2}·I`);
//! - wire-adjacent `RZ(a)`, `RZ(b)` become `RZ(a + b)`;
//! - wire-adjacent `CX(c,t)`, `CX(c,t)` cancel;
//! - `X_t · CX(c,t) · X_t` becomes `CX(c,t)` and adjacent `X · X` cancel.
//!
//! Rewrites only remove gates, so depth never increases.

use super::synth::{mod_2pi, SNAP_TOL};
use super::{PhysicalGate, TranspiledCircuit};
use crate::circuit::GateKind;

struct Work {
    slots: Vec<Option<(PhysicalGate, usize)>>,
    phase: f64,
}

impl Work {
    fn next_on(&self, from: usize, q: usize) -> Option<usize> {
        (from + 1..self.slots.len()).find(|&j| {
            self.slots[j]
                .as_ref()
                .is_some_and(|(g, _)| g.qubits.contains(&q))
        })
    }

    fn gate(&self, i: usize) -> Option<&PhysicalGate> {
        self.slots[i].as_ref().map(|(g, _)| g)
    }

    fn drop_trivial(&mut self) -> bool {
        let mut changed = false;
        for slot in &mut self.slots {
            let drop = match slot {
                Some((g, _)) if g.kind == GateKind::Id => true,
                Some((g, _)) if g.kind == GateKind::Rz && mod_2pi(g.params[0]).abs() <= SNAP_TOL => {
                    self.phase -= g.params[0] / 2.0;
                    true
                }
                _ => false,
            };
            if drop {
                *slot = None;
                changed = true;
            }
        }
        changed
    }

    fn merge_rz(&mut self) -> bool {
        let mut changed = false;
        for i in 0..self.slots.len() {
            let Some(g) = self.gate(i) else { continue };
            if g.kind != GateKind::Rz {
                continue;
            }
            let q = g.qubits[0];
            while let Some(j) = self.next_on(i, q) {
                let Some(h) = self.gate(j) else { break };
                if h.kind != GateKind::Rz {
                    break;
                }
                let b = h.params[0];
                self.slots[j] = None;
                if let Some((g, _)) = self.slots[i].as_mut() {
                    g.params[0] += b;
                }
                changed = true;
            }
        }
        changed
    }

    fn cancel_pairs(&mut self) -> bool {
        let mut changed = false;
        for i in 0..self.slots.len() {
            let Some(g) = self.gate(i).cloned() else { continue };
            match g.kind {
                GateKind::Cx => {
                    let (c, t) = (g.qubits[0], g.qubits[1]);
                    if let (Some(j), Some(k)) = (self.next_on(i, c), self.next_on(i, t)) {
                        if j == k && self.gate(j).is_some_and(|h| h.kind == GateKind::Cx && h.qubits == g.qubits) {
                            self.slots[i] = None;
                            self.slots[j] = None;
                            changed = true;
                        }
                    }
                }
                GateKind::X => {
                    let q = g.qubits[0];
                    let Some(j) = self.next_on(i, q) else { continue };
                    let h = self.gate(j).cloned();
                    match h {
                        Some(h) if h.kind == GateKind::X => {
                            self.slots[i] = None;
                            self.slots[j] = None;
                            changed = true;
                        }
                        // X on the target commutes through CX
                        Some(h) if h.kind == GateKind::Cx && h.qubits[1] == q => {
                            if let Some(k) = self.next_on(j, q) {
                                if self.gate(k).is_some_and(|x| x.kind == GateKind::X) {
                                    self.slots[i] = None;
                                    self.slots[k] = None;
                                    changed = true;
                                }
                            }
                        }
                        _ => {}
                    }
                }
                _ => {}
            }
        }
        changed
    }
}

pub fn peephole_optimize(circuit: &TranspiledCircuit) -> TranspiledCircuit {
    let mut w = Work {
        slots: circuit
            .gates
            .iter()
            .cloned()
            .zip(circuit.source_map.iter().copied().chain(std::iter::repeat(0)))
            .map(Some)
            .collect(),
        phase: circuit.global_phase,
    };
    loop {
        let mut changed = w.drop_trivial();
        changed |= w.merge_rz();
        changed |= w.cancel_pairs();
        if !changed {
            break;
        }
    }
    let (gates, source_map) = w.slots.into_iter().flatten().unzip();
    TranspiledCircuit {
        n_qubits: circuit.n_qubits,
        gates,
        source_map,
        global_phase: w.phase,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tc(gates: Vec<PhysicalGate>) -> TranspiledCircuit {
        let n = gates.len();
        TranspiledCircuit {
            n_qubits: 2,
            gates,
            source_map: (0..n).collect(),
            global_phase: 0.0,
        }
    }

    fn g(kind: GateKind, q: &[usize], p: &[f64]) -> PhysicalGate {
        PhysicalGate {
            kind,
            qubits: q.to_vec(),
            params: p.to_vec(),
        }
    }

    #[test]
    fn merges_adjacent_rz() {
        let out = peephole_optimize(&tc(vec![g(GateKind::Rz, &[0], &[0.3]), g(GateKind::Rz, &[0], &[0.4])]));
        assert_eq!(out.gates.len(), 1);
        assert!((out.gates[0].params[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn rz_on_other_wire_does_not_block_merge() {
        let out = peephole_optimize(&tc(vec![
            g(GateKind::Rz, &[0], &[0.3]),
            g(GateKind::Sx, &[1], &[]),
            g(GateKind::Rz, &[0], &[0.4]),
        ]));
        assert_eq!(out.gates.len(), 2);
    }

    #[test]
    fn drops_full_turn_rz() {
        let c = tc(vec![g(GateKind::Rz, &[0], &[2.0 * PI])]);
        let out = peephole_optimize(&c);
        assert!(out.gates.is_empty());
        assert!(out.unitary().unwrap().max_abs_diff(&c.unitary().unwrap()) < 1e-14);
    }

    #[test]
    fn cancels_cx_pairs_and_x_through_target() {
        let out = peephole_optimize(&tc(vec![g(GateKind::Cx, &[0, 1], &[]), g(GateKind::Cx, &[0, 1], &[])]));
        assert!(out.gates.is_empty());
        let out = peephole_optimize(&tc(vec![g(GateKind::Cx, &[0, 1], &[]), g(GateKind::Cx, &[1, 0], &[])]));
        assert_eq!(out.gates.len(), 2);
        let c = tc(vec![
            g(GateKind::X, &[1], &[]),
            g(GateKind::Cx, &[0, 1], &[]),
            g(GateKind::X, &[1], &[]),
        ]);
        let out = peephole_optimize(&c);
        assert_eq!(out.gates.len(), 1);
        assert!(out.unitary().unwrap().max_abs_diff(&c.unitary().unwrap()) < 1e-14);
        // X on the control does not commute through
        let out = peephole_optimize(&tc(vec![
            g(GateKind::X, &[0], &[]),
            g(GateKind::Cx, &[0, 1], &[]),
            g(GateKind::X, &[0], &[]),
        ]));
        assert_eq!(out.gates.len(), 3);
    }

    #[test]
    fn drops_identity() {
        let out = peephole_optimize(&tc(vec![g(GateKind::Id, &[0], &[]), g(GateKind::Sx, &[0], &[])]));
        assert_eq!(out.gates, vec![g(GateKind::Sx, &[0], &[])]);
        assert_eq!(out.source_map, vec![1]);
    }
}
