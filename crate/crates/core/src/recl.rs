//! Per-gate selection of a single compression level by accuracy × depth gain.

use rayon::prelude::*;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::lut::{CompressionLUT, CompressionLevel};
use crate::training::{accuracy, Sample};
use crate::transpiler::{tcd, BasisGateSet};

/// Direction of the depth factor `τ` in `acc · τ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TauOrientation {
    /// `τ = TCD(θ) / TCD(θ')`: shallower circuits score higher.
    #[default]
    Speedup,
    /// `τ = TCD(θ') / TCD(θ)`.
    Ratio,
}

impl TauOrientation {
    pub fn factor(self, base_tcd: usize, new_tcd: usize) -> f64 {
        let (b, n) = (base_tcd.max(1) as f64, new_tcd.max(1) as f64);
        match self {
            TauOrientation::Speedup => b / n,
            TauOrientation::Ratio => n / b,
        }
    }
}

/// Accuracy, depth and metric of one parameter assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricEval {
    pub accuracy: f64,
    pub tcd: usize,
    pub metric: f64,
    /// Set when a zero depth had to be treated as 1.
    pub depth_guarded: bool,
}

/// Metric of `theta_new` measured against `theta_base`.
pub fn evaluate_metric(
    circuit: &Circuit,
    theta_base: &[f64],
    theta_new: &[f64],
    eval_data: &[Sample],
    basis: &BasisGateSet,
    orientation: TauOrientation,
) -> Result<MetricEval> {
    let base = tcd(circuit, theta_base, basis)?;
    metric_with_base(circuit, base, theta_new, eval_data, basis, orientation)
}

fn metric_with_base(
    circuit: &Circuit,
    base_tcd: usize,
    theta_new: &[f64],
    eval_data: &[Sample],
    basis: &BasisGateSet,
    orientation: TauOrientation,
) -> Result<MetricEval> {
    let acc = accuracy(circuit, theta_new, eval_data)?;
    let new_tcd = tcd(circuit, theta_new, basis)?;
    Ok(MetricEval {
        accuracy: acc,
        tcd: new_tcd,
        metric: acc * orientation.factor(base_tcd, new_tcd),
        depth_guarded: base_tcd == 0 || new_tcd == 0,
    })
}

/// `θ` with every angle of layer gate `gate_index` replaced by `level`.
pub fn substitute(circuit: &Circuit, theta: &[f64], gate_index: usize, level: &[f64]) -> Result<Vec<f64>> {
    let g = circuit
        .layers
        .get(gate_index)
        .filter(|g| g.trainable)
        .ok_or_else(|| Error::Value(format!("layer gate {gate_index} is not trainable")))?;
    if level.len() != g.kind.arity() {
        return Err(Error::Arity {
            kind: g.kind,
            expected: g.kind.arity(),
            got: level.len(),
        });
    }
    let mut out = theta.to_vec();
    for (s, &v) in g.slots().zip(level) {
        out[s] = v;
    }
    Ok(out)
}

/// `acc(W(θ^{i,k})) · τ`, where `θ^{i,k}` sets gate `gate_index` to `level`.
pub fn level_metric(
    circuit: &Circuit,
    theta: &[f64],
    gate_index: usize,
    level: &CompressionLevel,
    eval_data: &[Sample],
    basis: &BasisGateSet,
    orientation: TauOrientation,
) -> Result<f64> {
    let perturbed = substitute(circuit, theta, gate_index, &level.value)?;
    evaluate_metric(circuit, theta, &perturbed, eval_data, basis, orientation).map(|m| m.metric)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructedEntry {
    /// Index into `circuit.layers`.
    pub gate_index: usize,
    pub level: CompressionLevel,
    pub metric: f64,
}

/// One selected level per trainable gate whose kind has LUT levels.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReconstructedLUT {
    pub entries: Vec<ReconstructedEntry>,
    /// Number of evaluations where a zero depth was treated as 1.
    pub depth_guards: usize,
}

impl ReconstructedLUT {
    pub fn get(&self, gate_index: usize) -> Option<&ReconstructedEntry> {
        self.entries.iter().find(|e| e.gate_index == gate_index)
    }

    pub fn max_depth(&self) -> usize {
        self.entries.iter().map(|e| e.level.depth).max().unwrap_or(0)
    }

    /// CSV with header `gate_index,kind,level,depth,metric`.
    pub fn to_csv(&self, circuit: &Circuit) -> String {
        let mut s = String::from("gate_index,kind,level,depth,metric\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{},{},{},{},{:.6}\n",
                e.gate_index,
                circuit.layers[e.gate_index].kind,
                crate::lut::format_value(&e.level.value),
                e.level.depth,
                e.metric
            ));
        }
        s
    }
}

/// For each trainable gate, the LUT level maximising [`level_metric`], with
/// every gate perturbed alone from the original `θ`. Ties go to the earlier
/// level in LUT order (smaller depth, then smaller value). Gates whose kind is
/// missing from `lut` get no entry.
pub fn reconstruct_lut(
    circuit: &Circuit,
    theta: &[f64],
    lut: &CompressionLUT,
    eval_data: &[Sample],
    basis: &BasisGateSet,
    orientation: TauOrientation,
) -> Result<ReconstructedLUT> {
    const TIE: f64 = 1e-12;
    let base_tcd = tcd(circuit, theta, basis)?;
    let gates: Vec<usize> = circuit
        .trainable_gates()
        .into_iter()
        .filter(|&i| lut.get(circuit.layers[i].kind).is_some())
        .collect();
    let picked: Vec<(ReconstructedEntry, usize)> = gates
        .par_iter()
        .map(|&i| {
            let levels = lut.get(circuit.layers[i].kind).unwrap_or_default();
            let mut best: Option<(&CompressionLevel, f64)> = None;
            let mut guards = 0;
            for level in levels {
                let theta_ik = substitute(circuit, theta, i, &level.value)?;
                let m = metric_with_base(circuit, base_tcd, &theta_ik, eval_data, basis, orientation)?;
                guards += usize::from(m.depth_guarded);
                if best.is_none_or(|(_, b)| m.metric > b + TIE) {
                    best = Some((level, m.metric));
                }
            }
            let (level, metric) = best.ok_or_else(|| Error::Lut(format!("empty LUT entry for gate {i}")))?;
            Ok((
                ReconstructedEntry {
                    gate_index: i,
                    level: level.clone(),
                    metric,
                },
                guards,
            ))
        })
        .collect::<Result<_>>()?;
    let depth_guards = picked.iter().map(|p| p.1).sum();
    Ok(ReconstructedLUT {
        entries: picked.into_iter().map(|p| p.0).collect(),
        depth_guards,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Encoding, Gate, GateKind, MeasurementSpec};

    #[test]
    fn orientations() {
        assert_eq!(TauOrientation::Speedup.factor(10, 5), 2.0);
        assert_eq!(TauOrientation::Ratio.factor(10, 5), 0.5);
        assert_eq!(TauOrientation::Speedup.factor(4, 0), 4.0);
    }

    #[test]
    fn unchanged_level_gives_plain_accuracy() {
        let c = Circuit::new(
            1,
            Encoding::Angle,
            vec![],
            vec![Gate::trainable(GateKind::Rx, &[0], 0).unwrap()],
            MeasurementSpec::per_qubit_z(1),
        )
        .unwrap();
        let data = vec![Sample { features: vec![], label: 0 }];
        let b = BasisGateSet::default();
        let lut = CompressionLUT::for_kinds([GateKind::Rx], &b).unwrap();
        let level = lut.get(GateKind::Rx).unwrap().iter().find(|l| l.value[0] == 0.0).unwrap();
        let m = level_metric(&c, &[0.0], 0, level, &data, &b, TauOrientation::Speedup).unwrap();
        assert_eq!(m, 1.0);
        let r = reconstruct_lut(&c, &[0.0], &lut, &data, &b, TauOrientation::Speedup).unwrap();
        assert_eq!(r.entries[0].level.value, vec![0.0]);
        assert!(r.depth_guards > 0);
    }
}
