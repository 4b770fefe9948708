//! Compression levels: parameter values at which a gate either vanishes
//! (matrix `c·I`) or compiles to fewer physical layers than a generic angle.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::circuit::{circular_distance, gate_matrix, wrap_param, Circuit, GateKind};
use crate::error::{Error, Result};
use crate::transpiler::{standalone_gate_depth, BasisGateSet, ParamClass};

/// Tolerance for recognising `c·I`.
pub const PRUNE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LevelTag {
    Prune,
    Quantize,
}

impl LevelTag {
    pub fn name(self) -> &'static str {
        match self {
            LevelTag::Prune => "prune",
            LevelTag::Quantize => "quantize",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "prune" => Some(LevelTag::Prune),
            "quantize" => Some(LevelTag::Quantize),
            _ => None,
        }
    }
}

impl fmt::Display for LevelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressionLevel {
    /// One angle per gate parameter, each in `[0, 4π)`.
    pub value: Vec<f64>,
    pub tag: LevelTag,
    pub depth: usize,
}

impl CompressionLevel {
    fn order_key(&self, other: &Self) -> std::cmp::Ordering {
        self.depth.cmp(&other.depth).then_with(|| cmp_values(&self.value, &other.value))
    }

    /// Euclidean distance over per-angle circular distances.
    pub fn distance_to(&self, theta: &[f64]) -> f64 {
        self.value
            .iter()
            .zip(theta)
            .map(|(&v, &t)| circular_distance(v, t).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

fn cmp_values(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

/// Multiples of π/2 in `[0, 4π)`.
pub fn half_pi_grid() -> Vec<f64> {
    (0..8).map(|k| k as f64 * FRAC_PI_2).collect()
}

/// Default candidate tuples: the π/2 grid per angle, as a full product for
/// three-angle gates.
pub fn default_candidates(kind: GateKind) -> Vec<Vec<f64>> {
    let grid = half_pi_grid();
    match kind.arity() {
        0 => Vec::new(),
        1 => grid.into_iter().map(|a| vec![a]).collect(),
        n => {
            let mut out: Vec<Vec<f64>> = vec![Vec::new()];
            for _ in 0..n {
                out = out
                    .into_iter()
                    .flat_map(|prefix| {
                        grid.iter().map(move |&a| {
                            let mut p = prefix.clone();
                            p.push(a);
                            p
                        })
                    })
                    .collect();
            }
            out
        }
    }
}

/// Canonical `[0, 4π)` representatives, de-duplicated.
fn canonical(candidates: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(candidates.len());
    for c in candidates {
        let w: Vec<f64> = c.iter().map(|&a| wrap_param(a)).collect::<Result<_>>()?;
        // values within 1e-9 of 4π fold onto 0
        let w: Vec<f64> = w
            .into_iter()
            .map(|a| if circular_distance(a, 0.0) < 1e-9 { 0.0 } else { a })
            .collect();
        if !out.iter().any(|o| o.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-12)) {
            out.push(w);
        }
    }
    Ok(out)
}

fn is_prunable(kind: GateKind, value: &[f64]) -> Result<bool> {
    Ok(gate_matrix(kind, value)?.identity_phase(PRUNE_TOL).is_some())
}

/// Depth of `kind` at a generic (off-grid) angle.
pub fn generic_depth(kind: GateKind, basis: &BasisGateSet) -> Result<usize> {
    standalone_gate_depth(kind, &ParamClass::Others.angles(kind), basis)
}

/// Candidates whose whole gate matrix is `c·I` with `|c| = 1`.
pub fn find_pruning_levels(
    kind: GateKind,
    candidates: &[Vec<f64>],
    basis: &BasisGateSet,
) -> Result<Vec<CompressionLevel>> {
    let mut out = Vec::new();
    for value in canonical(candidates)? {
        if is_prunable(kind, &value)? {
            let depth = standalone_gate_depth(kind, &value, basis)?;
            out.push(CompressionLevel {
                value,
                tag: LevelTag::Prune,
                depth,
            });
        }
    }
    out.sort_by(|a, b| a.order_key(b));
    Ok(out)
}

/// Non-prunable candidates whose compiled depth is strictly below the
/// generic-angle depth.
pub fn find_quantization_levels(
    kind: GateKind,
    basis: &BasisGateSet,
    candidates: &[Vec<f64>],
) -> Result<Vec<CompressionLevel>> {
    let generic = generic_depth(kind, basis)?;
    let mut out = Vec::new();
    for value in canonical(candidates)? {
        if is_prunable(kind, &value)? {
            continue;
        }
        let depth = standalone_gate_depth(kind, &value, basis)?;
        if depth < generic {
            out.push(CompressionLevel {
                value,
                tag: LevelTag::Quantize,
                depth,
            });
        }
    }
    out.sort_by(|a, b| a.order_key(b));
    Ok(out)
}

/// Per-gate-kind compression levels, sorted by depth then value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CompressionLUT {
    entries: BTreeMap<GateKind, Vec<CompressionLevel>>,
}

impl CompressionLUT {
    /// LUT for the given kinds over the default π/2 candidate grid.
    pub fn for_kinds(kinds: impl IntoIterator<Item = GateKind>, basis: &BasisGateSet) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for kind in kinds {
            if !kind.is_parameterized() || entries.contains_key(&kind) {
                continue;
            }
            let cands = default_candidates(kind);
            let mut levels = find_pruning_levels(kind, &cands, basis)?;
            levels.extend(find_quantization_levels(kind, basis, &cands)?);
            levels.sort_by(|a, b| a.order_key(b));
            if levels.is_empty() {
                return Err(Error::Lut(format!("no compression level found for {kind}")));
            }
            entries.insert(kind, levels);
        }
        Ok(Self { entries })
    }

    pub fn get(&self, kind: GateKind) -> Option<&[CompressionLevel]> {
        self.entries.get(&kind).map(Vec::as_slice)
    }

    pub fn kinds(&self) -> impl Iterator<Item = GateKind> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GateKind, &[CompressionLevel])> + '_ {
        self.entries.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    /// Copy holding only levels with `tag`; kinds left without levels are dropped.
    pub fn filtered(&self, tag: LevelTag) -> Self {
        let entries = self
            .entries
            .iter()
            .filter_map(|(k, v)| {
                let kept: Vec<_> = v.iter().filter(|l| l.tag == tag).cloned().collect();
                (!kept.is_empty()).then_some((*k, kept))
            })
            .collect();
        Self { entries }
    }

    /// CSV with header `gate,value,tag,depth`; multi-angle values are `;`-joined.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("gate,value,tag,depth\n");
        for (kind, levels) in &self.entries {
            for l in levels {
                s.push_str(&format!("{kind},{},{},{}\n", format_value(&l.value), l.tag, l.depth));
            }
        }
        s
    }
}

pub(crate) fn format_value(v: &[f64]) -> String {
    v.iter().map(|a| format!("{a:.12}")).collect::<Vec<_>>().join(";")
}

/// LUT covering every trainable gate kind used in `circuit`.
pub fn build_lut(circuit: &Circuit, basis: &BasisGateSet) -> Result<CompressionLUT> {
    CompressionLUT::for_kinds(circuit.layers.iter().filter(|g| g.trainable).map(|g| g.kind), basis)
}

/// Level closest to `theta` on the 4π circle. Ties go to the smaller depth,
/// then the smaller value.
pub fn nearest_level<'a>(entry: &'a [CompressionLevel], theta: &[f64]) -> Result<&'a CompressionLevel> {
    const TIE: f64 = 1e-12;
    let mut best: Option<(&CompressionLevel, f64)> = None;
    for l in entry {
        let d = l.distance_to(theta);
        best = match best {
            None => Some((l, d)),
            Some((b, bd)) => {
                let better = d < bd - TIE || ((d - bd).abs() <= TIE && l.order_key(b).is_lt());
                Some(if better { (l, d) } else { (b, bd) })
            }
        };
    }
    best.map(|(l, _)| l)
        .ok_or_else(|| Error::Lut("nearest level requested from an empty entry".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn values(levels: &[CompressionLevel]) -> Vec<f64> {
        levels.iter().map(|l| l.value[0]).collect()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn pruning_levels_single_angle() {
        let b = BasisGateSet::default();
        for (kind, want) in [
            (GateKind::Rx, vec![0.0, 2.0 * PI]),
            (GateKind::Ry, vec![0.0, 2.0 * PI]),
            (GateKind::Rz, vec![0.0, 2.0 * PI]),
            (GateKind::Crx, vec![0.0]),
            (GateKind::Cry, vec![0.0]),
            (GateKind::Crz, vec![0.0]),
        ] {
            let got = find_pruning_levels(kind, &default_candidates(kind), &b).unwrap();
            assert!(close(&values(&got), &want), "{kind}: {got:?}");
            assert!(got.iter().all(|l| l.depth == 0));
        }
    }

    #[test]
    fn four_pi_folds_onto_zero() {
        let b = BasisGateSet::default();
        let got = find_pruning_levels(GateKind::Crx, &[vec![0.0], vec![4.0 * PI]], &b).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].value, vec![0.0]);
    }

    #[test]
    fn quantization_levels() {
        let b = BasisGateSet::default();
        let rx = find_quantization_levels(GateKind::Rx, &b, &default_candidates(GateKind::Rx)).unwrap();
        let depth_at = |levels: &[CompressionLevel], v: f64| {
            levels.iter().find(|l| (l.value[0] - v).abs() < 1e-12).map(|l| l.depth)
        };
        assert_eq!(depth_at(&rx, FRAC_PI_2), Some(1));
        assert_eq!(depth_at(&rx, PI), Some(1));
        assert_eq!(depth_at(&rx, 1.5 * PI), Some(3));
        let crx = find_quantization_levels(GateKind::Crx, &b, &default_candidates(GateKind::Crx)).unwrap();
        assert_eq!(depth_at(&crx, 2.0 * PI), Some(5));
        assert_eq!(depth_at(&crx, PI), Some(8));
        assert!(find_quantization_levels(GateKind::Rz, &b, &default_candidates(GateKind::Rz))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn lut_is_sorted_and_keyed_by_used_kinds() {
        let c = crate::circuit::reference_circuit("syn4").unwrap();
        let lut = build_lut(&c, &BasisGateSet::default()).unwrap();
        let kinds: Vec<_> = lut.kinds().collect();
        assert_eq!(
            kinds,
            vec![GateKind::Rx, GateKind::Ry, GateKind::Rz, GateKind::Crx, GateKind::Cry, GateKind::Crz]
        );
        for (_, levels) in lut.iter() {
            assert!(levels.windows(2).all(|w| w[0].order_key(&w[1]).is_lt()));
        }
        let rx = lut.get(GateKind::Rx).unwrap();
        for (v, d) in [(0.0, 0), (FRAC_PI_2, 1), (PI, 1), (1.5 * PI, 3), (2.0 * PI, 0)] {
            assert!(rx.iter().any(|l| (l.value[0] - v).abs() < 1e-12 && l.depth == d));
        }
        assert!(lut.get(GateKind::Rz).unwrap().iter().all(|l| l.tag == LevelTag::Prune));
    }

    #[test]
    fn u3_levels_are_consistent() {
        let b = BasisGateSet::default();
        let lut = CompressionLUT::for_kinds([GateKind::U3], &b).unwrap();
        let levels = lut.get(GateKind::U3).unwrap();
        assert!(levels.iter().any(|l| l.tag == LevelTag::Prune));
        for l in levels {
            assert_eq!(standalone_gate_depth(GateKind::U3, &l.value, &b).unwrap(), l.depth);
            assert!(l.depth < 5);
        }
    }

    #[test]
    fn nearest_level_examples() {
        let lut = CompressionLUT::for_kinds([GateKind::Rx], &BasisGateSet::default()).unwrap();
        let rx = lut.get(GateKind::Rx).unwrap();
        assert_eq!(nearest_level(rx, &[0.1]).unwrap().value, vec![0.0]);
        assert_eq!(nearest_level(rx, &[3.9 * PI]).unwrap().value, vec![0.0]);
        // π (depth 1) vs 3π/2 (depth 3)
        assert_eq!(nearest_level(rx, &[1.25 * PI]).unwrap().value, vec![PI]);
        // π/2 vs π, equal depth: smaller value
        assert_eq!(nearest_level(rx, &[0.75 * PI]).unwrap().value, vec![FRAC_PI_2]);
        assert!(nearest_level(&[], &[0.0]).is_err());
    }

    #[test]
    fn filtered_lut() {
        let c = crate::circuit::reference_circuit("syn4").unwrap();
        let lut = build_lut(&c, &BasisGateSet::default()).unwrap();
        let q = lut.filtered(LevelTag::Quantize);
        assert!(q.get(GateKind::Rz).is_none());
        assert!(q.get(GateKind::Rx).is_some());
        let p = lut.filtered(LevelTag::Prune);
        assert!(close(&values(p.get(GateKind::Rz).unwrap()), &[0.0, 2.0 * PI]));
    }
}
