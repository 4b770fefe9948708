//! Parameterized logical circuits and their exact state-vector simulation.
//!
//! Qubit 0 is the least-significant bit of a basis-state index: amplitude
//! `amps[i]` belongs to the basis state whose qubit `k` is `(i >> k) & 1`.

mod matrix;
mod parse;
mod state;

use std::f64::consts::PI;
use std::fmt;

pub use matrix::{gate_matrix, Mat, C64};
pub(crate) use matrix::{ry, rz, u3};
#[cfg(test)]
pub(crate) use matrix::{sx, x};
pub use parse::{parse_circuit, reference_circuit, write_circuit};
pub use state::{apply_gate, measure_outputs, run_circuit, run_gates, StateVector};

use crate::error::{Error, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 8;

pub const FOUR_PI: f64 = 4.0 * PI;
pub const TWO_PI: f64 = 2.0 * PI;

/// Reduce an angle into `[0, 4π)`.
pub fn wrap_param(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Value(format!("non-finite angle {x}")));
    }
    Ok(wrap_unchecked(x))
}

#[inline]
pub(crate) fn wrap_unchecked(x: f64) -> f64 {
    let w = x.rem_euclid(FOUR_PI);
    // rem_euclid may round up to the modulus for tiny negative inputs
    if w >= FOUR_PI {
        0.0
    } else {
        w
    }
}

/// Signed residual `a − b` reduced onto the 4π circle, in `(−2π, 2π]`.
#[inline]
pub fn circular_residual(a: f64, b: f64) -> f64 {
    let r = (a - b).rem_euclid(FOUR_PI);
    if r > TWO_PI {
        r - FOUR_PI
    } else {
        r
    }
}

/// Distance between two angles on the 4π circle, in `[0, 2π]`.
#[inline]
pub fn circular_distance(a: f64, b: f64) -> f64 {
    circular_residual(a, b).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Crx,
    Cry,
    Crz,
    Cx,
    Sx,
    X,
    Id,
    U3,
    Cu3,
}

impl GateKind {
    pub const ALL: [GateKind; 12] = [
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Crx,
        GateKind::Cry,
        GateKind::Crz,
        GateKind::Cx,
        GateKind::Sx,
        GateKind::X,
        GateKind::Id,
        GateKind::U3,
        GateKind::Cu3,
    ];

    /// Number of angle parameters.
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cx | GateKind::Sx | GateKind::X | GateKind::Id => 0,
            GateKind::U3 | GateKind::Cu3 => 3,
            _ => 1,
        }
    }

    pub fn num_qubits(self) -> usize {
        match self {
            GateKind::Crx | GateKind::Cry | GateKind::Crz | GateKind::Cx | GateKind::Cu3 => 2,
            _ => 1,
        }
    }

    pub fn is_parameterized(self) -> bool {
        self.arity() > 0
    }

    /// Single-angle rotation kinds (generator with eigenvalues ±1/2, or the
    /// controlled version of one).
    pub fn is_rotation(self) -> bool {
        self.arity() == 1
    }

    pub fn is_controlled_rotation(self) -> bool {
        matches!(self, GateKind::Crx | GateKind::Cry | GateKind::Crz)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Crx => "CRX",
            GateKind::Cry => "CRY",
            GateKind::Crz => "CRZ",
            GateKind::Cx => "CX",
            GateKind::Sx => "SX",
            GateKind::X => "X",
            GateKind::Id => "ID",
            GateKind::U3 => "U3",
            GateKind::Cu3 => "CU3",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        let upper = s.to_ascii_uppercase();
        Self::ALL.into_iter().find(|k| k.name() == upper)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a gate angle comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamRef {
    /// Trainable slot in the [`ParameterVector`].
    Slot(usize),
    /// Fixed angle in radians.
    Const(f64),
    /// Input feature `k`, encoded as angle `π · x_k`.
    Feature(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    /// For controlled gates the first qubit is the control.
    pub qubits: Vec<usize>,
    pub params: Vec<ParamRef>,
    pub trainable: bool,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>, params: Vec<ParamRef>) -> Result<Self> {
        if params.len() != kind.arity() {
            return Err(Error::Arity {
                kind,
                expected: kind.arity(),
                got: params.len(),
            });
        }
        if qubits.len() != kind.num_qubits() {
            return Err(Error::Value(format!(
                "{kind} acts on {} qubit(s), got {}",
                kind.num_qubits(),
                qubits.len()
            )));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::Value(format!("{kind} needs two distinct qubits")));
        }
        let trainable = params.iter().any(|p| matches!(p, ParamRef::Slot(_)));
        if trainable && !params.iter().all(|p| matches!(p, ParamRef::Slot(_))) {
            return Err(Error::Value(format!(
                "{kind}: trainable gates must reference a slot for every angle"
            )));
        }
        Ok(Self {
            kind,
            qubits,
            params,
            trainable,
        })
    }

    /// Gate with constant angles.
    pub fn fixed(kind: GateKind, qubits: &[usize], angles: &[f64]) -> Result<Self> {
        Self::new(
            kind,
            qubits.to_vec(),
            angles.iter().map(|&a| ParamRef::Const(a)).collect(),
        )
    }

    /// Trainable gate whose angles occupy consecutive slots starting at `first_slot`.
    pub fn trainable(kind: GateKind, qubits: &[usize], first_slot: usize) -> Result<Self> {
        Self::new(
            kind,
            qubits.to_vec(),
            (0..kind.arity()).map(|k| ParamRef::Slot(first_slot + k)).collect(),
        )
    }

    pub fn slots(&self) -> impl Iterator<Item = usize> + '_ {
        self.params.iter().filter_map(|p| match p {
            ParamRef::Slot(s) => Some(*s),
            _ => None,
        })
    }

    /// Concrete angles for this gate.
    pub fn resolve(&self, params: &[f64], features: &[f64]) -> Result<Vec<f64>> {
        self.params
            .iter()
            .map(|p| match *p {
                ParamRef::Const(a) => Ok(a),
                ParamRef::Slot(s) => params.get(s).copied().ok_or_else(|| {
                    Error::Value(format!("parameter slot {s} out of range ({})", params.len()))
                }),
                ParamRef::Feature(k) => features.get(k).map(|x| PI * x).ok_or_else(|| {
                    Error::Encode(format!("feature {k} missing ({} given)", features.len()))
                }),
            })
            .collect()
    }
}

/// Trainable angles, kept in `[0, 4π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        values
            .into_iter()
            .map(wrap_param)
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Stores `wrap_param(value)`; non-finite values are rejected.
    pub fn set(&mut self, slot: usize, value: f64) -> Result<()> {
        self.0[slot] = wrap_param(value)?;
        Ok(())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for ParameterVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    /// Features become rotation angles of the encoder gates.
    Angle,
    /// Features, L2-normalised, become the initial state amplitudes.
    Amplitude,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Readout {
    /// Output `k` is `⟨Z⟩` on qubit `k`.
    PerQubitZ,
    /// Output `k` is the total probability of the basis states in group `k`.
    StateGrouping(Vec<Vec<usize>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSpec {
    pub n_classes: usize,
    pub readout: Readout,
}

impl MeasurementSpec {
    pub fn per_qubit_z(n_classes: usize) -> Self {
        Self {
            n_classes,
            readout: Readout::PerQubitZ,
        }
    }

    pub fn grouping(groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for g in &groups {
            for &i in g {
                if !seen.insert(i) {
                    return Err(Error::Spec(format!("basis state {i} in more than one group")));
                }
            }
        }
        Ok(Self {
            n_classes: groups.len(),
            readout: Readout::StateGrouping(groups),
        })
    }

    /// Splits the first `per_class * n_classes` basis states into contiguous
    /// groups, e.g. 15 states into three groups of five.
    pub fn contiguous_groups(n_classes: usize, per_class: usize) -> Self {
        let groups = (0..n_classes)
            .map(|c| (c * per_class..(c + 1) * per_class).collect())
            .collect();
        Self {
            n_classes,
            readout: Readout::StateGrouping(groups),
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        match &self.readout {
            Readout::PerQubitZ if self.n_classes > n_qubits => Err(Error::Spec(format!(
                "{} classes need {} qubits for Z readout, circuit has {n_qubits}",
                self.n_classes, self.n_classes
            ))),
            Readout::StateGrouping(groups) => {
                if groups.len() != self.n_classes {
                    return Err(Error::Spec(format!(
                        "{} groups for {} classes",
                        groups.len(),
                        self.n_classes
                    )));
                }
                let dim = 1usize << n_qubits;
                if let Some(bad) = groups.iter().flatten().find(|&&i| i >= dim) {
                    return Err(Error::Spec(format!("basis state {bad} >= {dim}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Encoder, trainable layers `W(θ)` and readout.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub encoding: Encoding,
    /// Data-loading gates; never trainable, never compressed.
    pub encoder: Vec<Gate>,
    pub layers: Vec<Gate>,
    pub measurement: MeasurementSpec,
}

impl Circuit {
    pub fn new(
        n_qubits: usize,
        encoding: Encoding,
        encoder: Vec<Gate>,
        layers: Vec<Gate>,
        measurement: MeasurementSpec,
    ) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Value(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        for g in encoder.iter().chain(&layers) {
            if let Some(&q) = g.qubits.iter().find(|&&q| q >= n_qubits) {
                return Err(Error::Index { index: q, n_qubits });
            }
        }
        if encoder.iter().any(|g| g.trainable) {
            return Err(Error::Value("encoder gates cannot be trainable".into()));
        }
        if encoding == Encoding::Amplitude && !encoder.is_empty() {
            return Err(Error::Value("amplitude encoding takes no encoder gates".into()));
        }
        if layers
            .iter()
            .flat_map(|g| &g.params)
            .any(|p| matches!(p, ParamRef::Feature(_)))
        {
            return Err(Error::Value("trainable layers cannot read input features".into()));
        }
        let mut slots: Vec<usize> = layers.iter().flat_map(|g| g.slots()).collect();
        slots.sort_unstable();
        if slots.iter().enumerate().any(|(i, &s)| i != s) {
            return Err(Error::Value(
                "parameter slots must be used exactly once and be numbered 0..P".into(),
            ));
        }
        measurement.validate(n_qubits)?;
        Ok(Self {
            n_qubits,
            encoding,
            encoder,
            layers,
            measurement,
        })
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|g| g.slots().count()).sum()
    }

    /// Number of input features the encoder consumes.
    pub fn n_features(&self) -> usize {
        match self.encoding {
            Encoding::Amplitude => 1 << self.n_qubits,
            Encoding::Angle => self
                .encoder
                .iter()
                .flat_map(|g| &g.params)
                .filter_map(|p| match p {
                    ParamRef::Feature(k) => Some(k + 1),
                    _ => None,
                })
                .max()
                .unwrap_or(0),
        }
    }

    /// Indices into `layers` of the trainable gates, in circuit order. This is
    /// the gate set `G` that compression operates on.
    pub fn trainable_gates(&self) -> Vec<usize> {
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, g)| g.trainable)
            .map(|(i, _)| i)
            .collect()
    }

    /// Copy of the circuit with every layer angle frozen to its current value.
    pub fn bind(&self, params: &[f64]) -> Result<Vec<Gate>> {
        self.layers
            .iter()
            .map(|g| Gate::fixed(g.kind, &g.qubits, &g.resolve(params, &[])?))
            .collect()
    }
}
