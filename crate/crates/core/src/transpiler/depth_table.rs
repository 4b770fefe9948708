use std::f64::consts::PI;
use std::fmt;

use super::{standalone_gate_depth, BasisGateSet};
use crate::circuit::GateKind;
use crate::error::{Error, Result};

/// Angle used for the "others" column. Any value off the π/2 grid works.
pub const GENERIC_ANGLE: f64 = 1.234;
/// Generic Euler triple for U3/CU3.
pub const GENERIC_U3: [f64; 3] = [1.234, 0.567, 2.345];

/// Columns of the depth table: nine special angles plus a generic one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamClass {
    Zero,
    Pi,
    TwoPi,
    ThreePi,
    FourPi,
    HalfPi,
    ThreeHalfPi,
    FiveHalfPi,
    SevenHalfPi,
    Others,
}

impl ParamClass {
    pub const ALL: [ParamClass; 10] = [
        ParamClass::Zero,
        ParamClass::Pi,
        ParamClass::TwoPi,
        ParamClass::ThreePi,
        ParamClass::FourPi,
        ParamClass::HalfPi,
        ParamClass::ThreeHalfPi,
        ParamClass::FiveHalfPi,
        ParamClass::SevenHalfPi,
        ParamClass::Others,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ParamClass::Zero => "0",
            ParamClass::Pi => "pi",
            ParamClass::TwoPi => "2pi",
            ParamClass::ThreePi => "3pi",
            ParamClass::FourPi => "4pi",
            ParamClass::HalfPi => "pi/2",
            ParamClass::ThreeHalfPi => "3pi/2",
            ParamClass::FiveHalfPi => "5pi/2",
            ParamClass::SevenHalfPi => "7pi/2",
            ParamClass::Others => "others",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.label() == s)
    }

    /// Angle tuple for a gate of `kind`. Three-angle gates use the class value
    /// for every Euler angle; "others" uses [`GENERIC_U3`].
    pub fn angles(self, kind: GateKind) -> Vec<f64> {
        let a = match self {
            ParamClass::Zero => 0.0,
            ParamClass::Pi => PI,
            ParamClass::TwoPi => 2.0 * PI,
            ParamClass::ThreePi => 3.0 * PI,
            ParamClass::FourPi => 4.0 * PI,
            ParamClass::HalfPi => 0.5 * PI,
            ParamClass::ThreeHalfPi => 1.5 * PI,
            ParamClass::FiveHalfPi => 2.5 * PI,
            ParamClass::SevenHalfPi => 3.5 * PI,
            ParamClass::Others => GENERIC_ANGLE,
        };
        match (kind.arity(), self) {
            (3, ParamClass::Others) => GENERIC_U3.to_vec(),
            (n, _) => vec![a; n],
        }
    }
}

impl fmt::Display for ParamClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthRow {
    pub kind: GateKind,
    pub class: ParamClass,
    pub depth: usize,
}

/// Standalone compiled depth per (gate kind, parameter class).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthTable {
    pub rows: Vec<DepthRow>,
}

impl DepthTable {
    pub const KINDS: [GateKind; 8] = [
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Crx,
        GateKind::Cry,
        GateKind::Crz,
        GateKind::U3,
        GateKind::Cu3,
    ];

    pub fn build(basis: &BasisGateSet) -> Result<Self> {
        let mut rows = Vec::with_capacity(Self::KINDS.len() * ParamClass::ALL.len());
        for kind in Self::KINDS {
            for class in ParamClass::ALL {
                rows.push(DepthRow {
                    kind,
                    class,
                    depth: standalone_gate_depth(kind, &class.angles(kind), basis)?,
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn get(&self, kind: GateKind, class: ParamClass) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.kind == kind && r.class == class)
            .map(|r| r.depth)
    }

    /// CSV with header `gate,param_class,depth`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("gate,param_class,depth\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{}\n", r.kind, r.class, r.depth));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = |m: &str| Error::parse(i + 1, m.to_string());
            if f.len() != 3 {
                return Err(bad("expected gate,param_class,depth"));
            }
            rows.push(DepthRow {
                kind: GateKind::from_name(f[0]).ok_or_else(|| bad("unknown gate"))?,
                class: ParamClass::from_label(f[1]).ok_or_else(|| bad("unknown param class"))?,
                depth: f[2].parse().map_err(|_| bad("depth is not an integer"))?,
            });
        }
        Ok(Self { rows })
    }
}
