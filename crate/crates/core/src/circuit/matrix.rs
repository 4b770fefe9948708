//! Small dense complex matrices and the logical gate set.
//!
//! Two-qubit matrices are written in the gate-local basis `|q_first q_second⟩`,
//! i.e. local index `2 * b_first + b_second`. For controlled gates the first
//! listed qubit is the control, so every controlled matrix is
//! `diag(I, U)` in block form.

use num_complex::Complex64;

use super::{wrap_param, GateKind};
use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    dim: usize,
    data: Vec<C64>,
}

impl Mat {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `data.len()` is not a perfect square.
    pub fn from_row_major(data: Vec<C64>) -> Self {
        let dim = (data.len() as f64).sqrt().round() as usize;
        assert_eq!(dim * dim, data.len(), "matrix data must be square");
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Mat::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Mat {
        let n = self.dim;
        let mut out = Mat::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Mat {
        Mat {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.mul(&self.adjoint()).max_abs_diff(&Mat::identity(self.dim)) <= tol
    }

    /// Returns `c` when `self = c · I` with `|c| = 1` within `tol`.
    pub fn identity_phase(&self, tol: f64) -> Option<C64> {
        let c = self.get(0, 0);
        if (c.norm() - 1.0).abs() > tol {
            return None;
        }
        let scaled = Mat::identity(self.dim).scale(c);
        (self.max_abs_diff(&scaled) <= tol).then_some(c)
    }

    /// Phase `φ` minimising `‖self − e^{iφ}·other‖`, i.e. `arg tr(other† self)`.
    pub fn relative_phase(&self, other: &Mat) -> f64 {
        let tr: C64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| b.conj() * a)
            .sum();
        tr.arg()
    }

    /// Max elementwise error between `self` and `other` after removing the best
    /// global phase.
    pub fn phase_distance(&self, other: &Mat) -> f64 {
        let phi = self.relative_phase(other);
        self.max_abs_diff(&other.scale(C64::from_polar(1.0, phi)))
    }
}

fn m2(a: C64, b: C64, c: C64, d: C64) -> Mat {
    Mat::from_row_major(vec![a, b, c, d])
}

fn controlled(u: &Mat) -> Mat {
    let mut m = Mat::identity(4);
    for r in 0..2 {
        for c in 0..2 {
            m.set(2 + r, 2 + c, u.get(r, c));
        }
    }
    m
}

pub(crate) fn rx(theta: f64) -> Mat {
    let (s, c) = (theta / 2.0).sin_cos();
    m2(C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0))
}

pub(crate) fn ry(theta: f64) -> Mat {
    let (s, c) = (theta / 2.0).sin_cos();
    m2(C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0))
}

pub(crate) fn rz(theta: f64) -> Mat {
    m2(
        C64::from_polar(1.0, -theta / 2.0),
        ZERO,
        ZERO,
        C64::from_polar(1.0, theta / 2.0),
    )
}

pub(crate) fn u3(theta: f64, phi: f64, lambda: f64) -> Mat {
    let (s, c) = (theta / 2.0).sin_cos();
    m2(
        C64::new(c, 0.0),
        -C64::from_polar(s, lambda),
        C64::from_polar(s, phi),
        C64::from_polar(c, phi + lambda),
    )
}

pub(crate) fn sx() -> Mat {
    let p = C64::new(0.5, 0.5);
    let m = C64::new(0.5, -0.5);
    m2(p, m, m, p)
}

pub(crate) fn x() -> Mat {
    m2(ZERO, ONE, ONE, ZERO)
}

/// Unitary of a logical gate. Angles are reduced with [`wrap_param`] first so
/// that `gate_matrix(k, [x])` and `gate_matrix(k, [wrap_param(x)])` agree bit
/// for bit.
pub fn gate_matrix(kind: GateKind, params: &[f64]) -> Result<Mat> {
    if params.len() != kind.arity() {
        return Err(Error::Arity {
            kind,
            expected: kind.arity(),
            got: params.len(),
        });
    }
    let a: Vec<f64> = params
        .iter()
        .map(|&p| wrap_param(p))
        .collect::<Result<_>>()?;
    Ok(match kind {
        GateKind::Rx => rx(a[0]),
        GateKind::Ry => ry(a[0]),
        GateKind::Rz => rz(a[0]),
        GateKind::Crx => controlled(&rx(a[0])),
        GateKind::Cry => controlled(&ry(a[0])),
        GateKind::Crz => controlled(&rz(a[0])),
        GateKind::U3 => u3(a[0], a[1], a[2]),
        GateKind::Cu3 => controlled(&u3(a[0], a[1], a[2])),
        GateKind::Sx => sx(),
        GateKind::X => x(),
        GateKind::Id => Mat::identity(2),
        GateKind::Cx => controlled(&x()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rx_special_values() {
        let m = gate_matrix(GateKind::Rx, &[0.0]).unwrap();
        assert!(m.max_abs_diff(&Mat::identity(2)) < 1e-15);

        let m = gate_matrix(GateKind::Rx, &[PI]).unwrap();
        let want = m2(ZERO, C64::new(0.0, -1.0), C64::new(0.0, -1.0), ZERO);
        assert!(m.max_abs_diff(&want) < 1e-15);

        let m = gate_matrix(GateKind::Rx, &[2.0 * PI]).unwrap();
        assert!(m.max_abs_diff(&Mat::identity(2).scale(-ONE)) < 1e-15);
    }

    #[test]
    fn crx_two_pi_is_not_global_phase() {
        let m = gate_matrix(GateKind::Crx, &[2.0 * PI]).unwrap();
        assert!(m.identity_phase(1e-10).is_none());
        assert!((m.get(0, 0) - ONE).norm() < 1e-15);
        assert!((m.get(3, 3) + ONE).norm() < 1e-15);
    }

    #[test]
    fn all_kinds_unitary() {
        for kind in GateKind::ALL {
            let params: Vec<f64> = (0..kind.arity()).map(|i| 0.37 + 1.1 * i as f64).collect();
            let m = gate_matrix(kind, &params).unwrap();
            assert!(m.is_unitary(1e-12), "{kind}");
        }
    }

    #[test]
    fn arity_is_checked() {
        assert!(matches!(
            gate_matrix(GateKind::Rx, &[]),
            Err(Error::Arity { expected: 1, got: 0, .. })
        ));
        assert!(gate_matrix(GateKind::Cx, &[0.1]).is_err());
        assert!(gate_matrix(GateKind::U3, &[0.1]).is_err());
    }

    #[test]
    fn wrap_identity_is_exact() {
        for x in [-7.3, -PI, 0.2, 13.0, 40.0] {
            for kind in [GateKind::Rx, GateKind::Cry, GateKind::Rz] {
                let a = gate_matrix(kind, &[x]).unwrap();
                let b = gate_matrix(kind, &[wrap_param(x).unwrap()]).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn sx_squares_to_x() {
        assert!(sx().mul(&sx()).max_abs_diff(&x()) < 1e-15);
    }
}
