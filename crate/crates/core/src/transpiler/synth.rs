//! Gate decomposition into `{RZ, SX, X}` + `CX`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::circuit::{ry, rz, u3, Mat, C64, TWO_PI};

/// Snap tolerance for special angles.
pub(crate) const SNAP_TOL: f64 = 1e-9;

/// One step of a synthesized single-qubit sequence, in application order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Step1q {
    Rz(f64),
    Sx,
    X,
}

#[cfg(test)]
impl Step1q {
    pub(crate) fn matrix(self) -> Mat {
        match self {
            Step1q::Rz(a) => rz(a),
            Step1q::Sx => crate::circuit::sx(),
            Step1q::X => crate::circuit::x(),
        }
    }
}

/// `(angle + π) mod 2π − π`, in `[−π, π)`.
pub(crate) fn mod_2pi(a: f64) -> f64 {
    (a + PI).rem_euclid(TWO_PI) - PI
}

/// Snaps `a` onto the nearest multiple of π/2 when within [`SNAP_TOL`].
pub(crate) fn snap_half_pi(a: f64) -> f64 {
    let k = (a / FRAC_PI_2).round();
    if (a - k * FRAC_PI_2).abs() <= SNAP_TOL {
        k * FRAC_PI_2
    } else {
        a
    }
}

pub(crate) fn is_half_pi_multiple(a: f64) -> bool {
    let k = (a / FRAC_PI_2).round();
    (a - k * FRAC_PI_2).abs() <= SNAP_TOL
}

/// ZYZ Euler angles `(θ, φ, λ)` with `θ ∈ [0, π]` such that
/// `U ∝ RZ(φ)·RY(θ)·RZ(λ)`.
pub(crate) fn euler_zyz(u: &Mat) -> (f64, f64, f64) {
    let det = u.get(0, 0) * u.get(1, 1) - u.get(0, 1) * u.get(1, 0);
    let coeff = C64::from_polar(1.0, -det.arg() / 2.0);
    let su10 = coeff * u.get(1, 0);
    let su00 = coeff * u.get(0, 0);
    let su11 = coeff * u.get(1, 1);
    let theta = 2.0 * su10.norm().atan2(su00.norm());
    let sum_half = su11.arg();
    let diff_half = su10.arg();
    (theta, sum_half + diff_half, sum_half - diff_half)
}

/// Single-qubit synthesis over RZ/SX (and X when available), choosing the
/// shortest sequence at special Euler angles: no SX when `θ = 0`, one SX when
/// `θ = π/2`, one X when the middle rotation is a π flip, two SX otherwise.
/// RZ steps whose angle is a multiple of 2π are dropped.
pub(crate) fn synth_1q(u: &Mat, has_x: bool) -> Vec<Step1q> {
    let (mut theta, mut phi, mut lam) = euler_zyz(u);
    let mut out = Vec::with_capacity(5);
    let push_rz = |out: &mut Vec<Step1q>, a: f64| {
        if mod_2pi(a).abs() > SNAP_TOL {
            out.push(Step1q::Rz(a));
        }
    };

    if theta.abs() < SNAP_TOL {
        push_rz(&mut out, lam + phi);
        return out;
    }
    if (theta - FRAC_PI_2).abs() < SNAP_TOL {
        push_rz(&mut out, lam - FRAC_PI_2);
        out.push(Step1q::Sx);
        push_rz(&mut out, phi + FRAC_PI_2);
        return out;
    }
    if (theta - PI).abs() < SNAP_TOL {
        phi -= lam;
        lam = 0.0;
    }
    if mod_2pi(lam + PI).abs() < SNAP_TOL || mod_2pi(phi).abs() < SNAP_TOL {
        lam += PI;
        theta = -theta;
        phi += PI;
    }
    // RZ(φ)·RY(θ)·RZ(λ) = RZ(φ+π)·SX·RZ(θ+π)·SX·RZ(λ) up to phase
    theta += PI;
    phi += PI;
    push_rz(&mut out, lam);
    if has_x && mod_2pi(theta).abs() < SNAP_TOL {
        out.push(Step1q::X);
    } else {
        out.push(Step1q::Sx);
        push_rz(&mut out, theta);
        out.push(Step1q::Sx);
    }
    push_rz(&mut out, phi);
    out
}

/// A gate-local template for controlled rotations: single-qubit blocks on the
/// control (role 0) or target (role 1), separated by CX(control, target).
pub(crate) enum TemplateStep {
    OneQ { role: usize, matrix: Mat },
    Cx,
}

fn u1(a: f64) -> Mat {
    Mat::from_row_major(vec![
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::from_polar(1.0, a),
    ])
}

pub(crate) fn crx_template(theta: f64) -> Vec<TemplateStep> {
    use TemplateStep::*;
    vec![
        OneQ { role: 1, matrix: u1(FRAC_PI_2) },
        Cx,
        OneQ { role: 1, matrix: u3(-theta / 2.0, 0.0, 0.0) },
        Cx,
        OneQ { role: 1, matrix: u3(theta / 2.0, -FRAC_PI_2, 0.0) },
    ]
}

pub(crate) fn cry_template(theta: f64) -> Vec<TemplateStep> {
    use TemplateStep::*;
    vec![
        OneQ { role: 1, matrix: ry(theta / 2.0) },
        Cx,
        OneQ { role: 1, matrix: ry(-theta / 2.0) },
        Cx,
    ]
}

pub(crate) fn crz_template(theta: f64) -> Vec<TemplateStep> {
    use TemplateStep::*;
    vec![
        OneQ { role: 1, matrix: rz(theta / 2.0) },
        Cx,
        OneQ { role: 1, matrix: rz(-theta / 2.0) },
        Cx,
    ]
}

pub(crate) fn cu3_template(theta: f64, phi: f64, lam: f64) -> Vec<TemplateStep> {
    use TemplateStep::*;
    vec![
        OneQ { role: 0, matrix: u1((lam + phi) / 2.0) },
        OneQ { role: 1, matrix: u1((lam - phi) / 2.0) },
        Cx,
        OneQ { role: 1, matrix: u3(-theta / 2.0, 0.0, -(phi + lam) / 2.0) },
        Cx,
        OneQ { role: 1, matrix: u3(theta / 2.0, phi, 0.0) },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gate_matrix, GateKind};

    fn product(steps: &[Step1q]) -> Mat {
        steps
            .iter()
            .fold(Mat::identity(2), |acc, s| s.matrix().mul(&acc))
    }

    #[test]
    fn synthesis_is_exact_up_to_phase() {
        let mut angles = vec![0.0, 0.3, 1.234, 2.9, 4.0, 5.5, 7.0, 11.0, 12.5];
        angles.extend((0..8).map(|k| k as f64 * FRAC_PI_2));
        for &a in &angles {
            for kind in [GateKind::Rx, GateKind::Ry, GateKind::Rz] {
                let u = gate_matrix(kind, &[a]).unwrap();
                for has_x in [true, false] {
                    let steps = synth_1q(&u, has_x);
                    assert!(
                        product(&steps).phase_distance(&u) < 1e-10,
                        "{kind}({a}) x={has_x}: {steps:?}"
                    );
                }
            }
            let u = gate_matrix(GateKind::U3, &[a, 0.7 * a + 0.1, 1.9 - a]).unwrap();
            assert!(product(&synth_1q(&u, true)).phase_distance(&u) < 1e-10);
        }
    }

    #[test]
    fn rx_three_half_pi_matches_known_sequence() {
        let u = gate_matrix(GateKind::Rx, &[1.5 * PI]).unwrap();
        let steps = synth_1q(&u, true);
        assert_eq!(steps.len(), 3);
        assert_eq!(steps[1], Step1q::Sx);
        for s in [steps[0], steps[2]] {
            match s {
                Step1q::Rz(a) => assert!((mod_2pi(a).abs() - PI).abs() < 1e-12),
                other => panic!("expected RZ, got {other:?}"),
            }
        }
    }

    #[test]
    fn snapping() {
        assert_eq!(snap_half_pi(PI + 1e-12), PI);
        assert_eq!(snap_half_pi(1.0), 1.0);
        assert!(is_half_pi_multiple(3.0 * FRAC_PI_2 - 5e-10));
        assert!(!is_half_pi_multiple(1.234));
    }
}
