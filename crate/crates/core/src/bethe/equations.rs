//! Richardson equations, their Jacobian and the log-gas potential whose
//! stationary points they are.
//!
//! Divided by `4g`, the Richardson residual is `-dF/de_a` for
//!
//! ```text
//! F(e) = sum_{a<b} ln|e_a - e_b| + d0 sum ln|1 - e_a| + d1 sum ln|1 + e_a| - sum e_a / (4g)
//! ```
//!
//! `F` is strictly concave on every region bounded by the poles and the
//! collision hyperplanes, so each such region holds at most one solution.

use super::Rapidity;
use crate::error::{Result, SccError};
use nalgebra::{DMatrix, DVector};

/// Closest admissible approach to a pole or to another rapidity.
pub const POLE_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Couplings {
    pub g: f64,
    pub d0: f64,
    pub d1: f64,
}

pub(crate) fn check_poles(op: &'static str, rap: &[Rapidity]) -> Result<()> {
    for (a, ra) in rap.iter().enumerate() {
        let d = ra.one_minus().abs().min(ra.one_plus().abs());
        if !(d >= POLE_EPS) {
            return Err(SccError::Pole {
                op,
                index: a,
                distance: d,
            });
        }
        for rb in &rap[a + 1..] {
            let d = ra.minus(rb).abs();
            if !(d >= POLE_EPS) {
                return Err(SccError::Pole {
                    op,
                    index: a,
                    distance: d,
                });
            }
        }
    }
    Ok(())
}

/// `1 + 4g (d0/(1-e_a) - d1/(1+e_a)) - 4g sum_{b != a} 1/(e_a - e_b)`.
pub(crate) fn residual(rap: &[Rapidity], c: Couplings) -> Vec<f64> {
    scaled_residual(rap, c)
        .iter()
        .map(|r| 4.0 * c.g * r)
        .collect()
}

/// Residual divided by `4g`.
pub(crate) fn scaled_residual(rap: &[Rapidity], c: Couplings) -> Vec<f64> {
    let inv4g = 0.25 / c.g;
    rap.iter()
        .enumerate()
        .map(|(a, ra)| {
            let mut pair = 0.0;
            for (b, rb) in rap.iter().enumerate() {
                if a != b {
                    pair += 1.0 / ra.minus(rb);
                }
            }
            inv4g + c.d0 / ra.one_minus() - c.d1 / ra.one_plus() - pair
        })
        .collect()
}

/// Jacobian of [`scaled_residual`]; symmetric positive definite.
pub(crate) fn scaled_jacobian(rap: &[Rapidity], c: Couplings) -> DMatrix<f64> {
    let n = rap.len();
    let mut j = DMatrix::zeros(n, n);
    for a in 0..n {
        let (om, op) = (rap[a].one_minus(), rap[a].one_plus());
        let mut diag = c.d0 / (om * om) + c.d1 / (op * op);
        for b in 0..n {
            if a != b {
                let d = rap[a].minus(&rap[b]);
                let w = 1.0 / (d * d);
                diag += w;
                j[(a, b)] = -w;
            }
        }
        j[(a, a)] = diag;
    }
    j
}

pub(crate) fn potential(rap: &[Rapidity], c: Couplings) -> f64 {
    let inv4g = 0.25 / c.g;
    let mut f = 0.0;
    for (a, ra) in rap.iter().enumerate() {
        f += c.d0 * ra.one_minus().abs().ln() + c.d1 * ra.one_plus().abs().ln();
        f -= ra.value() * inv4g;
        for rb in &rap[a + 1..] {
            f += ra.minus(rb).abs().ln();
        }
    }
    f
}

/// Solves `J x = rhs` for the SPD Jacobian, falling back to LU.
pub(crate) fn solve_spd(j: DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let b = DVector::from_column_slice(rhs);
    let x = match j.clone().cholesky() {
        Some(ch) => ch.solve(&b),
        None => j.lu().solve(&b)?,
    };
    if x.iter().all(|v| v.is_finite()) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
