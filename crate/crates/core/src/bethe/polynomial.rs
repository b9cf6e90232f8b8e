//! Heine–Stieltjes route: the rapidities of one eigenstate are the zeros of
//! a polynomial `Q(x) = prod (x - e_a)` solving
//!
//! ```text
//! 2g (1 - x^2) Q'' - [(1 - x^2) + 4g (d0 (1 + x) - d1 (1 - x))] Q' = (n x + v) Q
//! ```
//!
//! for one of `n + 1` admissible constants `v`. The equation is linear in the
//! coefficients of `Q`, so every state is an eigenvector of a banded
//! `(n+1) x (n+1)` matrix. Used when the rapidity-space continuation stalls.

use super::continuation::{polish, Chamber};
use super::equations::Couplings;
use super::{Pole, Rapidity, SolverConfig};
use crate::error::{Result, SccError};
use nalgebra::DMatrix;

/// Operator `Q -> 2g(1-x^2)Q'' - B Q' - n x Q` in the scaled monomial basis
/// `y^j`, `x = s y`.
fn operator(n: usize, c: Couplings, s: f64) -> DMatrix<f64> {
    let (g, d0, d1) = (c.g, c.d0, c.d1);
    let a0 = 2.0 * g / (s * s);
    let a2 = -2.0 * g;
    let c0 = (1.0 + 4.0 * g * (d0 - d1)) / s;
    let c1 = 4.0 * g * (d0 + d1);
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for j in 0..=n {
        let jf = j as f64;
        if j >= 2 {
            m[(j - 2, j)] += a0 * jf * (jf - 1.0);
        }
        if j >= 1 {
            m[(j - 1, j)] -= c0 * jf;
        }
        m[(j, j)] += a2 * jf * (jf - 1.0) - c1 * jf;
        if j < n {
            m[(j + 1, j)] += s * (jf - n as f64);
        }
    }
    m
}

/// Monic eigenpolynomial for eigenvalue `v`, by back-substitution from the
/// leading coefficient (the subdiagonal `s (j - n)` never vanishes below `n`).
fn eigenpolynomial(m: &DMatrix<f64>, v: f64) -> Vec<f64> {
    let n = m.nrows() - 1;
    let mut q = vec![0.0; n + 1];
    q[n] = 1.0;
    for i in (1..=n).rev() {
        let mut acc = 0.0;
        for j in i..=n.min(i + 2) {
            let diag = if j == i { v } else { 0.0 };
            acc += (m[(i, j)] - diag) * q[j];
        }
        q[i - 1] = -acc / m[(i, i - 1)];
    }
    q
}

/// Real parts of the zeros of a monic polynomial (companion eigenvalues).
fn real_zeros(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    let mut comp = DMatrix::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -coeffs[i];
    }
    let mut z: Vec<f64> = comp.complex_eigenvalues().iter().map(|c| c.re).collect();
    z.sort_by(f64::total_cmp);
    z
}

/// Assigns zeros to poles so that the Fock label `k` of the state can be read
/// off: for `g > 0` the `-1` cluster lives in `(-1, 1)` and the `+1` cluster in
/// `(1, inf)`; for `g < 0` they live in `(-inf, -1)` and `(-1, 1)`.
fn classify(zeros: &[f64], g: f64) -> Vec<Rapidity> {
    let split = if g > 0.0 { 1.0 } else { -1.0 };
    zeros
        .iter()
        .map(|&e| {
            if e < split {
                Rapidity::new(Pole::Minus, e + 1.0)
            } else {
                Rapidity::new(Pole::Plus, e - 1.0)
            }
        })
        .collect()
}

/// Pushes rapidities strictly inside their chamber and apart from each other.
fn sanitize(rap: &mut [Rapidity], g: f64) {
    let tiny = 1e-9;
    for r in rap.iter_mut() {
        let off = &mut r.offset;
        match (r.pole, g > 0.0) {
            (Pole::Minus, true) => *off = off.clamp(tiny, 2.0 - tiny),
            (Pole::Plus, true) => *off = off.max(tiny),
            (Pole::Minus, false) => *off = off.min(-tiny),
            (Pole::Plus, false) => *off = off.clamp(-2.0 + tiny, -tiny),
        }
    }
    rap.sort_by(|a, b| a.value().total_cmp(&b.value()));
    for i in 1..rap.len() {
        if rap[i].pole == rap[i - 1].pole && rap[i].offset - rap[i - 1].offset < tiny {
            rap[i].offset = rap[i - 1].offset + tiny;
        }
    }
}

/// Van Vleck constants `v` (real parts of the operator eigenvalues).
pub fn van_vleck_constants(n: usize, g: f64, d0: f64, d1: f64) -> Vec<f64> {
    let c = Couplings { g, d0, d1 };
    let s = scale(n, g);
    let mut v: Vec<f64> = operator(n, c, s)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

fn scale(n: usize, g: f64) -> f64 {
    1.0 + 8.0 * g.abs() * n as f64
}

/// Solves Fock label `k` through the polynomial eigenproblem, then polishes
/// the extracted zeros by Newton iteration in rapidity space.
pub(crate) fn solve_state(
    n: usize,
    k: usize,
    c: Couplings,
    cfg: &SolverConfig,
) -> Result<(Vec<Rapidity>, f64)> {
    let s = scale(n, c.g);
    let m = operator(n, c, s);
    let mut best: Option<(f64, Vec<Rapidity>)> = None;
    for v in m.complex_eigenvalues().iter().map(|z| z.re) {
        let q = eigenpolynomial(&m, v);
        let zeros: Vec<f64> = real_zeros(&q).into_iter().map(|y| s * y).collect();
        let mut rap = classify(&zeros, c.g);
        let minus = rap.iter().filter(|r| r.pole == Pole::Minus).count();
        if minus != k {
            continue;
        }
        sanitize(&mut rap, c.g);
        let chamber = Chamber::of(&rap);
        match polish(rap, c, &chamber, cfg) {
            Ok((rap, res)) => return Ok((rap, res)),
            Err((res, rap)) => {
                if best.as_ref().map_or(true, |(b, _)| res < *b) {
                    best = Some((res, rap));
                }
            }
        }
    }
    Err(SccError::Convergence {
        state: k,
        residual: best.map_or(f64::INFINITY, |(r, _)| r),
        g: c.g,
        step: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_pair_polynomial_zeros() {
        // n = 1, g = 1: Q(x) = x - e with e in {0, 3}
        let c = Couplings {
            g: 1.0,
            d0: 0.25,
            d1: 0.5,
        };
        let s = scale(1, 1.0);
        let m = operator(1, c, s);
        let mut zeros: Vec<f64> = m
            .complex_eigenvalues()
            .iter()
            .map(|v| s * real_zeros(&eigenpolynomial(&m, v.re))[0])
            .collect();
        zeros.sort_by(f64::total_cmp);
        assert_relative_eq!(zeros[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(zeros[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn constants_are_real_and_distinct() {
        let v = van_vleck_constants(6, 0.7, 0.25, 0.5);
        assert_eq!(v.len(), 7);
        for w in v.windows(2) {
            assert!(w[1] - w[0] > 1e-8);
        }
    }
}
