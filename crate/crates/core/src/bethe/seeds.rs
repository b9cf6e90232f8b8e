//! Small-coupling asymptotics of the Richardson equations.
//!
//! As `g -> 0` the rapidities of Fock label `k` split into `k` attached to
//! `-1` and `n - k` attached to `+1`. Writing `e = +-1 + 2 g x`, each cluster
//! satisfies the Stieltjes electrostatic condition of the generalised Laguerre
//! polynomial `L_m^(2d - 1)`, with `d = d1` at `-1` and `d = d0` at `+1`.

use super::{Pole, Rapidity};
use nalgebra::{DMatrix, SymmetricEigen};

/// Zeros of `L_m^(a)` from the Golub–Welsch Jacobi matrix, ascending.
pub fn laguerre_zeros(m: usize, a: f64) -> Vec<f64> {
    if m == 0 {
        return Vec::new();
    }
    let mut jac = DMatrix::zeros(m, m);
    for i in 0..m {
        jac[(i, i)] = 2.0 * i as f64 + a + 1.0;
        if i + 1 < m {
            let b = ((i + 1) as f64 * (i as f64 + 1.0 + a)).sqrt();
            jac[(i, i + 1)] = b;
            jac[(i + 1, i)] = b;
        }
    }
    let mut z: Vec<f64> = SymmetricEigen::new(jac)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    z.sort_by(f64::total_cmp);
    z
}

/// Leading-order rapidities of Fock label `k` at coupling `g`.
pub(crate) fn asymptotic_rapidities(n: usize, k: usize, g: f64, d0: f64, d1: f64) -> Vec<Rapidity> {
    let minus = laguerre_zeros(k, 2.0 * d1 - 1.0)
        .into_iter()
        .map(|x| Rapidity::new(Pole::Minus, 2.0 * g * x));
    let plus = laguerre_zeros(n - k, 2.0 * d0 - 1.0)
        .into_iter()
        .map(|x| Rapidity::new(Pole::Plus, 2.0 * g * x));
    minus.chain(plus).collect()
}
