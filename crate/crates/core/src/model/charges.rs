//! Conserved charges `R0`, `R1` of the two-level rational pairing model.
//!
//! Built directly from the pair operators in the Fock basis, independently of
//! [`build_hamiltonian`](super::build_hamiltonian), so that the identity
//! `H = 2 lambda - q - 4 lambda R0 + 2 (q - 2 lambda) R1` is a genuine check.

use super::ModelParams;
use crate::error::Result;
use nalgebra::DMatrix;

/// Level parameters of the rational model: `eta0 = -eta1 = 1/2`.
const ETA0: f64 = 0.5;
const ETA1: f64 = -0.5;

#[derive(Debug, Clone)]
pub struct ConservedCharges {
    pub r0: DMatrix<f64>,
    pub r1: DMatrix<f64>,
}

impl ConservedCharges {
    /// `max |[R0, R1]|`.
    pub fn commutator_norm(&self) -> f64 {
        let c = &self.r0 * &self.r1 - &self.r1 * &self.r0;
        c.amax()
    }

    /// `max |[R0, R1]| / (max |R0| * max |R1|)`; invariant under rescaling
    /// either charge, so it measures the commutator against rounding.
    pub fn relative_commutator(&self) -> f64 {
        let scale = self.r0.amax() * self.r1.amax();
        if scale == 0.0 {
            0.0
        } else {
            self.commutator_norm() / scale
        }
    }

    /// `2 lambda - q - 4 lambda R0 + 2 (q - 2 lambda) R1`.
    pub fn hamiltonian(&self, params: &ModelParams) -> DMatrix<f64> {
        let (lambda, q) = (params.lambda(), params.q());
        let dim = self.r0.nrows();
        DMatrix::identity(dim, dim) * (2.0 * lambda - q) - &self.r0 * (4.0 * lambda)
            + &self.r1 * (2.0 * (q - 2.0 * lambda))
    }
}

/// `R_l = T_l + g [X (L+K- + L-K+) - 2 Y Lz Kz]` with
/// `X01 = Y01 = -X10 = -Y10 = 1 / (eta0 - eta1)` and `T_0 = Lz`, `T_1 = Kz`.
pub fn build_conserved_charges(params: &ModelParams) -> Result<ConservedCharges> {
    params.require_paired("build_conserved_charges")?;
    params.require_nonzero_q("build_conserved_charges")?;
    let n = params.pairs();
    let dim = n + 1;
    let g = params.g();
    let x01 = 1.0 / (ETA0 - ETA1);
    let x10 = -x01;

    // Lz = (a0†a0 + 1/2)/2 and Kz = (a-†a- + a+†a+ + 1)/2 on |k>.
    let lz: Vec<f64> = (0..dim).map(|k| (n - k) as f64 + 0.25).collect();
    let kz: Vec<f64> = (0..dim).map(|k| k as f64 + 0.5).collect();

    // <k+1| L- K+ |k>: L- = a0 a0 / 2 removes two 0-bosons, K+ = -a-† a+†
    // adds a pair, and the (-1)^k basis phases turn the product positive.
    let hop: Vec<f64> = (0..n)
        .map(|k| {
            let m = 2.0 * (n - k) as f64;
            0.5 * (m * (m - 1.0)).sqrt() * (k + 1) as f64
        })
        .collect();

    let charge = |base: &[f64], x: f64, y: f64| {
        let mut r = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            r[(k, k)] = base[k] - 2.0 * g * y * lz[k] * kz[k];
        }
        for (k, &h) in hop.iter().enumerate() {
            r[(k, k + 1)] = g * x * h;
            r[(k + 1, k)] = g * x * h;
        }
        r
    };

    Ok(ConservedCharges {
        r0: charge(&lz, x01, x01),
        r1: charge(&kz, x10, x10),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_hamiltonian;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;

    fn sorted_eigs(m: &DMatrix<f64>) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(m.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn two_boson_charges() {
        let p = ModelParams::new(2, 1.0, 2.0).unwrap();
        let c = build_conserved_charges(&p).unwrap();
        let r0 = sorted_eigs(&c.r0);
        let r1 = sorted_eigs(&c.r1);
        assert_relative_eq!(r0[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(r0[1], 0.5, epsilon = 1e-14);
        assert_relative_eq!(r1[0], 1.25, epsilon = 1e-14);
        assert_relative_eq!(r1[1], 2.75, epsilon = 1e-14);
    }

    #[test]
    fn reconstruction_at_100_bosons() {
        let p = ModelParams::new(100, 1.0, 4.0 / 3.0).unwrap();
        let c = build_conserved_charges(&p).unwrap();
        let h = build_hamiltonian(&p).unwrap().to_dense();
        let diff = (c.hamiltonian(&p) - h).amax();
        assert!(diff <= 1e-12, "reconstruction residual {diff}");
        assert!(c.relative_commutator() <= 1e-12);
    }

    #[test]
    fn rejects_zero_q() {
        let p = ModelParams::new(4, 1.0, 0.0).unwrap();
        assert!(build_conserved_charges(&p).is_err());
    }
}
