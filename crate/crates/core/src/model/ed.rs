//! Exact diagonalisation of the sector matrix. Serves as the independent
//! oracle for the Bethe Ansatz pipeline.

use super::SectorMatrix;
use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Debug, Clone)]
pub struct ExactSpectrum {
    /// Ascending eigenvalues.
    pub energies: Vec<f64>,
    /// Column `s` is the unit eigenvector belonging to `energies[s]`.
    pub vectors: DMatrix<f64>,
}

impl ExactSpectrum {
    pub fn vector(&self, s: usize) -> Vec<f64> {
        self.vectors.column(s).iter().copied().collect()
    }

    /// `max |V^T V - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let dim = self.energies.len();
        let gram = self.vectors.transpose() * &self.vectors;
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }
}

pub fn exact_spectrum(matrix: &SectorMatrix) -> ExactSpectrum {
    let eig = SymmetricEigen::new(matrix.to_dense());
    let mut order: Vec<usize> = (0..matrix.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(matrix.dim(), matrix.dim(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    ExactSpectrum { energies, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, ModelParams};
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two() {
        let h = build_hamiltonian(&ModelParams::new(2, 1.0, 2.0).unwrap()).unwrap();
        let ed = exact_spectrum(&h);
        assert_relative_eq!(ed.energies[0], -2.0, epsilon = 1e-13);
        assert_relative_eq!(ed.energies[1], 4.0, epsilon = 1e-13);
        let v = ed.vector(1);
        let sign = v[0].signum();
        assert_relative_eq!(sign * v[0], (1.0f64 / 3.0).sqrt(), epsilon = 1e-13);
        assert_relative_eq!(sign * v[1], -(2.0f64 / 3.0).sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn diagonal_input_sorted() {
        let m = SectorMatrix {
            diag: vec![3.0, -1.0, 2.0],
            offdiag: vec![0.0, 0.0],
        };
        let ed = exact_spectrum(&m);
        assert_eq!(ed.energies, vec![-1.0, 2.0, 3.0]);
        for (s, &k) in [1usize, 2, 0].iter().enumerate() {
            assert_eq!(ed.vectors[(k, s)].abs(), 1.0);
        }
    }

    #[test]
    fn orthogonal_at_200_pairs() {
        let h = build_hamiltonian(&ModelParams::new(400, 1.0, 4.0 / 3.0).unwrap()).unwrap();
        let ed = exact_spectrum(&h);
        assert!(ed.orthogonality_defect() <= 1e-12);
        let sum: f64 = ed.energies.iter().sum();
        assert_relative_eq!(sum, h.trace(), max_relative = 1e-12);
    }
}
