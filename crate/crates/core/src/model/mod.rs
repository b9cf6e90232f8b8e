//! Model parameters, the paired-sector Fock basis and the sector Hamiltonian.
//!
//! The Fock basis is `|k> = L+^(n-k) K+^k |0> / sqrt(N_k)` with `K+ = -a-† a+†`,
//! so `|k>` carries a factor `(-1)^k` relative to the plain occupation state
//! `|2(n-k), k, k>`. All matrices in this crate use that convention, which makes
//! the off-diagonal of the Hamiltonian negative.

mod charges;
mod ed;

pub use charges::{build_conserved_charges, ConservedCharges};
pub use ed::{exact_spectrum, ExactSpectrum};

use crate::error::{Result, SccError};
use nalgebra::DMatrix;
use serde::Serialize;

/// Boson number, couplings and seniorities of one invariant sector.
///
/// The derived quantities `g`, `d0` and `d1` are computed on access.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    n_bosons: usize,
    lambda: f64,
    q: f64,
    nu0: usize,
    nu1: usize,
}

impl ModelParams {
    /// Paired sector (`nu0 = nu1 = 0`) with `n_bosons` atoms.
    pub fn new(n_bosons: usize, lambda: f64, q: f64) -> Result<Self> {
        Self::with_seniorities(n_bosons, lambda, q, 0, 0)
    }

    pub fn with_seniorities(
        n_bosons: usize,
        lambda: f64,
        q: f64,
        nu0: usize,
        nu1: usize,
    ) -> Result<Self> {
        let invalid = |reason: String| SccError::InvalidParams {
            op: "ModelParams",
            reason,
        };
        if !lambda.is_finite() || !q.is_finite() {
            return Err(invalid(format!(
                "non-finite coupling (lambda={lambda}, q={q})"
            )));
        }
        if nu0 > 1 {
            return Err(invalid(format!("nu0 must be 0 or 1, got {nu0}")));
        }
        let unpaired = nu0 + nu1;
        if n_bosons < unpaired + 2 {
            return Err(invalid(format!(
                "need at least one pair: N={n_bosons}, unpaired={unpaired}"
            )));
        }
        if (n_bosons - unpaired) % 2 != 0 {
            return Err(invalid(format!(
                "N - nu0 - nu1 must be even, got N={n_bosons}"
            )));
        }
        Ok(Self {
            n_bosons,
            lambda,
            q,
            nu0,
            nu1,
        })
    }

    pub fn n_bosons(&self) -> usize {
        self.n_bosons
    }

    /// Number of pairs `n`.
    pub fn pairs(&self) -> usize {
        (self.n_bosons - self.nu0 - self.nu1) / 2
    }

    /// Sector dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.pairs() + 1
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn nu0(&self) -> usize {
        self.nu0
    }

    pub fn nu1(&self) -> usize {
        self.nu1
    }

    /// `g = 2 lambda / q`; infinite or NaN when `q = 0`.
    pub fn g(&self) -> f64 {
        2.0 * self.lambda / self.q
    }

    pub fn d0(&self) -> f64 {
        (self.nu0 as f64 + 0.5) / 2.0
    }

    pub fn d1(&self) -> f64 {
        (self.nu1 as f64 + 1.0) / 2.0
    }

    pub fn is_paired_sector(&self) -> bool {
        self.nu0 == 0 && self.nu1 == 0
    }

    /// Same boson number and `lambda`, different dressing `q`.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        Self::with_seniorities(self.n_bosons, self.lambda, q, self.nu0, self.nu1)
    }

    pub(crate) fn require_paired(&self, op: &'static str) -> Result<()> {
        if self.is_paired_sector() {
            Ok(())
        } else {
            Err(SccError::InvalidParams {
                op,
                reason: format!(
                    "only the paired sector is supported (nu0={}, nu1={})",
                    self.nu0, self.nu1
                ),
            })
        }
    }

    pub(crate) fn require_nonzero_q(&self, op: &'static str) -> Result<()> {
        if self.q == 0.0 {
            Err(SccError::InvalidParams {
                op,
                reason: "q = 0 leaves g = 2 lambda / q undefined".into(),
            })
        } else {
            Ok(())
        }
    }
}

/// Symmetric tridiagonal matrix of `H` in the Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorMatrix {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl SectorMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (i, &d) in self.diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        for (i, &o) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] = o;
            m[(i + 1, i)] = o;
        }
        m
    }
}

/// Builds `H` restricted to the paired sector.
///
/// `H_kk = 2k (4 lambda (n-k) + q - lambda)` and
/// `H_{k+1,k} = -2 lambda (k+1) sqrt(2(n-k)(2(n-k)-1))`.
pub fn build_hamiltonian(params: &ModelParams) -> Result<SectorMatrix> {
    params.require_paired("build_hamiltonian")?;
    let n = params.pairs();
    let (lambda, q) = (params.lambda(), params.q());
    let diag = (0..=n)
        .map(|k| {
            let k = k as f64;
            2.0 * k * (4.0 * lambda * (n as f64 - k) + q - lambda)
        })
        .collect();
    let offdiag = (0..n)
        .map(|k| {
            let m = 2.0 * (n - k) as f64;
            -2.0 * lambda * (k + 1) as f64 * (m * (m - 1.0)).sqrt()
        })
        .collect();
    Ok(SectorMatrix { diag, offdiag })
}

/// Squared norms `N_k = 2^(2(k-n)) [2(n-k)]! (k!)^2` of the unnormalised Fock
/// states, kept as natural logarithms. All `N_k` are positive.
#[derive(Debug, Clone, PartialEq)]
pub struct FockNormTable {
    ln_values: Vec<f64>,
}

impl FockNormTable {
    pub fn ln(&self, k: usize) -> f64 {
        self.ln_values[k]
    }

    pub fn ln_values(&self) -> &[f64] {
        &self.ln_values
    }

    /// `N_k` itself; overflows to infinity for large `n`.
    pub fn value(&self, k: usize) -> f64 {
        self.ln_values[k].exp()
    }

    pub fn len(&self) -> usize {
        self.ln_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_values.is_empty()
    }
}

pub fn fock_norms(n: usize) -> FockNormTable {
    let ln_fact = ln_factorials(2 * n);
    let ln2 = std::f64::consts::LN_2;
    let ln_values = (0..=n)
        .map(|k| 2.0 * (k as f64 - n as f64) * ln2 + ln_fact[2 * (n - k)] + 2.0 * ln_fact[k])
        .collect();
    FockNormTable { ln_values }
}

/// `ln(j!)` for `j = 0..=max`, by cumulative summation.
pub(crate) fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for j in 1..=max {
        acc += (j as f64).ln();
        out.push(acc);
    }
    out
}
