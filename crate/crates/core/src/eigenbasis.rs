//! Fock ↔ energy basis transform built from the rapidities.
//!
//! Expanding the Bethe state `prod_a (L+/(1-e_a) - K+/(1+e_a)) |0>` gives the
//! Fock coefficients as the coefficients of the generating polynomial
//! `prod_a (1/(1-e_a) - x/(1+e_a))`. Coefficients and the Fock norms `N_k`
//! both leave double range around `n ~ 50-100`, so everything is carried as
//! sign + log-magnitude and only the normalised ratios are exponentiated.

use crate::bethe::{BetheSpectrum, BetheState, Rapidity};
use crate::error::{Result, SccError};
use crate::model::{build_hamiltonian, exact_spectrum, fock_norms, ln_factorials, ModelParams};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// A real number as `sign * exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    /// `-1`, `0` or `1`.
    pub sign: f64,
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0.0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self {
                sign: x.signum(),
                ln_abs: x.abs().ln(),
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        self.sign * self.ln_abs.exp()
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0.0
    }

    pub fn mul(self, other: SignedLog) -> SignedLog {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        SignedLog {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }

    pub fn add(self, other: SignedLog) -> SignedLog {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (small.ln_abs - big.ln_abs).exp();
        let ln_factor = if big.sign == small.sign {
            ratio.ln_1p()
        } else if ratio == 1.0 {
            return Self::ZERO;
        } else {
            (-ratio).ln_1p()
        };
        SignedLog {
            sign: big.sign,
            ln_abs: big.ln_abs + ln_factor,
        }
    }
}

fn check_poles(rap: &[Rapidity]) -> Result<()> {
    for (index, r) in rap.iter().enumerate() {
        let d = r.one_minus().abs().min(r.one_plus().abs());
        if !(d >= 1e-14) {
            return Err(SccError::Pole {
                op: "alpha_coefficients",
                index,
                distance: d,
            });
        }
    }
    Ok(())
}

/// Coefficients of `x^k` in `prod_a (1/(1-e_a) - x/(1+e_a))`, `k = 0..=n`,
/// i.e. the sum over `k`-subsets of `prod_{a in S} -1/(1+e_a) prod_{b not in S} 1/(1-e_b)`.
pub fn expansion_coefficients(rap: &[Rapidity]) -> Result<Vec<SignedLog>> {
    check_poles(rap)?;
    let mut poly = vec![SignedLog::from_f64(1.0)];
    for r in rap {
        let a = SignedLog::from_f64(1.0 / r.one_minus());
        let b = SignedLog::from_f64(-1.0 / r.one_plus());
        let mut next = vec![SignedLog::ZERO; poly.len() + 1];
        for (j, &p) in poly.iter().enumerate() {
            next[j] = next[j].add(p.mul(a));
            next[j + 1] = next[j + 1].add(p.mul(b));
        }
        poly = next;
    }
    Ok(poly)
}

/// `alpha_k` as the sum over all permutations `P` of
/// `prod_{a <= k} -1/(1+e_P(a)) prod_{b > k} 1/(1-e_P(b))`.
///
/// Each `k`-subset appears `k! (n-k)!` times in that sum, so this is the
/// subset coefficient from [`expansion_coefficients`] times `k! (n-k)!`.
pub fn alpha_coefficients(rap: &[Rapidity]) -> Result<Vec<SignedLog>> {
    let n = rap.len();
    let ln_fact = ln_factorials(n);
    Ok(expansion_coefficients(rap)?
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            c.mul(SignedLog {
                sign: 1.0,
                ln_abs: ln_fact[k] + ln_fact[n - k],
            })
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct BasisOptions {
    /// Compare every row with the exact-diagonalisation eigenvector.
    pub verify_against_ed: bool,
    /// Largest tolerated deviation from the ED eigenvector (up to sign).
    pub ed_tolerance: f64,
}

impl Default for BasisOptions {
    fn default() -> Self {
        Self {
            verify_against_ed: true,
            ed_tolerance: 1e-6,
        }
    }
}

/// Energies and the orthogonal transform `c[(s, k)] = <k|psi_s>`.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub params: ModelParams,
    /// Ascending.
    pub energies: Vec<f64>,
    /// Rows indexed by state, columns by Fock index.
    pub c: DMatrix<f64>,
    /// `ln` of the state norms `sum_k N_k coef_k^2`; empty for ED-built bases.
    pub ln_norms: Vec<f64>,
    /// Worst row deviation from ED measured during construction, if checked.
    pub ed_deviation: Option<f64>,
}

impl SpectralBasis {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `max |C C^T - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let gram = &self.c * self.c.transpose();
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }

    pub fn row(&self, s: usize) -> Vec<f64> {
        self.c.row(s).iter().copied().collect()
    }

    /// Basis straight from exact diagonalisation. Used as the reference the
    /// Bethe construction is checked against.
    pub fn from_exact_diagonalization(params: &ModelParams) -> Result<Self> {
        let ed = exact_spectrum(&build_hamiltonian(params)?);
        Ok(Self {
            params: *params,
            c: ed.vectors.transpose(),
            energies: ed.energies,
            ln_norms: Vec::new(),
            ed_deviation: None,
        })
    }
}

/// One normalised row `c_sk = coef_k sqrt(N_k / norm_s)` and `ln norm_s`.
fn basis_row(state: &BetheState, ln_fock: &[f64]) -> Result<(Vec<f64>, f64)> {
    let coef = expansion_coefficients(&state.rapidities)?;
    let ln_terms: Vec<f64> = coef
        .iter()
        .zip(ln_fock)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, ln_n)| 2.0 * c.ln_abs + ln_n)
        .collect();
    let peak = ln_terms.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let ln_norm = peak + ln_terms.iter().map(|x| (x - peak).exp()).sum::<f64>().ln();
    let row = coef
        .iter()
        .zip(ln_fock)
        .map(|(c, ln_n)| c.sign * (c.ln_abs + 0.5 * (ln_n - ln_norm)).exp())
        .collect();
    Ok((row, ln_norm))
}

/// `min over sign of max |a - sign * b|`.
pub fn signed_distance(a: &[f64], b: &[f64]) -> f64 {
    let plus = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let minus = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x + y).abs()));
    plus.min(minus)
}

pub fn build_spectral_basis(spectrum: &BetheSpectrum) -> Result<SpectralBasis> {
    build_spectral_basis_with(spectrum, &BasisOptions::default())
}

pub fn build_spectral_basis_with(
    spectrum: &BetheSpectrum,
    opts: &BasisOptions,
) -> Result<SpectralBasis> {
    let params = spectrum.params;
    let dim = params.dim();
    let ln_fock = fock_norms(params.pairs());
    let rows: Vec<(Vec<f64>, f64)> = spectrum
        .states
        .par_iter()
        .map(|s| basis_row(s, ln_fock.ln_values()))
        .collect::<Result<_>>()?;

    let mut c = DMatrix::zeros(dim, dim);
    let mut ln_norms = Vec::with_capacity(dim);
    let mut energies = Vec::with_capacity(dim);
    let mut states: Vec<BetheState> = spectrum.states.clone();
    for (s, (row, ln_norm)) in rows.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            c[(s, k)] = v;
        }
        ln_norms.push(ln_norm);
        energies.push(states[s].energy);
    }

    let mut ed_deviation = None;
    if opts.verify_against_ed {
        let ed = exact_spectrum(&build_hamiltonian(&params)?);
        let mut worst = 0.0f64;
        for s in 0..dim {
            let target = ed.vector(s);
            let mut dev = signed_distance(&c.row(s).iter().copied().collect::<Vec<_>>(), &target);
            if dev > opts.ed_tolerance {
                // Re-polish the rapidities to the precision floor and retry once.
                states[s] = crate::bethe::repolish_state(&states[s], &params)?;
                let (row, ln_norm) = basis_row(&states[s], ln_fock.ln_values())?;
                dev = signed_distance(&row, &target);
                for (k, v) in row.into_iter().enumerate() {
                    c[(s, k)] = v;
                }
                ln_norms[s] = ln_norm;
                energies[s] = states[s].energy;
                if dev > opts.ed_tolerance {
                    return Err(SccError::BasisMismatch {
                        state: s,
                        deviation: dev,
                    });
                }
            }
            worst = worst.max(dev);
        }
        ed_deviation = Some(worst);
    }

    Ok(SpectralBasis {
        params,
        energies,
        c,
        ln_norms,
        ed_deviation,
    })
}

/// Solves the Richardson equations and builds the checked basis in one go.
pub fn solve_basis(params: &ModelParams) -> Result<SpectralBasis> {
    build_spectral_basis(&crate::bethe::solve_rapidities(params)?)
}
