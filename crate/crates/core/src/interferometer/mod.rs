//! Time evolution of the pair vacuum through the seeding, phase-encoding and
//! un-seeding stages of the two interferometric sequences.
//!
//! All evolution happens in energy bases: with `C` the real Fock ↔ energy
//! transform (rows = states), the seeded state in the Fock basis is
//! `a = C^T (c_0 ∘ e^{iEt})`, the dwell stage acts on `a` and the output in
//! the energy basis is `x = e^{-iEt} ∘ (C b)`.

mod fringe;

pub use fringe::estimate_fringe_frequency;

use crate::eigenbasis::SpectralBasis;
use crate::error::{Result, SccError};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SequenceKind {
    /// Free phase evolution `exp(-2iu (ω K_z-part + ω₀ L_z-part))`.
    Free { omega: f64, omega0: f64 },
    /// Phase encoded by evolving under the Hamiltonian with `q -> q'`.
    Quasifree { q_prime: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SequenceConfig {
    pub kind: SequenceKind,
    /// Seeding time.
    pub t: f64,
    /// Dwell time.
    pub u: f64,
}

impl SequenceConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(SccError::InvalidParams {
                op: "SequenceConfig",
                reason,
            })
        };
        if !(self.t.is_finite() && self.t >= 0.0) {
            return bad(format!(
                "seeding time t = {} must be finite and >= 0",
                self.t
            ));
        }
        if !(self.u.is_finite() && self.u >= 0.0) {
            return bad(format!("dwell time u = {} must be finite and >= 0", self.u));
        }
        match self.kind {
            SequenceKind::Free { omega, omega0 } if !(omega.is_finite() && omega0.is_finite()) => {
                bad("omega and omega0 must be finite".into())
            }
            SequenceKind::Quasifree { q_prime } if !(q_prime.is_finite() && q_prime != 0.0) => {
                bad(format!("q' = {q_prime} must be finite and nonzero"))
            }
            _ => Ok(()),
        }
    }
}

/// Output coefficients in the unprimed energy basis and their `u`-derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputState {
    pub x: Vec<Complex64>,
    pub dx_du: Vec<Complex64>,
}

impl OutputState {
    pub fn norm_sqr(&self) -> f64 {
        self.x.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Fringe angular frequency relating phase and dwell time by `φ = Ω u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseCalibration {
    pub omega: f64,
}

impl PhaseCalibration {
    pub fn new(omega: f64) -> Result<Self> {
        if omega.is_finite() && omega > 0.0 {
            Ok(Self { omega })
        } else {
            Err(SccError::InvalidParams {
                op: "PhaseCalibration",
                reason: format!("Omega = {omega} must be finite and > 0"),
            })
        }
    }

    /// Exact fringe frequency of the free sequence: every `u`-dependent
    /// relative phase is a multiple of `2(ω - ω₀) u`.
    pub fn free_exact(omega: f64, omega0: f64) -> Result<Self> {
        Self::new(2.0 * (omega - omega0).abs())
    }

    pub fn dwell(&self, phi: f64) -> f64 {
        phi / self.omega
    }

    pub fn phase(&self, u: f64) -> f64 {
        self.omega * u
    }
}

/// `C^T v` with `C` stored as rows = states.
fn apply_transpose(basis: &SpectralBasis, v: &[Complex64]) -> Vec<Complex64> {
    let c = &basis.c;
    let dim = c.nrows();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for s in 0..dim {
        let vs = v[s];
        for (k, o) in out.iter_mut().enumerate() {
            *o += vs * c[(s, k)];
        }
    }
    out
}

/// `C v`.
fn apply(basis: &SpectralBasis, v: &[Complex64]) -> Vec<Complex64> {
    let c = &basis.c;
    (0..c.nrows())
        .map(|s| {
            v.iter()
                .enumerate()
                .fold(Complex64::new(0.0, 0.0), |acc, (k, vk)| {
                    acc + vk * c[(s, k)]
                })
        })
        .collect()
}

fn phases(energies: &[f64], t: f64) -> Vec<Complex64> {
    energies
        .iter()
        .map(|&e| Complex64::from_polar(1.0, e * t))
        .collect()
}

/// Fock-basis form of `e^{-itH} |in>`-type seeding: `C^T (c_0 ∘ e^{iEt})`.
fn seed(basis: &SpectralBasis, t: f64) -> Vec<Complex64> {
    let weighted: Vec<Complex64> = phases(&basis.energies, t)
        .into_iter()
        .enumerate()
        .map(|(s, p)| p * basis.c[(s, 0)])
        .collect();
    apply_transpose(basis, &weighted)
}

/// `η₁ = 2 Σ_k k |a_k|²`, the pair number after the seeding stage alone.
pub fn seeded_pair_number(basis: &SpectralBasis, t: f64) -> f64 {
    seed(basis, t)
        .iter()
        .enumerate()
        .map(|(k, a)| 2.0 * k as f64 * a.norm_sqr())
        .sum()
}

/// A sequence with its seeding stage precomputed, ready to be evaluated at
/// many dwell times.
#[derive(Debug, Clone)]
pub struct Interferometer<'a> {
    basis: &'a SpectralBasis,
    prime: Option<&'a SpectralBasis>,
    kind: SequenceKind,
    t: f64,
    /// Seeded state in the Fock basis.
    seeded: Vec<Complex64>,
    /// Seeded state in the primed energy basis (quasifree only).
    seeded_prime: Vec<Complex64>,
    /// `e^{-iEt}`.
    unseed: Vec<Complex64>,
}

impl<'a> Interferometer<'a> {
    /// `prime` is the basis at `q'` and is required for the quasifree kind.
    pub fn new(
        basis: &'a SpectralBasis,
        prime: Option<&'a SpectralBasis>,
        kind: SequenceKind,
        t: f64,
    ) -> Result<Self> {
        SequenceConfig { kind, t, u: 0.0 }.validate()?;
        let seeded = seed(basis, t);
        let seeded_prime = match kind {
            SequenceKind::Free { .. } => Vec::new(),
            SequenceKind::Quasifree { q_prime } => {
                let p = prime.ok_or_else(|| SccError::InvalidParams {
                    op: "output_state_quasifree",
                    reason: "the quasifree sequence needs the basis at q'".into(),
                })?;
                let (a, b) = (&basis.params, &p.params);
                if a.n_bosons() != b.n_bosons()
                    || a.lambda() != b.lambda()
                    || a.nu0() != b.nu0()
                    || a.nu1() != b.nu1()
                {
                    return Err(SccError::InvalidParams {
                        op: "output_state_quasifree",
                        reason: "primed basis must share N, lambda and seniorities".into(),
                    });
                }
                if b.q() != q_prime {
                    return Err(SccError::InvalidParams {
                        op: "output_state_quasifree",
                        reason: format!(
                            "primed basis built at q = {}, sequence asks q' = {q_prime}",
                            b.q()
                        ),
                    });
                }
                apply(p, &seeded)
            }
        };
        Ok(Self {
            basis,
            prime,
            kind,
            t,
            seeded,
            seeded_prime,
            unseed: phases(&basis.energies, -t),
        })
    }

    pub fn basis(&self) -> &SpectralBasis {
        self.basis
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Pair number produced by the seeding stage.
    pub fn eta1(&self) -> f64 {
        self.seeded
            .iter()
            .enumerate()
            .map(|(k, a)| 2.0 * k as f64 * a.norm_sqr())
            .sum()
    }

    /// State after the dwell stage in the Fock basis, and its `u`-derivative.
    fn dwell(&self, u: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let i = Complex64::i();
        match self.kind {
            SequenceKind::Free { omega, omega0 } => {
                let n = self.seeded.len() - 1;
                let mut b = Vec::with_capacity(n + 1);
                let mut db = Vec::with_capacity(n + 1);
                for (r, a) in self.seeded.iter().enumerate() {
                    let rate = 2.0 * (r as f64 * omega + (n - r) as f64 * omega0);
                    let v = a * Complex64::from_polar(1.0, -rate * u);
                    b.push(v);
                    db.push(-i * rate * v);
                }
                (b, db)
            }
            SequenceKind::Quasifree { .. } => {
                let prime = self.prime.expect("checked in new");
                let mut y = Vec::with_capacity(self.seeded_prime.len());
                let mut dy = Vec::with_capacity(self.seeded_prime.len());
                for (v, &e) in self.seeded_prime.iter().zip(&prime.energies) {
                    let w = v * Complex64::from_polar(1.0, -e * u);
                    y.push(w);
                    dy.push(-i * e * w);
                }
                (apply_transpose(prime, &y), apply_transpose(prime, &dy))
            }
        }
    }

    pub fn output_state(&self, u: f64) -> OutputState {
        let (b, db) = self.dwell(u);
        let unseed = |v: Vec<Complex64>| -> Vec<Complex64> {
            apply(self.basis, &v)
                .into_iter()
                .zip(&self.unseed)
                .map(|(z, p)| z * p)
                .collect()
        };
        OutputState {
            x: unseed(b),
            dx_du: unseed(db),
        }
    }

    pub fn fock_amplitudes(&self, u: f64) -> FockAmplitudes {
        fock_amplitudes(&self.output_state(u), self.basis)
    }
}

/// Output amplitudes `A_k = <k|out>` and `dA_k/du`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockAmplitudes {
    pub a: Vec<Complex64>,
    pub da_du: Vec<Complex64>,
}

impl FockAmplitudes {
    /// `P_{2k} = |A_k|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.a.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `dP_{2k}/du = 2 Re(A_k^* dA_k/du)`.
    pub fn probability_derivatives(&self) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.da_du)
            .map(|(a, d)| 2.0 * (a.conj() * d).re)
            .collect()
    }

    /// `(<η>, Var η)` with `η = 2k` on `|k>`.
    pub fn moments(&self) -> (f64, f64) {
        let (mut m1, mut m2) = (0.0, 0.0);
        for (k, p) in self.probabilities().into_iter().enumerate() {
            let eta = 2.0 * k as f64;
            m1 += eta * p;
            m2 += eta * eta * p;
        }
        (m1, (m2 - m1 * m1).max(0.0))
    }

    /// `d<η>/du`.
    pub fn mean_derivative(&self) -> f64 {
        self.probability_derivatives()
            .into_iter()
            .enumerate()
            .map(|(k, dp)| 2.0 * k as f64 * dp)
            .sum()
    }
}

pub fn fock_amplitudes(out: &OutputState, basis: &SpectralBasis) -> FockAmplitudes {
    FockAmplitudes {
        a: apply_transpose(basis, &out.x),
        da_du: apply_transpose(basis, &out.dx_du),
    }
}

pub fn output_state_free(basis: &SpectralBasis, config: &SequenceConfig) -> Result<OutputState> {
    config.validate()?;
    if !matches!(config.kind, SequenceKind::Free { .. }) {
        return Err(SccError::InvalidParams {
            op: "output_state_free",
            reason: "sequence kind is not Free".into(),
        });
    }
    Ok(Interferometer::new(basis, None, config.kind, config.t)?.output_state(config.u))
}

pub fn output_state_quasifree(
    basis: &SpectralBasis,
    basis_prime: &SpectralBasis,
    config: &SequenceConfig,
) -> Result<OutputState> {
    config.validate()?;
    if !matches!(config.kind, SequenceKind::Quasifree { .. }) {
        return Err(SccError::InvalidParams {
            op: "output_state_quasifree",
            reason: "sequence kind is not Quasifree".into(),
        });
    }
    Ok(
        Interferometer::new(basis, Some(basis_prime), config.kind, config.t)?
            .output_state(config.u),
    )
}

/// `(<η>, Var η)` of an output state.
pub fn observable_moments(out: &OutputState, basis: &SpectralBasis) -> (f64, f64) {
    fock_amplitudes(out, basis).moments()
}

/// `P_η` for `η = 0, 2, ..., 2n`, indexed by pair count.
pub fn fock_probabilities(out: &OutputState, basis: &SpectralBasis) -> Vec<f64> {
    fock_amplitudes(out, basis).probabilities()
}

/// Samples `<η>(u)` on `steps` uniformly spaced dwell times in `[0, u_max]`.
pub fn mean_eta_trace(ifm: &Interferometer<'_>, u_max: f64, steps: usize) -> Vec<(f64, f64)> {
    use rayon::prelude::*;
    let du = u_max / (steps.max(2) - 1) as f64;
    (0..steps.max(2))
        .into_par_iter()
        .map(|j| {
            let u = j as f64 * du;
            (u, ifm.fock_amplitudes(u).moments().0)
        })
        .collect()
}

/// Calibrates `Ω` from the `<η>(u)` trace over `[0, u_max]`.
pub fn calibrate(ifm: &Interferometer<'_>, u_max: f64, steps: usize) -> Result<PhaseCalibration> {
    estimate_fringe_frequency(&mean_eta_trace(ifm, u_max, steps))
}
