//! Property suite over one parameter set: solver quality, basis quality,
//! interferometer identities, metrology bounds and the conserved charges.

use super::config::{ExperimentConfig, SequenceChoice};
use super::sweeps::checked_basis;
use super::table::SweepTable;
use crate::bethe::{bethe_energy, solve_rapidities, state_residual, BetheSpectrum, Rapidity};
use crate::eigenbasis::{
    alpha_coefficients, build_spectral_basis_with, signed_distance, BasisOptions, SpectralBasis,
};
use crate::error::Result;
use crate::interferometer::{Interferometer, PhaseCalibration, SequenceKind};
use crate::metrology::{
    distribution_at, fisher_with_cutoff, hellinger_distance, moments_at, near_fringe_extremum,
    DEFAULT_DELTA,
};
use crate::model::{build_conserved_charges, build_hamiltonian, exact_spectrum, ModelParams};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured value of the checked quantity.
    pub worst: f64,
    pub threshold: f64,
}

impl PropertyResult {
    /// Passes when `worst <= threshold` (NaN fails).
    fn at_most(name: &'static str, worst: f64, threshold: f64) -> Self {
        Self {
            name,
            passed: worst <= threshold,
            worst,
            threshold,
        }
    }

    fn failed(name: &'static str, threshold: f64) -> Self {
        Self {
            name,
            passed: false,
            worst: f64::NAN,
            threshold,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<28} worst={:.3e} threshold={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.threshold
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub properties: Vec<PropertyResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn to_table(&self, cfg: &ExperimentConfig) -> SweepTable {
        let mut t = SweepTable::new("validate", &["property", "worst", "threshold", "status"]);
        t.metadata.push(("experiment".into(), "validate".into()));
        t.metadata.extend(cfg.resolved());
        for p in &self.properties {
            t.push(
                vec![
                    p.name.into(),
                    if p.worst.is_nan() {
                        None
                    } else {
                        Some(p.worst)
                    }
                    .into(),
                    p.threshold.into(),
                    if p.passed { "pass" } else { "fail" }.into(),
                ],
                Vec::new(),
            );
        }
        t
    }
}

/// Tolerances of the suite.
pub mod tolerance {
    pub const RESIDUAL: f64 = 1e-10;
    /// `|E - E_ed| / max(1, |E_ed|)`.
    pub const ENERGY: f64 = 1e-8;
    pub const ED_ROW: f64 = 1e-6;
    pub const ORTHOGONALITY: f64 = 1e-8;
    pub const NORMALISATION: f64 = 1e-10;
    pub const FIDELITY: f64 = 1e-10;
    pub const PERIODICITY: f64 = 1e-8;
    pub const DERIVATIVE: f64 = 1e-6;
    /// Bound on `1 - min (Δφ)² F_I`.
    pub const CRAMER_RAO: f64 = 1e-9;
    pub const HELLINGER_FISHER: f64 = 1e-2;
    pub const CHARGES: f64 = 1e-12;
    pub const ALPHA: f64 = 1e-10;
}

fn perturbed(spec: &BetheSpectrum, shift: f64) -> BetheSpectrum {
    let mut out = spec.clone();
    if shift != 0.0 {
        for st in &mut out.states {
            for r in &mut st.rapidities {
                *r = Rapidity::new(r.pole, r.offset + shift);
            }
        }
    }
    out
}

/// `max |E_s - E_ed,s| / max(1, |E_ed,s|)` over the sorted spectra.
pub fn energy_deviation(energies: &[f64], ed: &[f64]) -> f64 {
    let mut sorted = energies.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.len() != ed.len() {
        return f64::INFINITY;
    }
    sorted
        .iter()
        .zip(ed)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Permutation sum `Σ_P Π_{a<=k} -1/(1+e_P(a)) Π_{b>k} 1/(1-e_P(b))` and the
/// sum of absolute terms, by enumerating permutations.
pub fn alpha_by_permutations(e: &[f64]) -> Vec<(f64, f64)> {
    let n = e.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![(0.0, 0.0); n + 1];
    let mut visit = |p: &[usize]| {
        for (k, slot) in out.iter_mut().enumerate() {
            let mut term = 1.0;
            for (pos, &i) in p.iter().enumerate() {
                term *= if pos < k {
                    -1.0 / (1.0 + e[i])
                } else {
                    1.0 / (1.0 - e[i])
                };
            }
            slot.0 += term;
            slot.1 += term.abs();
        }
    };
    // Heap's algorithm
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn alpha_property(cfg: &ExperimentConfig) -> PropertyResult {
    let mut worst = 0.0f64;
    for n in 1..=6usize {
        let Ok(params) = ModelParams::new(2 * n, cfg.lambda, cfg.q) else {
            return PropertyResult::failed("alpha_brute_force", tolerance::ALPHA);
        };
        let Ok(spec) = solve_rapidities(&params) else {
            return PropertyResult::failed("alpha_brute_force", tolerance::ALPHA);
        };
        for st in &spec.states {
            let Ok(alpha) = alpha_coefficients(&st.rapidities) else {
                return PropertyResult::failed("alpha_brute_force", tolerance::ALPHA);
            };
            let brute = alpha_by_permutations(&st.values());
            for (a, (b, scale)) in alpha.iter().zip(brute) {
                worst = worst.max((a.to_f64() - b).abs() / scale);
            }
        }
    }
    PropertyResult::at_most("alpha_brute_force", worst, tolerance::ALPHA)
}

/// Both measures are relative to the matrix scale: commutator over
/// `max|R0| max|R1|`, reconstruction over `max(1, max|H|)`.
fn charge_properties(params: &ModelParams) -> Vec<PropertyResult> {
    match (build_conserved_charges(params), build_hamiltonian(params)) {
        (Ok(ch), Ok(h)) => {
            let rebuilt = ch.hamiltonian(params);
            let dense = h.to_dense();
            let recon = (&dense - &rebuilt).amax() / dense.amax().max(1.0);
            vec![
                PropertyResult::at_most(
                    "charges_commute",
                    ch.relative_commutator(),
                    tolerance::CHARGES,
                ),
                PropertyResult::at_most("hamiltonian_reconstruction", recon, tolerance::CHARGES),
            ]
        }
        _ => vec![
            PropertyResult::failed("charges_commute", tolerance::CHARGES),
            PropertyResult::failed("hamiltonian_reconstruction", tolerance::CHARGES),
        ],
    }
}

/// Identities of one interferometer: normalisation, identity at `u = 0`,
/// analytic vs finite-difference derivatives, Cramér–Rao and the
/// Hellinger–Fisher relation.
struct SequenceChecks {
    normalisation: f64,
    fidelity: f64,
    derivative: f64,
    cramer_rao: f64,
    hellinger_fisher: f64,
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Initial phase step of the extrapolated finite differences.
const FD_STEP: f64 = 0.05;

/// Ridders' extrapolated central difference of a vector-valued function,
/// started from `h0` and from `h0 / 3`.
///
/// The step shrinks by 1.4 per stage; the estimate with the smallest
/// extrapolation error (max norm) over both tableaux is returned.
fn ridders<F: Fn(f64) -> Vec<f64>>(f: F, x: f64, h0: f64) -> Vec<f64> {
    let (a, ea) = ridders_tableau(&f, x, h0);
    let (b, eb) = ridders_tableau(&f, x, h0 / 3.0);
    if ea <= eb {
        a
    } else {
        b
    }
}

/// One Ridders tableau: `(estimate, extrapolation error)`.
fn ridders_tableau<F: Fn(f64) -> Vec<f64>>(f: &F, x: f64, h0: f64) -> (Vec<f64>, f64) {
    const SHRINK: f64 = 1.4;
    const STAGES: usize = 12;
    const SAFE: f64 = 2.0;
    let central = |h: f64| -> Vec<f64> {
        let (a, b) = (f(x + h), f(x - h));
        a.iter().zip(&b).map(|(p, m)| (p - m) / (2.0 * h)).collect()
    };
    let dist = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))
    };
    let mut h = h0;
    let mut prev: Vec<Vec<f64>> = vec![central(h)];
    let mut best = prev[0].clone();
    let mut best_err = f64::INFINITY;
    for _ in 1..STAGES {
        h /= SHRINK;
        let mut row = vec![central(h)];
        let mut fac = SHRINK * SHRINK;
        for j in 1..=prev.len() {
            let next: Vec<f64> = row[j - 1]
                .iter()
                .zip(&prev[j - 1])
                .map(|(a, b)| (a * fac - b) / (fac - 1.0))
                .collect();
            fac *= SHRINK * SHRINK;
            let err = dist(&next, &row[j - 1]).max(dist(&next, &prev[j - 1]));
            if err <= best_err {
                best_err = err;
                best = next.clone();
            }
            row.push(next);
        }
        let last = row.len() - 1;
        if dist(&row[last], &prev[last - 1]) >= SAFE * best_err {
            break;
        }
        prev = row;
    }
    (best, best_err)
}

fn sequence_checks(ifm: &Interferometer<'_>, cal: &PhaseCalibration) -> SequenceChecks {
    let basis = ifm.basis();
    let mut out = SequenceChecks {
        normalisation: 0.0,
        fidelity: 0.0,
        derivative: 0.0,
        cramer_rao: f64::INFINITY,
        hellinger_fisher: 0.0,
    };
    let x0 = ifm.output_state(0.0);
    let overlap: Complex64 =
        x0.x.iter()
            .enumerate()
            .map(|(s, x)| x * basis.c[(s, 0)])
            .sum();
    out.fidelity = (overlap.norm() - 1.0).abs();

    let phis: Vec<f64> = (1..64)
        .map(|j| 2.0 * PI * j as f64 / 64.0 + 0.013)
        .collect();
    for &phi in &phis {
        let u = cal.dwell(phi);
        let state = ifm.output_state(u);
        out.normalisation = out.normalisation.max((state.norm_sqr() - 1.0).abs());

        // d/du of the raw coefficients, as (re, im) pairs
        let flat = |v: &[Complex64]| v.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>();
        let fd_x = ridders(|s| flat(&ifm.output_state(s).x), u, cal.dwell(FD_STEP));
        out.derivative = out.derivative.max(rel_diff(&fd_x, &flat(&state.dx_du)));

        // d/dφ of probabilities and of <η>
        let (p, dp) = distribution_at(ifm, cal, phi);
        let fd_p = ridders(|f| distribution_at(ifm, cal, f).0, phi, FD_STEP);
        out.derivative = out.derivative.max(rel_diff(&fd_p, &dp));
        let (_, var, slope) = moments_at(ifm, cal, phi);
        let fd_slope = ridders(|f| vec![moments_at(ifm, cal, f).0], phi, FD_STEP)[0];
        out.derivative = out
            .derivative
            .max((fd_slope - slope).abs() / slope.abs().max(1e-300));

        if near_fringe_extremum(ifm, cal, phi) {
            continue;
        }
        // Both identities concern the complete Fisher sum.
        let Ok(fi) = fisher_with_cutoff(&p, &dp, 0.0) else {
            out.cramer_rao = f64::NAN;
            continue;
        };
        if fi.value > 0.0 && slope != 0.0 {
            out.cramer_rao = out.cramer_rao.min(var / (slope * slope) * fi.value);
            let q = distribution_at(ifm, cal, phi + DEFAULT_DELTA).0;
            match hellinger_distance(&p, &q) {
                Ok(d) => {
                    let est = 8.0 * d / (DEFAULT_DELTA * DEFAULT_DELTA);
                    out.hellinger_fisher =
                        out.hellinger_fisher.max((est - fi.value).abs() / fi.value);
                }
                Err(_) => out.hellinger_fisher = f64::NAN,
            }
        }
    }
    out
}

/// `max |<η>(u) - <η>(u + π/|ω - ω₀|)|` for the free sequence.
fn free_periodicity(ifm: &Interferometer<'_>, omega: f64, omega0: f64) -> f64 {
    let period = PI / (omega - omega0).abs();
    (0..40)
        .map(|j| {
            let u = period * j as f64 / 13.0;
            let a = ifm.fock_amplitudes(u).moments().0;
            let b = ifm.fock_amplitudes(u + period).moments().0;
            (a - b).abs()
        })
        .fold(0.0, f64::max)
}

/// Runs the full property suite for the configured model and sequence.
///
/// Interferometer checks use `t = cfg.t`, the free sequence at `cfg.omega`
/// and, when configured, the quasifree sequence at `cfg.q_prime` with the
/// nominal phase scale `Ω = 2|q'|`; the identities hold for any `Ω > 0`.
pub fn validate(cfg: &ExperimentConfig) -> Result<ValidationReport> {
    let params = cfg.model()?;
    let mut props = Vec::new();

    let clean = solve_rapidities(&params)?;
    let spec = perturbed(&clean, cfg.perturb_rapidity);

    let residual = spec
        .states
        .iter()
        .map(|s| state_residual(s, &params).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    props.push(PropertyResult::at_most(
        "richardson_residual",
        residual,
        tolerance::RESIDUAL,
    ));

    let ed = exact_spectrum(&build_hamiltonian(&params)?);
    let energies: Vec<f64> = spec
        .states
        .iter()
        .map(|s| bethe_energy(&s.rapidities, &params).map_or(f64::NAN, |e| e.0))
        .collect();
    props.push(PropertyResult::at_most(
        "ed_energy_match",
        energy_deviation(&energies, &ed.energies),
        tolerance::ENERGY,
    ));

    let opts = BasisOptions {
        verify_against_ed: false,
        ..BasisOptions::default()
    };
    match build_spectral_basis_with(&spec, &opts) {
        Ok(basis) => {
            let rows = (0..basis.dim())
                .map(|s| signed_distance(&basis.row(s), &ed.vector(s)))
                .fold(0.0, f64::max);
            props.push(PropertyResult::at_most(
                "ed_eigenvector_match",
                rows,
                tolerance::ED_ROW,
            ));
            props.push(PropertyResult::at_most(
                "orthogonality",
                basis.orthogonality_defect(),
                tolerance::ORTHOGONALITY,
            ));
        }
        Err(_) => {
            props.push(PropertyResult::failed(
                "ed_eigenvector_match",
                tolerance::ED_ROW,
            ));
            props.push(PropertyResult::failed(
                "orthogonality",
                tolerance::ORTHOGONALITY,
            ));
        }
    }

    let basis = checked_basis(&params)?;
    let prime: Option<SpectralBasis> = match cfg.sequence {
        SequenceChoice::Free => None,
        SequenceChoice::Quasifree => Some(checked_basis(&cfg.model_at(cfg.q_prime)?)?),
    };
    let t = if cfg.t > 0.0 { cfg.t } else { 0.006 };
    let free_kind = SequenceKind::Free {
        omega: cfg.omega,
        omega0: cfg.omega0,
    };
    let free = Interferometer::new(&basis, None, free_kind, t)?;
    let mut checks = vec![sequence_checks(
        &free,
        &PhaseCalibration::free_exact(cfg.omega, cfg.omega0)?,
    )];
    if let Some(p) = &prime {
        let quasi = Interferometer::new(
            &basis,
            Some(p),
            SequenceKind::Quasifree {
                q_prime: cfg.q_prime,
            },
            t,
        )?;
        checks.push(sequence_checks(
            &quasi,
            &PhaseCalibration::new(2.0 * cfg.q_prime.abs())?,
        ));
    }
    let worst = |f: fn(&SequenceChecks) -> f64| {
        checks.iter().map(f).fold(0.0, |m: f64, v| {
            if v.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(v)
            }
        })
    };
    props.push(PropertyResult::at_most(
        "normalisation",
        worst(|c| c.normalisation),
        tolerance::NORMALISATION,
    ));
    props.push(PropertyResult::at_most(
        "identity_at_zero_dwell",
        worst(|c| c.fidelity),
        tolerance::FIDELITY,
    ));
    props.push(PropertyResult::at_most(
        "free_periodicity",
        free_periodicity(&free, cfg.omega, cfg.omega0),
        tolerance::PERIODICITY,
    ));
    props.push(PropertyResult::at_most(
        "derivatives",
        worst(|c| c.derivative),
        tolerance::DERIVATIVE,
    ));
    let cr = checks
        .iter()
        .map(|c| c.cramer_rao)
        .fold(f64::INFINITY, |m, v| {
            if v.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.min(v)
            }
        });
    // No eligible phase point leaves the bound unchecked: report failure.
    props.push(if cr.is_finite() {
        PropertyResult::at_most("cramer_rao", 1.0 - cr, tolerance::CRAMER_RAO)
    } else {
        PropertyResult::failed("cramer_rao", tolerance::CRAMER_RAO)
    });
    props.push(PropertyResult::at_most(
        "hellinger_fisher",
        worst(|c| c.hellinger_fisher),
        tolerance::HELLINGER_FISHER,
    ));

    props.extend(charge_properties(&params));
    props.push(alpha_property(cfg));

    Ok(ValidationReport { properties: props })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heap_enumerates_every_permutation() {
        // n = 3 with e = 0: every term is (-1)^k, 3! permutations
        let a = alpha_by_permutations(&[0.0, 0.0, 0.0]);
        for (k, (v, scale)) in a.iter().enumerate() {
            assert_eq!(*scale, 6.0);
            assert_eq!(*v, 6.0 * (-1.0f64).powi(k as i32));
        }
    }

    #[test]
    fn energy_deviation_is_order_free() {
        assert_eq!(energy_deviation(&[2.0, -1.0], &[-1.0, 2.0]), 0.0);
        assert!(energy_deviation(&[1.0], &[1.0, 2.0]).is_infinite());
        assert!((energy_deviation(&[200.0 + 2e-6], &[200.0]) - 1e-8).abs() < 1e-12);
    }
}
