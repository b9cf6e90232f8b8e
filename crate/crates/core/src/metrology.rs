//! Phase sensitivity of the interferometers: error propagation, Fisher
//! information, the Hellinger-distance proxy and the ideal SU(1,1) reference.

use crate::error::{Result, SccError};
use crate::interferometer::{Interferometer, PhaseCalibration};
use serde::Serialize;
use std::f64::consts::PI;

/// Default Hellinger phase step.
pub const DEFAULT_DELTA: f64 = 1e-5;
/// Probabilities at or below this are left out of the Fisher sum.
pub const PROBABILITY_CUTOFF: f64 = 1e-14;
/// Half-width (rad) of the excluded band around divergences.
pub const GUARD_BAND: f64 = 1e-3;
/// `|d<η>/dφ|` below this makes error propagation undefined.
pub const SLOPE_FLOOR: f64 = 1e-12;
const NORMALISATION_TOL: f64 = 1e-8;
const STEP_AGREEMENT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherInformation {
    pub value: f64,
    /// Number of outcomes excluded by the probability cutoff.
    pub dropped_terms: usize,
    /// Total probability of the excluded outcomes.
    pub dropped_mass: f64,
}

/// `Σ (∂P)²/P` over outcomes with `P > PROBABILITY_CUTOFF`.
pub fn fisher_from_distribution(p: &[f64], dp: &[f64]) -> Result<FisherInformation> {
    fisher_with_cutoff(p, dp, PROBABILITY_CUTOFF)
}

/// `Σ (∂P)²/P` over outcomes with `P > cutoff`. With `P = |a|²` each term is
/// at most `4|∂a|²`, so `cutoff = 0` stays finite for amplitude-derived
/// distributions.
pub fn fisher_with_cutoff(p: &[f64], dp: &[f64], cutoff: f64) -> Result<FisherInformation> {
    if p.len() != dp.len() {
        return Err(SccError::LengthMismatch {
            op: "fisher_information",
            left: p.len(),
            right: dp.len(),
        });
    }
    let mut info = FisherInformation {
        value: 0.0,
        dropped_terms: 0,
        dropped_mass: 0.0,
    };
    for (&pi, &di) in p.iter().zip(dp) {
        if pi > cutoff {
            info.value += di * di / pi;
        } else {
            info.dropped_terms += 1;
            info.dropped_mass += pi.max(0.0);
        }
    }
    Ok(info)
}

/// Fock probabilities at phase `φ` and their analytic `φ`-derivatives.
pub fn distribution_at(
    ifm: &Interferometer<'_>,
    cal: &PhaseCalibration,
    phi: f64,
) -> (Vec<f64>, Vec<f64>) {
    let amps = ifm.fock_amplitudes(cal.dwell(phi));
    let dp = amps
        .probability_derivatives()
        .into_iter()
        .map(|d| d / cal.omega)
        .collect();
    (amps.probabilities(), dp)
}

pub fn fisher_information(
    ifm: &Interferometer<'_>,
    cal: &PhaseCalibration,
    phi: f64,
) -> Result<FisherInformation> {
    let (p, dp) = distribution_at(ifm, cal, phi);
    fisher_from_distribution(&p, &dp)
}

/// `(<η>, Var η, d<η>/dφ)` at phase `φ`.
pub fn moments_at(ifm: &Interferometer<'_>, cal: &PhaseCalibration, phi: f64) -> (f64, f64, f64) {
    let amps = ifm.fock_amplitudes(cal.dwell(phi));
    let (mean, var) = amps.moments();
    (mean, var, amps.mean_derivative() / cal.omega)
}

/// `Var η / (d<η>/dφ)²`.
pub fn phase_sensitivity_error_propagation(
    ifm: &Interferometer<'_>,
    cal: &PhaseCalibration,
    phi: f64,
) -> Result<f64> {
    let (_, var, slope) = moments_at(ifm, cal, phi);
    if slope.abs() < SLOPE_FLOOR {
        return Err(SccError::Divergent {
            op: "phase_sensitivity_error_propagation",
            reason: format!("|d<eta>/dphi| = {:.3e} at phi = {phi}", slope.abs()),
        });
    }
    Ok(var / (slope * slope))
}

/// Squared Hellinger distance `½ Σ (√P - √Q)²`.
pub fn hellinger_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(SccError::LengthMismatch {
            op: "hellinger_distance",
            left: p.len(),
            right: q.len(),
        });
    }
    for dist in [p, q] {
        let sum: f64 = dist.iter().sum();
        if !((sum - 1.0).abs() <= NORMALISATION_TOL) || dist.iter().any(|&x| !(x >= 0.0)) {
            return Err(SccError::NotNormalised { sum });
        }
    }
    // (√P - √Q)² = (P - Q)² / (√P + √Q)² keeps the small-step limit accurate.
    let d: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            let s = a.sqrt() + b.sqrt();
            if s == 0.0 {
                0.0
            } else {
                let r = (a - b) / s;
                r * r
            }
        })
        .sum();
    Ok((0.5 * d).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProxyEstimate {
    /// `Δ² / (8 d_H²(φ, φ+Δ))`.
    pub value: f64,
    /// Same with step `Δ/2`.
    pub half_step_value: f64,
    /// The two differ by more than 1 %.
    pub step_sensitive: bool,
}

fn proxy_at_step(
    ifm: &Interferometer<'_>,
    cal: &PhaseCalibration,
    phi: f64,
    delta: f64,
) -> Result<f64> {
    let p = ifm.fock_amplitudes(cal.dwell(phi)).probabilities();
    let q = ifm.fock_amplitudes(cal.dwell(phi + delta)).probabilities();
    let d = hellinger_distance(&p, &q)?;
    if d < 1e-16 {
        return Err(SccError::Divergent {
            op: "hellinger_sensitivity_proxy",
            reason: format!(
                "d_H^2 = {d:.3e} with step {delta:e}: distribution does not depend on phi"
            ),
        });
    }
    Ok(delta * delta / (8.0 * d))
}

pub fn hellinger_sensitivity_proxy(
    ifm: &Interferometer<'_>,
    cal: &PhaseCalibration,
    phi: f64,
    delta: f64,
) -> Result<ProxyEstimate> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(SccError::InvalidParams {
            op: "hellinger_sensitivity_proxy",
            reason: format!("phase step {delta} must be finite and > 0"),
        });
    }
    let value = proxy_at_step(ifm, cal, phi, delta)?;
    let half_step_value = proxy_at_step(ifm, cal, phi, 0.5 * delta)?;
    Ok(ProxyEstimate {
        value,
        half_step_value,
        step_sensitive: (value - half_step_value).abs() > STEP_AGREEMENT * value,
    })
}

/// Distance from `φ` to the nearest odd multiple of `π`.
fn distance_to_odd_pi(phi: f64) -> f64 {
    let r = (phi - PI).rem_euclid(2.0 * PI);
    r.min(2.0 * PI - r)
}

/// Ideal SU(1,1) sensitivity `[2/(η₁(η₁+2)) + 1 - cos φ] / (1 + cos φ)`.
pub fn ideal_su11_sensitivity(eta1: f64, phi: f64) -> Result<f64> {
    if !(eta1.is_finite() && eta1 > 0.0) {
        return Err(SccError::InvalidParams {
            op: "ideal_su11_sensitivity",
            reason: format!("eta1 = {eta1} must be finite and > 0"),
        });
    }
    let denom = 1.0 + phi.cos();
    if distance_to_odd_pi(phi) < 1e-12 || denom <= 0.0 {
        return Err(SccError::Divergent {
            op: "ideal_su11_sensitivity",
            reason: format!("1 + cos(phi) = {denom:.3e} at phi = {phi}"),
        });
    }
    Ok((2.0 / (eta1 * (eta1 + 2.0)) + 1.0 - phi.cos()) / denom)
}

/// Ideal-interferometer reference at a given seeded pair number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdealReference {
    pub eta1: f64,
    /// `η₁ = cosh β - 1`.
    pub beta: f64,
}

impl IdealReference {
    pub fn new(eta1: f64) -> Result<Self> {
        if !(eta1.is_finite() && eta1 >= 0.0) {
            return Err(SccError::InvalidParams {
                op: "IdealReference",
                reason: format!("eta1 = {eta1} must be finite and >= 0"),
            });
        }
        Ok(Self {
            eta1,
            beta: (eta1 + 1.0).acosh(),
        })
    }

    pub fn sensitivity(&self, phi: f64) -> Result<f64> {
        ideal_su11_sensitivity(self.eta1, phi)
    }

    /// `1/(η₁(η₁+2))`.
    pub fn heisenberg_limit(&self) -> f64 {
        1.0 / (self.eta1 * (self.eta1 + 2.0))
    }

    /// `1/η₁`.
    pub fn standard_quantum_limit(&self) -> f64 {
        1.0 / self.eta1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// Within the guard band of a fringe extremum; error propagation omitted.
    FringeExtremum,
    /// Hellinger distance vanishes; proxy omitted.
    ZeroDistance,
    /// Proxy at `Δ` and `Δ/2` disagree by more than 1 %.
    StepSensitive,
    /// Within the guard band of an ideal-curve divergence.
    IdealDivergence,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::FringeExtremum => "fringe_extremum",
            Flag::ZeroDistance => "zero_distance",
            Flag::StepSensitive => "step_sensitive",
            Flag::IdealDivergence => "ideal_divergence",
        }
    }
}

/// All sensitivity measures at one phase. Absent values were flagged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityPoint {
    pub phi: f64,
    pub eta1: f64,
    pub mean_eta: f64,
    pub var_eta: f64,
    pub delta_phi_sq: Option<f64>,
    pub proxy_delta_phi_sq: Option<f64>,
    pub fisher: f64,
    pub fisher_dropped_mass: f64,
    pub ideal_delta_phi_sq: Option<f64>,
    pub flags: Vec<Flag>,
}

/// True when `d<η>/dφ` vanishes within `GUARD_BAND` of `φ`.
pub fn near_fringe_extremum(ifm: &Interferometer<'_>, cal: &PhaseCalibration, phi: f64) -> bool {
    let slope = |p: f64| moments_at(ifm, cal, p).2;
    let (lo, mid, hi) = (slope(phi - GUARD_BAND), slope(phi), slope(phi + GUARD_BAND));
    mid.abs() < SLOPE_FLOOR
        || lo.signum() != hi.signum()
        || lo.abs() < SLOPE_FLOOR
        || hi.abs() < SLOPE_FLOOR
}

pub fn sensitivity_point(
    ifm: &Interferometer<'_>,
    cal: &PhaseCalibration,
    phi: f64,
    delta: f64,
) -> Result<SensitivityPoint> {
    let eta1 = ifm.eta1();
    let mut flags = Vec::new();
    let (mean_eta, var_eta, slope) = moments_at(ifm, cal, phi);

    let delta_phi_sq = if near_fringe_extremum(ifm, cal, phi) {
        flags.push(Flag::FringeExtremum);
        None
    } else {
        Some(var_eta / (slope * slope))
    };

    let proxy_delta_phi_sq = match hellinger_sensitivity_proxy(ifm, cal, phi, delta) {
        Ok(est) => {
            if est.step_sensitive {
                flags.push(Flag::StepSensitive);
            }
            Some(est.value)
        }
        Err(SccError::Divergent { .. }) => {
            flags.push(Flag::ZeroDistance);
            None
        }
        Err(e) => return Err(e),
    };

    let fisher = fisher_information(ifm, cal, phi)?;

    let ideal_delta_phi_sq = if eta1 > 0.0 && distance_to_odd_pi(phi) >= GUARD_BAND {
        ideal_su11_sensitivity(eta1, phi).ok()
    } else {
        flags.push(Flag::IdealDivergence);
        None
    };

    Ok(SensitivityPoint {
        phi,
        eta1,
        mean_eta,
        var_eta,
        delta_phi_sq,
        proxy_delta_phi_sq,
        fisher: fisher.value,
        fisher_dropped_mass: fisher.dropped_mass,
        ideal_delta_phi_sq,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_outcome_fisher_is_one() {
        for phi in [0.1, 0.7, 2.0, 3.0] {
            let p = [(phi / 2.0f64).cos().powi(2), (phi / 2.0f64).sin().powi(2)];
            let dp = [-0.5 * phi.sin(), 0.5 * phi.sin()];
            let f = fisher_from_distribution(&p, &dp).unwrap();
            assert_relative_eq!(f.value, 1.0, epsilon = 1e-12);
            assert_eq!(f.dropped_terms, 0);
        }
    }

    #[test]
    fn fisher_cutoff_reports_dropped_mass() {
        let f = fisher_from_distribution(&[1.0, 1e-15, 0.0], &[0.0, 1e-3, 0.0]).unwrap();
        assert_eq!(f.value, 0.0);
        assert_eq!(f.dropped_terms, 2);
        assert_eq!(f.dropped_mass, 1e-15);
        assert!(fisher_from_distribution(&[1.0], &[]).is_err());
    }

    #[test]
    fn hellinger_extremes() {
        assert_eq!(hellinger_distance(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_relative_eq!(hellinger_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_relative_eq!(
            hellinger_distance(&[0.5, 0.5, 0.0], &[0.0, 0.0, 1.0]).unwrap(),
            1.0
        );
        assert!(matches!(
            hellinger_distance(&[0.5, 0.4], &[0.5, 0.5]),
            Err(SccError::NotNormalised { .. })
        ));
        assert!(hellinger_distance(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn ideal_reference_values() {
        assert_relative_eq!(ideal_su11_sensitivity(3.0, 0.0).unwrap(), 1.0 / 15.0);
        assert_relative_eq!(
            ideal_su11_sensitivity(5.0, 4.0 * PI).unwrap(),
            1.0 / 35.0,
            max_relative = 1e-12
        );
        assert!(ideal_su11_sensitivity(3.0, PI).is_err());
        assert!(ideal_su11_sensitivity(3.0, -3.0 * PI).is_err());
        assert!(ideal_su11_sensitivity(0.0, 0.0).is_err());
        let r = IdealReference::new(3.0).unwrap();
        assert_relative_eq!(r.beta.cosh() - 1.0, 3.0, epsilon = 1e-12);
        assert_relative_eq!(r.heisenberg_limit(), 1.0 / 15.0);
        assert_relative_eq!(r.standard_quantum_limit(), 1.0 / 3.0);
        // 1/η₁² scaling at large η₁
        let big = ideal_su11_sensitivity(1e4, 0.0).unwrap();
        assert_relative_eq!(big * 1e8, 1.0, max_relative = 1e-3);
    }

    #[test]
    fn odd_pi_distance() {
        assert!(distance_to_odd_pi(PI) < 1e-15);
        assert_relative_eq!(distance_to_odd_pi(0.0), PI);
        assert!(distance_to_odd_pi(-PI + 1e-4) < 1.1e-4);
    }
}
