//! Richardson equations for the paired bosonic model and their solution for
//! all `n + 1` eigenstates.

mod continuation;
mod equations;
mod polynomial;
mod rapidity;
mod seeds;

pub use polynomial::van_vleck_constants;
pub use rapidity::{Pole, Rapidity};
pub use seeds::laguerre_zeros;

use crate::error::{Result, SccError};
use crate::model::ModelParams;
use equations::{check_poles, max_abs, Couplings};
use rayon::prelude::*;
use serde::Serialize;

/// Which route produces the rapidities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Continuation in `g`, falling back to the polynomial route on failure.
    Continuation,
    /// Heine–Stieltjes polynomial eigenproblem only. Root extraction from
    /// the monomial coefficients limits it to about 7 pairs.
    Polynomial,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Coupling at which the asymptotic seeds are placed.
    pub g_start: f64,
    /// First continuation step as a fraction of the target coupling.
    pub initial_step_fraction: f64,
    /// Continuation gives up when the step falls below this fraction of `g`.
    pub min_step_fraction: f64,
    pub newton_tol: f64,
    pub accept_tol: f64,
    /// Residual required at intermediate continuation points.
    pub corrector_tol: f64,
    pub corrector_iter: usize,
    pub max_newton_iter: usize,
    pub strategy: Strategy,
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            g_start: 1e-4,
            initial_step_fraction: 0.01,
            min_step_fraction: 1e-10,
            newton_tol: 1e-12,
            accept_tol: 1e-10,
            corrector_tol: 1e-9,
            corrector_iter: 12,
            max_newton_iter: 60,
            strategy: Strategy::Continuation,
            parallel: true,
        }
    }
}

/// One solved eigenstate.
#[derive(Debug, Clone, Serialize)]
pub struct BetheState {
    /// Position in the energy-sorted spectrum.
    pub index: usize,
    /// Fock label the state connects to as `g -> 0`: the number of
    /// rapidities that emerge from `-1`.
    pub fock_label: usize,
    /// Sorted ascending by value.
    pub rapidities: Vec<Rapidity>,
    pub energy: f64,
    pub r0: f64,
    pub r1: f64,
    pub residual_norm: f64,
}

impl BetheState {
    pub fn values(&self) -> Vec<f64> {
        self.rapidities.iter().map(Rapidity::value).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BetheSpectrum {
    pub params: ModelParams,
    /// Ascending in energy.
    pub states: Vec<BetheState>,
}

impl BetheSpectrum {
    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.states.iter().fold(0.0, |m, s| m.max(s.residual_norm))
    }
}

fn couplings(params: &ModelParams) -> Couplings {
    Couplings {
        g: params.g(),
        d0: params.d0(),
        d1: params.d1(),
    }
}

/// Richardson residual for plain rapidity values.
pub fn richardson_residual(rapidities: &[f64], params: &ModelParams) -> Result<Vec<f64>> {
    let rap: Vec<Rapidity> = rapidities
        .iter()
        .map(|&e| Rapidity::from_value(e))
        .collect();
    richardson_residual_anchored(&rap, params)
}

pub fn richardson_residual_anchored(rap: &[Rapidity], params: &ModelParams) -> Result<Vec<f64>> {
    params.require_nonzero_q("richardson_residual")?;
    check_poles("richardson_residual", rap)?;
    Ok(equations::residual(rap, couplings(params)))
}

/// Energy and conserved-charge eigenvalues `(E, r0, r1)` of a solved state.
pub fn bethe_energy(rap: &[Rapidity], params: &ModelParams) -> Result<(f64, f64, f64)> {
    params.require_nonzero_q("bethe_energy")?;
    for (index, r) in rap.iter().enumerate() {
        let d = r.one_minus().abs().min(r.one_plus().abs());
        if !(d >= equations::POLE_EPS) {
            return Err(SccError::Pole {
                op: "bethe_energy",
                index,
                distance: d,
            });
        }
    }
    let (g, d0, d1) = (params.g(), params.d0(), params.d1());
    let (lambda, q) = (params.lambda(), params.q());
    let s_minus: f64 = rap.iter().map(|r| 1.0 / r.one_minus()).sum();
    let s_plus: f64 = rap.iter().map(|r| 1.0 / r.one_plus()).sum();
    let r0 = d0 * (1.0 - 2.0 * g * d1 - 4.0 * g * s_minus);
    let r1 = d1 * (1.0 + 2.0 * g * d0 + 4.0 * g * s_plus);
    let energy = 2.0 * lambda - q - 4.0 * lambda * r0 + 2.0 * (q - 2.0 * lambda) * r1;
    Ok((energy, r0, r1))
}

/// Solves the Richardson equations for every eigenstate of the sector.
pub fn solve_rapidities(params: &ModelParams) -> Result<BetheSpectrum> {
    solve_rapidities_with(params, &SolverConfig::default())
}

pub fn solve_rapidities_with(params: &ModelParams, cfg: &SolverConfig) -> Result<BetheSpectrum> {
    params.require_nonzero_q("solve_rapidities")?;
    if params.lambda() == 0.0 {
        return Err(SccError::InvalidParams {
            op: "solve_rapidities",
            reason: "lambda = 0 sends every rapidity into a pole (g = 0)".into(),
        });
    }
    let n = params.pairs();
    let c = couplings(params);
    let solve_one = |k: usize| -> Result<BetheState> {
        let (mut rap, residual) = match cfg.strategy {
            Strategy::Polynomial => polynomial::solve_state(n, k, c, cfg)?,
            Strategy::Continuation => match continuation::continue_state(n, k, c, cfg) {
                Ok(found) => found,
                Err(primary) => polynomial::solve_state(n, k, c, cfg).map_err(|_| primary)?,
            },
        };
        rap.sort_by(|a, b| a.value().total_cmp(&b.value()));
        let (energy, r0, r1) = bethe_energy(&rap, params)?;
        Ok(BetheState {
            index: 0,
            fock_label: k,
            rapidities: rap,
            energy,
            r0,
            r1,
            residual_norm: residual,
        })
    };
    let mut states: Vec<BetheState> = if cfg.parallel {
        (0..=n)
            .into_par_iter()
            .map(solve_one)
            .collect::<Result<_>>()?
    } else {
        (0..=n).map(solve_one).collect::<Result<_>>()?
    };
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    for (i, s) in states.iter_mut().enumerate() {
        s.index = i;
    }
    Ok(BetheSpectrum {
        params: *params,
        states,
    })
}

/// Runs Newton on a solved state until the residual stops decreasing.
pub fn repolish_state(state: &BetheState, params: &ModelParams) -> Result<BetheState> {
    params.require_nonzero_q("repolish_state")?;
    let c = couplings(params);
    let chamber = continuation::Chamber::of(&state.rapidities);
    let out = continuation::newton(state.rapidities.clone(), c, &chamber, 0.0, 60);
    let mut rap = out.rap;
    rap.sort_by(|a, b| a.value().total_cmp(&b.value()));
    let (energy, r0, r1) = bethe_energy(&rap, params)?;
    Ok(BetheState {
        rapidities: rap,
        energy,
        r0,
        r1,
        residual_norm: out.residual,
        ..state.clone()
    })
}

/// Max-abs Richardson residual of a state under `params`.
pub fn state_residual(state: &BetheState, params: &ModelParams) -> Result<f64> {
    Ok(max_abs(&richardson_residual_anchored(
        &state.rapidities,
        params,
    )?))
}
