//! Damped Newton corrector and homotopy continuation in `g`.

use super::equations::{
    check_poles, max_abs, potential, scaled_jacobian, scaled_residual, solve_spd, Couplings,
};
use super::seeds::asymptotic_rapidities;
use super::{Rapidity, SolverConfig};
use crate::error::{Result, SccError};

/// Signs of `1 - e` and `1 + e` for every rapidity. A Newton step may not
/// change them: crossing a pole leaves the basin of the state being tracked.
#[derive(Debug, Clone)]
pub(crate) struct Chamber {
    signs: Vec<(bool, bool)>,
}

impl Chamber {
    pub fn of(rap: &[Rapidity]) -> Self {
        Self {
            signs: rap
                .iter()
                .map(|r| (r.one_minus() > 0.0, r.one_plus() > 0.0))
                .collect(),
        }
    }

    pub fn contains(&self, rap: &[Rapidity]) -> bool {
        rap.iter().zip(&self.signs).all(|(r, &(om, op))| {
            let (a, b) = (r.one_minus(), r.one_plus());
            a.is_finite()
                && b.is_finite()
                && (a > 0.0) == om
                && (b > 0.0) == op
                && a != 0.0
                && b != 0.0
        }) && check_poles("newton", rap).is_ok()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub rap: Vec<Rapidity>,
    /// Max-abs of the unscaled Richardson residual.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Newton iteration on the Richardson equations with a backtracking line
/// search on the concave potential, confined to `chamber`.
pub(crate) fn newton(
    mut rap: Vec<Rapidity>,
    c: Couplings,
    chamber: &Chamber,
    tol: f64,
    max_iter: usize,
) -> NewtonOutcome {
    let scale = 4.0 * c.g.abs();
    let mut r = scaled_residual(&rap, c);
    let mut res = scale * max_abs(&r);
    let mut f = potential(&rap, c);
    for it in 0..max_iter {
        if res <= tol {
            let (rap, res) = refine(rap, res, c);
            return NewtonOutcome {
                rap,
                residual: res,
                iterations: it,
                converged: true,
            };
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let Some(step) = solve_spd(scaled_jacobian(&rap, c), &rhs) else {
            break;
        };
        // dF/dt along the step is r^T J^-1 r > 0.
        let slope: f64 = -r.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
        let use_potential = slope > 1e-10 * (1.0 + f.abs());
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-12 {
            let trial: Vec<Rapidity> = rap
                .iter()
                .zip(&step)
                .map(|(x, d)| x.shifted(t * d))
                .collect();
            if chamber.contains(&trial) {
                let r_trial = scaled_residual(&trial, c);
                let res_trial = scale * max_abs(&r_trial);
                let f_trial = potential(&trial, c);
                let ok = if use_potential {
                    f_trial >= f + 1e-4 * t * slope
                } else {
                    res_trial < res
                };
                if ok && res_trial.is_finite() {
                    accepted = Some((trial, r_trial, res_trial, f_trial));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, r_trial, res_trial, f_trial)) => {
                rap = trial;
                r = r_trial;
                res = res_trial;
                f = f_trial;
            }
            None => {
                return NewtonOutcome {
                    rap,
                    residual: res,
                    iterations: it,
                    converged: res <= tol,
                }
            }
        }
    }
    NewtonOutcome {
        converged: res <= tol,
        rap,
        residual: res,
        iterations: max_iter,
    }
}

/// One undamped Newton step past convergence, kept only if it does not
/// increase the residual. Brings the rapidities, not just the residual, to
/// working precision.
fn refine(rap: Vec<Rapidity>, res: f64, c: Couplings) -> (Vec<Rapidity>, f64) {
    let r = scaled_residual(&rap, c);
    let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
    if let Some(step) = solve_spd(scaled_jacobian(&rap, c), &rhs) {
        let trial: Vec<Rapidity> = rap.iter().zip(&step).map(|(x, d)| x.shifted(*d)).collect();
        if Chamber::of(&rap).contains(&trial) {
            let res_trial = 4.0 * c.g.abs() * max_abs(&scaled_residual(&trial, c));
            if res_trial <= res {
                return (trial, res_trial);
            }
        }
    }
    (rap, res)
}

/// `de/dg` along the solution curve: `J de/dg = 1/(4 g^2)`.
fn tangent(rap: &[Rapidity], c: Couplings) -> Option<Vec<f64>> {
    let rhs = vec![0.25 / (c.g * c.g); rap.len()];
    solve_spd(scaled_jacobian(rap, c), &rhs)
}

/// Tracks Fock label `k` from the small-`g` asymptotics to `target.g`.
pub(crate) fn continue_state(
    n: usize,
    k: usize,
    target: Couplings,
    cfg: &SolverConfig,
) -> Result<(Vec<Rapidity>, f64)> {
    let g_target = target.g;
    let at = |g: f64| Couplings { g, ..target };
    let g0 = if g_target.abs() <= cfg.g_start {
        g_target
    } else {
        cfg.g_start.copysign(g_target)
    };

    let seed = asymptotic_rapidities(n, k, g0, target.d0, target.d1);
    let chamber = Chamber::of(&seed);
    let start = newton(
        seed,
        at(g0),
        &chamber,
        cfg.corrector_tol,
        cfg.max_newton_iter,
    );
    if !start.converged {
        return Err(SccError::Convergence {
            state: k,
            residual: start.residual,
            g: g0,
            step: 0.0,
        });
    }
    let mut rap = start.rap;
    let mut g = g0;
    let mut step = g_target * cfg.initial_step_fraction;
    let min_step = g_target.abs() * cfg.min_step_fraction;

    while g != g_target {
        let g_next = if (g_target - g).abs() <= step.abs() {
            g_target
        } else {
            g + step
        };
        let predicted = match tangent(&rap, at(g)) {
            Some(dir) => {
                let p: Vec<Rapidity> = rap
                    .iter()
                    .zip(&dir)
                    .map(|(x, d)| x.shifted((g_next - g) * d))
                    .collect();
                if chamber.contains(&p) {
                    p
                } else {
                    rap.clone()
                }
            }
            None => rap.clone(),
        };
        let out = newton(
            predicted,
            at(g_next),
            &chamber,
            cfg.corrector_tol,
            cfg.corrector_iter,
        );
        if out.converged {
            rap = out.rap;
            g = g_next;
            if out.iterations <= 4 {
                step *= 2.0;
            }
        } else {
            step *= 0.5;
            if step.abs() < min_step {
                return Err(SccError::Convergence {
                    state: k,
                    residual: out.residual,
                    g,
                    step,
                });
            }
        }
    }

    polish(rap, target, &chamber, cfg).map_err(|(residual, _)| SccError::Convergence {
        state: k,
        residual,
        g: g_target,
        step,
    })
}

/// Final Newton pass at the target coupling. On failure returns the residual
/// reached and the rapidities.
pub(crate) fn polish(
    rap: Vec<Rapidity>,
    c: Couplings,
    chamber: &Chamber,
    cfg: &SolverConfig,
) -> std::result::Result<(Vec<Rapidity>, f64), (f64, Vec<Rapidity>)> {
    let out = newton(rap, c, chamber, cfg.newton_tol, cfg.max_newton_iter);
    if out.residual <= cfg.accept_tol {
        Ok((out.rap, out.residual))
    } else {
        Err((out.residual, out.rap))
    }
}
