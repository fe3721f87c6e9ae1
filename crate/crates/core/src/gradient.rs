//! Optimal-step gradient descent: adjoint gradient, bracketing, golden section.

use serde::{Deserialize, Serialize};

use crate::control::ControlTrajectory;
use crate::error::{ControlError, Result};
use crate::functional::{control_norm, cost};
use crate::problem::ControlProblem;
use crate::propagate::{propagate_adjoint, propagate_forward};
use crate::record::{IterationRow, RunRecord, RunStatus, SolverKind};
use crate::state::{AdjointTrajectory, StateTrajectory};

const GOLDEN: f64 = 0.381_966_011_250_105_1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineSearchConfig {
    pub bracket_growth: f64,
    /// Final bracket width relative to the initial one.
    pub golden_tol: f64,
    pub max_probes: usize,
    /// First trial step; `None` means `1/‖g‖`, later iterations reuse the last accepted step.
    pub initial_step: Option<f64>,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            bracket_growth: 2.0,
            golden_tol: 1e-4,
            max_probes: 50,
            initial_step: None,
        }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.golden_tol > 0.0 && self.golden_tol < 1.0) {
            return Err(ControlError::Config("golden_tol must lie in (0, 1)".into()));
        }
        if !(self.bracket_growth > 1.0) {
            return Err(ControlError::Config("bracket_growth must exceed 1".into()));
        }
        if self.max_probes < 2 {
            return Err(ControlError::Config("max_probes must be at least 2".into()));
        }
        if let Some(s) = self.initial_step {
            if !(s.is_finite() && s > 0.0) {
                return Err(ControlError::Config("initial_step must be positive".into()));
            }
        }
        Ok(())
    }
}

/// `g(t_n) = Δ(v, v; t_n, X_v, Y_v)`, the gradient of `J` in the problem's pairing.
pub fn compute_gradient<P: ControlProblem + ?Sized>(
    problem: &P,
    v: &ControlTrajectory,
    x: &StateTrajectory,
    y: &AdjointTrajectory,
) -> Result<ControlTrajectory> {
    let grid = *v.grid();
    grid.check_same(x.grid())?;
    grid.check_same(y.grid())?;
    let values = (0..grid.steps())
        .map(|n| problem.delta(grid.midpoint(n), v.value(n), v.value(n), &x.pairing(n), y.pairing(n)))
        .collect::<Result<Vec<_>>>()?;
    ControlTrajectory::new(grid, values)
}

/// Forward and adjoint solves followed by [`compute_gradient`].
pub fn gradient_of<P: ControlProblem + ?Sized>(problem: &P, v: &ControlTrajectory) -> Result<ControlTrajectory> {
    let x = propagate_forward(problem, v)?;
    let y = propagate_adjoint(problem, v, &x)?;
    compute_gradient(problem, v, &x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMinimum {
    pub step: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section minimization of `phi` on a bracket `(a, b, c)` with
/// `phi(b) < phi(a)` and `phi(b) < phi(c)`. `fb` is the known value at `b`.
/// Returns the best probe once the bracket has shrunk to `golden_tol · (c - a)`.
pub fn golden_section_search<F>(
    mut phi: F,
    bracket: (f64, f64, f64),
    fb: f64,
    cfg: &LineSearchConfig,
) -> Result<LineMinimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (a, b, c) = bracket;
    if !(a < b && b < c) {
        return Err(ControlError::InvalidBracket { a, b, c });
    }
    let (mut lo, mut hi) = (a, c);
    let (mut best, mut fbest) = (b, fb);
    let width = c - a;
    let mut evaluations = 0;
    while hi - lo > cfg.golden_tol * width && evaluations < cfg.max_probes {
        let probe = if best - lo > hi - best {
            best - GOLDEN * (best - lo)
        } else {
            best + GOLDEN * (hi - best)
        };
        let fp = phi(probe)?;
        evaluations += 1;
        if fp < fbest {
            if probe < best {
                hi = best;
            } else {
                lo = best;
            }
            best = probe;
            fbest = fp;
        } else if probe < best {
            lo = probe;
        } else {
            hi = probe;
        }
    }
    Ok(LineMinimum {
        step: best,
        value: fbest,
        evaluations,
    })
}

/// Brackets a minimum of `phi` on `s > 0` starting from `s0`, with `phi(0) = f0`.
/// Returns the bracket, the value at its middle point and the probes spent.
pub fn bracket_minimum<F>(
    phi: &mut F,
    f0: f64,
    s0: f64,
    cfg: &LineSearchConfig,
) -> Result<((f64, f64, f64), f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let g = cfg.bracket_growth;
    let mut probes = 1;
    let mut s = s0;
    let mut fs = phi(s)?;
    if fs < f0 {
        let mut prev = 0.0;
        loop {
            let next = s * g;
            let fnext = phi(next)?;
            probes += 1;
            if fnext >= fs {
                return Ok(((prev, s, next), fs, probes));
            }
            if probes >= cfg.max_probes {
                return Err(ControlError::BracketingFailed { probes });
            }
            prev = s;
            s = next;
            fs = fnext;
        }
    }
    let mut upper = s;
    loop {
        if probes >= cfg.max_probes {
            return Err(ControlError::BracketingFailed { probes });
        }
        s = upper / g;
        fs = phi(s)?;
        probes += 1;
        if fs < f0 {
            return Ok(((0.0, s, upper), fs, probes));
        }
        upper = s;
    }
}

/// Gradient descent `v ← v - s* g` with `s*` from bracketing and golden section.
pub fn run_gradient<P: ControlProblem + ?Sized>(
    problem: &P,
    v0: &ControlTrajectory,
    cfg: &LineSearchConfig,
    max_iter: usize,
    stop_tol: f64,
) -> Result<RunRecord> {
    cfg.validate()?;
    let reference = problem.conserved_quantity(&problem.initial_state());
    let mut v = v0.clone();
    let mut x = propagate_forward(problem, &v)?;
    let mut j = cost(problem, &v, &x)?;
    let mut rows = Vec::new();
    let mut status = RunStatus::IterationCap;
    let mut last_step = cfg.initial_step;
    let mut drift: Option<f64> = None;

    for k in 0..max_iter {
        let y = propagate_adjoint(problem, &v, &x)?;
        let g = compute_gradient(problem, &v, &x, &y)?;
        let gnorm = control_norm(problem, &g, &x)?;
        if !(gnorm > 0.0) {
            rows.push(IterationRow {
                iter: k,
                cost: j,
                update_norm: 0.0,
                theta: None,
                picard_iters: None,
                descent_residual: None,
                cost_evals: Some(0),
            });
            status = RunStatus::Converged;
            break;
        }
        // best probe so far, kept with its state to skip a forward solve
        let mut cache: Option<(f64, f64, StateTrajectory)> = None;
        let mut phi = |s: f64| -> Result<f64> {
            let trial = v.add_scaled(-s, &g)?;
            let xs = propagate_forward(problem, &trial)?;
            let value = cost(problem, &trial, &xs)?;
            if cache.as_ref().is_none_or(|(_, best, _)| value < *best) {
                cache = Some((s, value, xs));
            }
            Ok(value)
        };
        let s0 = last_step.unwrap_or(1.0 / gnorm);
        let searched = bracket_minimum(&mut phi, j, s0, cfg)
            .and_then(|(bracket, fb, probes)| {
                golden_section_search(&mut phi, bracket, fb, cfg).map(|m| (m, probes + m.evaluations))
            });
        let (found, evals) = match searched {
            Ok(found) => found,
            Err(ControlError::BracketingFailed { probes }) => {
                log::warn!("iteration {k}: no descent along -g after {probes} probes");
                status = RunStatus::LineSearchFailed;
                break;
            }
            Err(e) => return Err(e),
        };
        drop(phi);
        let (s, j_new, x_new) = cache.expect("line search evaluated at least one probe");
        debug_assert_eq!(s, found.step);
        let v_new = v.add_scaled(-s, &g)?;
        let norm = control_norm(problem, &v_new.sub(&v)?, &x_new)?;
        rows.push(IterationRow {
            iter: k,
            cost: j,
            update_norm: norm,
            theta: None,
            picard_iters: None,
            descent_residual: None,
            cost_evals: Some(evals),
        });
        if let Some(r) = reference {
            let d = x_new
                .states()
                .iter()
                .filter_map(|st| problem.conserved_quantity(st))
                .map(|c| (c - r).abs())
                .fold(0.0, f64::max);
            drift = Some(drift.map_or(d, |m| m.max(d)));
        }
        last_step = Some(s);
        v = v_new;
        x = x_new;
        j = j_new;
        if norm <= stop_tol {
            status = RunStatus::Converged;
            break;
        }
    }
    Ok(RunRecord {
        solver: SolverKind::Gradient,
        rows,
        status,
        final_cost: j,
        final_control: v,
        final_theta: None,
        conservation_drift: drift,
    })
}
