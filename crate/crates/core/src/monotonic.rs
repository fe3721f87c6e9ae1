//! The monotonic iteration.
//!
//! Given `v^k` and its adjoint `Y^k`, the next control solves the coupled system
//! `v^{k+1}(t) = V_θ(t, v^k(t), X^{k+1}(t), Y^k(t))`, `X^{k+1} = X_{v^{k+1}}`,
//! where `V_θ` is the root of `Δ(v', v) = -θ (v' - v)`. Every accepted step then
//! satisfies `J(v^{k+1}) - J(v^k) ≤ -θ ‖v^{k+1} - v^k‖²`.

use serde::{Deserialize, Serialize};

use crate::control::{ControlTrajectory, ControlValue};
use crate::error::{ControlError, Result};
use crate::functional::{control_norm, cost, pairing_integral};
use crate::gradient::compute_gradient;
use crate::problem::ControlProblem;
use crate::propagate::{implicit_step, propagate_adjoint, propagate_forward};
use crate::record::{IterationRow, RunRecord, RunStatus, SolverKind};
use crate::state::{AdjointTrajectory, StateTrajectory, StateVector};

/// θ may not exceed this multiple of its initial value.
pub const THETA_CEILING: f64 = 1e12;

/// Consecutive growing Picard increments that count as divergence.
const GROWTH_STREAK: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PicardMode {
    /// Fixed point over whole trajectories: `u_{l+1} = V_θ(v^k, X_{u_l}, Y^k)`.
    #[default]
    Trajectory,
    /// Resolves `v'` interval by interval during a single forward sweep.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonotonicConfig {
    pub theta_init: f64,
    pub theta_growth: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub outer_max: usize,
    pub stop_tol: f64,
    pub monotonicity_slack: f64,
    pub picard_mode: PicardMode,
}

impl Default for MonotonicConfig {
    fn default() -> Self {
        Self {
            theta_init: 1.0,
            theta_growth: 2.0,
            picard_tol: 1e-10,
            picard_max: 200,
            outer_max: 100,
            stop_tol: 1e-8,
            monotonicity_slack: 1e-9,
            picard_mode: PicardMode::Trajectory,
        }
    }
}

impl MonotonicConfig {
    pub fn with_theta(theta: f64) -> Self {
        Self {
            theta_init: theta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.theta_init, self.picard_tol, self.stop_tol, self.monotonicity_slack];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(ControlError::Config("θ and all tolerances must be positive".into()));
        }
        if !(self.theta_growth > 1.0) {
            return Err(ControlError::Config("theta_growth must exceed 1".into()));
        }
        if self.picard_max == 0 {
            return Err(ControlError::Config("picard_max must be positive".into()));
        }
        Ok(())
    }
}

fn euclid(v: &ControlValue) -> f64 {
    v.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Tracks successive increments and flags sustained growth.
struct Contraction {
    previous: f64,
    streak: usize,
}

impl Contraction {
    fn new() -> Self {
        Self {
            previous: f64::INFINITY,
            streak: 0,
        }
    }

    fn diverging(&mut self, diff: f64) -> bool {
        if !diff.is_finite() {
            return true;
        }
        self.streak = if diff > self.previous { self.streak + 1 } else { 0 };
        self.previous = diff;
        self.streak >= GROWTH_STREAK
    }
}

/// Generic Picard iteration `h ← -Δ(v + h, v)/θ` from `h = 0`. Returns the root
/// `v' = v + h` and the iteration count. The tolerance is relative to `1 + ‖v'‖`.
#[allow(clippy::too_many_arguments)]
pub fn picard_vtheta<P: ControlProblem + ?Sized>(
    problem: &P,
    t: f64,
    v: &ControlValue,
    x: &StateVector,
    y: &StateVector,
    theta: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(ControlValue, usize)> {
    if !(theta > 0.0) {
        return Err(ControlError::Config(format!("θ must be positive, got {theta}")));
    }
    let mut h = ControlValue::zeros(v.shape());
    let mut watch = Contraction::new();
    for m in 1..=max_iter {
        let trial = v.add_scaled(1.0, &h)?;
        let next = problem.delta(t, &trial, v, x, y)?.scaled(-1.0 / theta);
        let diff = euclid(&next.sub(&h)?);
        h = next;
        let candidate = v.add_scaled(1.0, &h)?;
        if diff <= tol * (1.0 + euclid(&candidate)) {
            return Ok((candidate, m));
        }
        if watch.diverging(diff) {
            break;
        }
    }
    Err(ControlError::ThetaTooSmall { theta })
}

/// `V_θ(t, v, X, Y)`: the problem's closed form when present, Picard otherwise.
pub fn solve_vtheta<P: ControlProblem + ?Sized>(
    problem: &P,
    t: f64,
    v: &ControlValue,
    x: &StateVector,
    y: &StateVector,
    theta: f64,
    cfg: &MonotonicConfig,
) -> Result<(ControlValue, usize)> {
    if !(theta > 0.0) {
        return Err(ControlError::Config(format!("θ must be positive, got {theta}")));
    }
    if let Some(value) = problem.closed_form_vtheta(t, v, x, y, theta) {
        if !value.is_finite() {
            return Err(ControlError::NonFinite("closed-form update"));
        }
        return Ok((value, 0));
    }
    picard_vtheta(problem, t, v, x, y, theta, cfg.picard_tol, cfg.picard_max)
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub control: ControlTrajectory,
    pub states: StateTrajectory,
    /// Trajectory sweeps, or the largest per-interval count in sweep mode.
    pub picard_iters: usize,
}

/// Solves the coupled system for `v^{k+1}` given `v^k` and its adjoint.
pub fn monotonic_step<P: ControlProblem + ?Sized>(
    problem: &P,
    v: &ControlTrajectory,
    y: &AdjointTrajectory,
    theta: f64,
    cfg: &MonotonicConfig,
) -> Result<StepOutcome> {
    v.grid().check_same(y.grid())?;
    match cfg.picard_mode {
        PicardMode::Trajectory => trajectory_step(problem, v, y, theta, cfg),
        PicardMode::Sweep => sweep_step(problem, v, y, theta, cfg),
    }
}

fn l2_euclid(a: &ControlTrajectory, b: &ControlTrajectory) -> Result<f64> {
    let dt = a.grid().dt();
    let mut total = 0.0;
    for (p, q) in a.values().iter().zip(b.values()) {
        let d = p.sub(q)?;
        total += dt * d.euclidean_dot(&d)?;
    }
    Ok(total.sqrt())
}

fn trajectory_step<P: ControlProblem + ?Sized>(
    problem: &P,
    v: &ControlTrajectory,
    y: &AdjointTrajectory,
    theta: f64,
    cfg: &MonotonicConfig,
) -> Result<StepOutcome> {
    let grid = *v.grid();
    let scale = 1.0 + l2_euclid(v, &ControlTrajectory::constant(grid, ControlValue::zeros(v.value(0).shape())))?;
    let mut u = v.clone();
    let mut watch = Contraction::new();
    for sweep in 1..=cfg.picard_max {
        let x = propagate_forward(problem, &u)?;
        let mut values = Vec::with_capacity(grid.steps());
        for n in 0..grid.steps() {
            let (value, _) = solve_vtheta(problem, grid.midpoint(n), v.value(n), &x.pairing(n), y.pairing(n), theta, cfg)?;
            values.push(value);
        }
        let next = ControlTrajectory::new(grid, values)?;
        let diff = l2_euclid(&next, &u)?;
        u = next;
        if diff <= cfg.picard_tol * scale {
            let states = propagate_forward(problem, &u)?;
            return Ok(StepOutcome {
                control: u,
                states,
                picard_iters: sweep,
            });
        }
        if watch.diverging(diff) {
            break;
        }
    }
    Err(ControlError::ThetaTooSmall { theta })
}

fn sweep_step<P: ControlProblem + ?Sized>(
    problem: &P,
    v: &ControlTrajectory,
    y: &AdjointTrajectory,
    theta: f64,
    cfg: &MonotonicConfig,
) -> Result<StepOutcome> {
    let grid = *v.grid();
    let dt = grid.dt();
    let w = problem
        .scheme()
        .implicitness()
        .ok_or(ControlError::Unsupported(problem.scheme()))?;
    let mut states = Vec::with_capacity(grid.steps() + 1);
    states.push(problem.initial_state());
    let mut values = Vec::with_capacity(grid.steps());
    let mut most = 0;
    for n in 0..grid.steps() {
        let t = grid.midpoint(n);
        let x_n: &StateVector = &states[n];
        let mut u = v.value(n).clone();
        let mut watch = Contraction::new();
        let mut settled = None;
        for m in 1..=cfg.picard_max {
            let x_next = implicit_step(problem, n, t, dt, w, &u, x_n)?;
            let paired = x_n * num_complex::Complex64::new(1.0 - w, 0.0) + &x_next * num_complex::Complex64::new(w, 0.0);
            let (next, _) = solve_vtheta(problem, t, v.value(n), &paired, y.pairing(n), theta, cfg)?;
            let diff = euclid(&next.sub(&u)?);
            u = next;
            if diff <= cfg.picard_tol * (1.0 + euclid(&u)) {
                settled = Some(m);
                break;
            }
            if watch.diverging(diff) {
                break;
            }
        }
        let m = settled.ok_or(ControlError::ThetaTooSmall { theta })?;
        most = most.max(m);
        let x_next = implicit_step(problem, n, t, dt, w, &u, x_n)?;
        states.push(x_next);
        values.push(u);
    }
    let control = ControlTrajectory::new(grid, values)?;
    let states = propagate_forward(problem, &control)?;
    Ok(StepOutcome {
        control,
        states,
        picard_iters: most,
    })
}

/// `‖Δ(v, v)‖` over `[0, T]`: the norm of `∇J(v)` in the discrete pairing.
pub fn criticality_residual<P: ControlProblem + ?Sized>(problem: &P, v: &ControlTrajectory) -> Result<f64> {
    let x = propagate_forward(problem, v)?;
    let y = propagate_adjoint(problem, v, &x)?;
    let g = compute_gradient(problem, v, &x, &y)?;
    control_norm(problem, &g, &x)
}

fn drift<P: ControlProblem + ?Sized>(problem: &P, x: &StateTrajectory, reference: Option<f64>) -> Option<f64> {
    let reference = reference?;
    x.states()
        .iter()
        .filter_map(|s| problem.conserved_quantity(s))
        .map(|c| (c - reference).abs())
        .reduce(f64::max)
}

/// Runs the monotonic iteration from `v0` for at most `cfg.outer_max` updates.
pub fn run<P: ControlProblem + ?Sized>(
    problem: &P,
    v0: &ControlTrajectory,
    cfg: &MonotonicConfig,
) -> Result<RunRecord> {
    cfg.validate()?;
    if !v0.values().iter().all(|v| v.is_finite()) {
        return Err(ControlError::NonFinite("initial control"));
    }
    let ceiling = THETA_CEILING * cfg.theta_init;
    let reference = problem.conserved_quantity(&problem.initial_state());
    let mut v = v0.clone();
    let mut x = propagate_forward(problem, &v)?;
    let mut j = cost(problem, &v, &x)?;
    let mut worst_drift = drift(problem, &x, reference);
    let mut theta = cfg.theta_init;
    let mut rows = Vec::new();
    let mut status = RunStatus::IterationCap;

    'outer: for k in 0..cfg.outer_max {
        let y = propagate_adjoint(problem, &v, &x)?;
        let accepted = loop {
            if theta > ceiling {
                status = RunStatus::ThetaOverflow;
                break 'outer;
            }
            let step = match monotonic_step(problem, &v, &y, theta, cfg) {
                Ok(step) => step,
                Err(ControlError::ThetaTooSmall { .. }) => {
                    log::debug!("iteration {k}: Picard did not contract at θ = {theta:e}");
                    theta *= cfg.theta_growth;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let j_new = cost(problem, &step.control, &step.states)?;
            let dv = step.control.sub(&v)?;
            let norm = control_norm(problem, &dv, &step.states)?;
            let residual = j_new - j + theta * norm * norm;
            let slack = cfg.monotonicity_slack * (1.0 + j.abs());
            let condition = monotonicity_integral(problem, &v, &step, &y, &dv)?;
            if residual > slack || condition > slack {
                log::debug!("iteration {k}: descent bound violated by {residual:e} at θ = {theta:e}");
                theta *= cfg.theta_growth;
                continue;
            }
            break (step, j_new, norm, residual);
        };
        let (step, j_new, norm, residual) = accepted;
        rows.push(IterationRow {
            iter: k,
            cost: j,
            update_norm: norm,
            theta: Some(theta),
            picard_iters: Some(step.picard_iters),
            descent_residual: Some(residual),
            cost_evals: None,
        });
        if let (Some(a), Some(b)) = (worst_drift, drift(problem, &step.states, reference)) {
            worst_drift = Some(a.max(b));
        }
        v = step.control;
        x = step.states;
        j = j_new;
        if norm <= cfg.stop_tol {
            status = RunStatus::Converged;
            break;
        }
    }
    Ok(RunRecord {
        solver: SolverKind::Monotonic,
        rows,
        status,
        final_cost: j,
        final_control: v,
        final_theta: Some(theta),
        conservation_drift: worst_drift,
    })
}

/// `∫ dot(Δ(v^{k+1}, v^k), v^{k+1} - v^k) dt` with the new state and the old adjoint.
fn monotonicity_integral<P: ControlProblem + ?Sized>(
    problem: &P,
    v: &ControlTrajectory,
    step: &StepOutcome,
    y: &AdjointTrajectory,
    dv: &ControlTrajectory,
) -> Result<f64> {
    let grid = *v.grid();
    let values = (0..grid.steps())
        .map(|n| {
            problem.delta(grid.midpoint(n), step.control.value(n), v.value(n), &step.states.pairing(n), y.pairing(n))
        })
        .collect::<Result<Vec<_>>>()?;
    let delta = ControlTrajectory::new(grid, values)?;
    pairing_integral(problem, &delta, dv, &step.states)
}
