//! Cost functional, the pairing Ξ, its increment factor Δ and the increment bound.

use crate::control::{ControlTrajectory, ControlValue};
use crate::error::{ControlError, Result};
use crate::problem::ControlProblem;
use crate::propagate::{propagate_adjoint, propagate_forward};
use crate::quadrature::gauss_legendre_unit;
use crate::state::{StateTrajectory, StateVector};

/// Gauss–Legendre nodes used for the λ-integral in [`delta_generic`].
pub const DEFAULT_LAMBDA_NODES: usize = 4;

/// `∫ F dt` by the midpoint rule on each control interval, F evaluated at the
/// scheme's paired state.
pub fn running_cost<P: ControlProblem + ?Sized>(
    problem: &P,
    v: &ControlTrajectory,
    x: &StateTrajectory,
) -> Result<f64> {
    v.grid().check_same(x.grid())?;
    let grid = v.grid();
    let dt = grid.dt();
    let total = (0..grid.steps())
        .map(|n| dt * problem.running_cost(grid.midpoint(n), v.value(n), &x.pairing(n)))
        .sum::<f64>();
    if !total.is_finite() {
        return Err(ControlError::NonFinite("running cost"));
    }
    Ok(total)
}

/// `J(v) = ∫ F(t, v, X) dt + G(X(T))` for a forward solution `x` of `v`.
pub fn cost<P: ControlProblem + ?Sized>(
    problem: &P,
    v: &ControlTrajectory,
    x: &StateTrajectory,
) -> Result<f64> {
    let j = running_cost(problem, v, x)? + problem.terminal_cost(x.terminal());
    if !j.is_finite() {
        return Err(ControlError::NonFinite("cost"));
    }
    Ok(j)
}

/// Forward solve followed by [`cost`].
pub fn evaluate_cost<P: ControlProblem + ?Sized>(problem: &P, v: &ControlTrajectory) -> Result<f64> {
    let x = propagate_forward(problem, v)?;
    cost(problem, v, &x)
}

/// `Ξ(t, v, X, Y) = -⟨Y, A(t,v) X⟩ + ⟨Y, B(t,v)⟩ + F(t, v, X)`.
pub fn xi<P: ControlProblem + ?Sized>(
    problem: &P,
    t: f64,
    v: &ControlValue,
    x: &StateVector,
    y: &StateVector,
) -> f64 {
    let mut value = -problem.inner(y, &problem.apply_a(t, v, x)) + problem.running_cost(t, v, x);
    if let Some(b) = problem.source(t, v) {
        value += problem.inner(y, &b);
    }
    value
}

/// `Δ(v', v) = ∫₀¹ ∇_w Ξ(w)|_{w = v + λ(v' - v)} dλ` by `nodes`-point Gauss–Legendre.
pub fn delta_generic<P: ControlProblem + ?Sized>(
    problem: &P,
    t: f64,
    v_new: &ControlValue,
    v: &ControlValue,
    x: &StateVector,
    y: &StateVector,
    nodes: usize,
) -> Result<ControlValue> {
    let step = v_new.sub(v)?;
    let mut acc = ControlValue::zeros(v.shape());
    for (lambda, weight) in gauss_legendre_unit(nodes) {
        let w = v.add_scaled(lambda, &step)?;
        let g = problem.xi_gradient(t, &w, x, y);
        if !g.is_finite() {
            return Err(ControlError::NonFinite("gradient of Ξ"));
        }
        acc = acc.add_scaled(weight, &g)?;
    }
    Ok(acc)
}

/// Υ of the increment bound at one time: `Ξ(v') - Ξ(v)` evaluated with the new
/// state `x_new` and the adjoint `y` of the old control.
pub fn upsilon<P: ControlProblem + ?Sized>(
    problem: &P,
    t: f64,
    v: &ControlValue,
    v_new: &ControlValue,
    y: &StateVector,
    x_new: &StateVector,
) -> Result<f64> {
    if v.shape() != v_new.shape() {
        return Err(ControlError::Shape("Υ needs controls of one shape".into()));
    }
    let da = problem.apply_a(t, v_new, x_new) - problem.apply_a(t, v, x_new);
    let mut value = -problem.inner(y, &da) + problem.running_cost(t, v_new, x_new)
        - problem.running_cost(t, v, x_new);
    match (problem.source(t, v_new), problem.source(t, v)) {
        (Some(b1), Some(b0)) => value += problem.inner(y, &(b1 - b0)),
        (Some(b1), None) => value += problem.inner(y, &b1),
        (None, Some(b0)) => value -= problem.inner(y, &b0),
        (None, None) => {}
    }
    Ok(value)
}

/// Both sides of `J(v') - J(v) ≤ ∫ Υ dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementBound {
    pub lhs: f64,
    pub rhs: f64,
}

impl IncrementBound {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

pub fn increment_bound_check<P: ControlProblem + ?Sized>(
    problem: &P,
    v: &ControlTrajectory,
    v_new: &ControlTrajectory,
) -> Result<IncrementBound> {
    v.grid().check_same(v_new.grid())?;
    let x = propagate_forward(problem, v)?;
    let y = propagate_adjoint(problem, v, &x)?;
    let x_new = propagate_forward(problem, v_new)?;
    let lhs = cost(problem, v_new, &x_new)? - cost(problem, v, &x)?;
    let grid = v.grid();
    let mut rhs = 0.0;
    for n in 0..grid.steps() {
        rhs += grid.dt()
            * upsilon(
                problem,
                grid.midpoint(n),
                v.value(n),
                v_new.value(n),
                y.pairing(n),
                &x_new.pairing(n),
            )?;
    }
    Ok(IncrementBound { lhs, rhs })
}

/// Quadrature of `dot(a_n, b_n)` with each interval's paired state.
pub fn pairing_integral<P: ControlProblem + ?Sized>(
    problem: &P,
    a: &ControlTrajectory,
    b: &ControlTrajectory,
    x: &StateTrajectory,
) -> Result<f64> {
    a.grid().check_same(b.grid())?;
    a.grid().check_same(x.grid())?;
    let dt = a.grid().dt();
    let mut total = 0.0;
    for n in 0..a.len() {
        total += dt * problem.control_dot(a.value(n), b.value(n), &x.pairing(n))?;
    }
    Ok(total)
}

/// Discrete `L²(0, T; E)` norm of a control trajectory under the problem's pairing.
pub fn control_norm<P: ControlProblem + ?Sized>(
    problem: &P,
    v: &ControlTrajectory,
    x: &StateTrajectory,
) -> Result<f64> {
    Ok(pairing_integral(problem, v, v, x)?.max(0.0).sqrt())
}
