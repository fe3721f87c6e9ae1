//! Forward state and backward adjoint propagation.
//!
//! The implicit schemes advance
//! `(I + ϑ dt A_n) X_{n+1} = (I - (1-ϑ) dt A_n) X_n + dt B_n`
//! with `A_n = A(t_{n+1/2}, v_n)`. The adjoint recursion is the exact transpose
//! of that step map, so that discrete gradients and the increment bound hold to
//! solver precision rather than to O(dt).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::control::{ControlTrajectory, ControlValue};
use crate::error::{ControlError, Result};
use crate::problem::ControlProblem;
use crate::state::{AdjointTrajectory, StateTrajectory, StateVector};

fn check_control<P: ControlProblem + ?Sized>(problem: &P, v: &ControlTrajectory) -> Result<()> {
    match v.shape() {
        Some(shape) if shape == problem.control_shape() => Ok(()),
        other => Err(ControlError::Shape(format!(
            "control of shape {other:?} for problem '{}' expecting {:?}",
            problem.name(),
            problem.control_shape()
        ))),
    }
}

/// One implicit step on interval `n`.
pub(crate) fn implicit_step<P: ControlProblem + ?Sized>(
    problem: &P,
    n: usize,
    t: f64,
    dt: f64,
    implicitness: f64,
    v: &ControlValue,
    x: &StateVector,
) -> Result<StateVector> {
    let a = problem.operator(t, v);
    let mut rhs = if implicitness < 1.0 {
        x - a.apply(x) * Complex64::new((1.0 - implicitness) * dt, 0.0)
    } else {
        x.clone()
    };
    if let Some(b) = problem.source(t, v) {
        rhs += b * Complex64::new(dt, 0.0);
    }
    a.identity_plus(Complex64::new(implicitness * dt, 0.0))
        .solve(&rhs)
        .ok_or(ControlError::SingularStep { step: n })
}

/// Solves the state equation for `v`; `X[0] = X₀`.
pub fn propagate_forward<P: ControlProblem + ?Sized>(
    problem: &P,
    v: &ControlTrajectory,
) -> Result<StateTrajectory> {
    check_control(problem, v)?;
    let grid = *v.grid();
    let dt = grid.dt();
    let mut states = Vec::with_capacity(grid.steps() + 1);
    states.push(problem.initial_state());
    match problem.scheme().implicitness() {
        Some(w) => {
            for n in 0..grid.steps() {
                let next = implicit_step(problem, n, grid.midpoint(n), dt, w, v.value(n), &states[n])?;
                states.push(next);
            }
            Ok(StateTrajectory::new(grid, states, w))
        }
        None => {
            for n in 0..grid.steps() {
                let t = grid.midpoint(n);
                if problem.source(t, v.value(n)).is_some() {
                    return Err(ControlError::Unsupported(problem.scheme()));
                }
                let a = problem.operator(t, v.value(n)).to_dense();
                let step = expm(&(a * Complex64::new(-dt, 0.0)));
                let next = &step * &states[n];
                states.push(next);
            }
            Ok(StateTrajectory::new(grid, states, 0.5))
        }
    }
}

/// Discrete adjoint of [`propagate_forward`]; `Y[N] = ∇G(X[N])`.
pub fn propagate_adjoint<P: ControlProblem + ?Sized>(
    problem: &P,
    v: &ControlTrajectory,
    x: &StateTrajectory,
) -> Result<AdjointTrajectory> {
    check_control(problem, v)?;
    v.grid().check_same(x.grid())?;
    let w = problem
        .scheme()
        .implicitness()
        .ok_or(ControlError::Unsupported(problem.scheme()))?;
    let grid = *v.grid();
    let dt = grid.dt();
    let steps = grid.steps();
    let mut nodes = vec![StateVector::zeros(0); steps + 1];
    let mut intervals = vec![StateVector::zeros(0); steps];
    nodes[steps] = problem.terminal_cost_grad(x.terminal());
    for n in (0..steps).rev() {
        let t = grid.midpoint(n);
        let a_adj = problem.operator(t, v.value(n)).adjoint();
        let grad_f = problem.running_cost_grad(t, v.value(n), &x.pairing(n));
        let rhs = &nodes[n + 1] + &grad_f * Complex64::new(w * dt, 0.0);
        let lambda = a_adj
            .identity_plus(Complex64::new(w * dt, 0.0))
            .solve(&rhs)
            .ok_or(ControlError::SingularStep { step: n })?;
        let mut y = lambda.clone();
        if w < 1.0 {
            let c = Complex64::new((1.0 - w) * dt, 0.0);
            y -= a_adj.apply(&lambda) * c;
            y += grad_f * c;
        }
        nodes[n] = y;
        intervals[n] = lambda;
    }
    Ok(AdjointTrajectory::new(grid, nodes, intervals))
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub(crate) fn expm(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    let norm = m.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=20 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}
