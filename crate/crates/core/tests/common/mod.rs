#![allow(dead_code)]

use monotonic_control::operator::{Operator, Tridiagonal};
use monotonic_control::{ControlProblem, ControlShape, ControlValue, Scheme, StateVector, TimeGrid};
use num_complex::Complex64;

fn scalar(v: &ControlValue) -> f64 {
    match v {
        ControlValue::Scalar(s) => *s,
        _ => panic!("scalar control expected"),
    }
}

/// `∂t x + a x = b v`, `J = ∫ α v² dt - g x(T)`, backward Euler.
///
/// The step map is `x_{n+1} = r (x_n + dt b v_n)` with `r = 1/(1 + dt a)`, so
/// `J` is quadratic in the control and its minimizer is known in closed form.
#[derive(Debug, Clone)]
pub struct LinearToy {
    pub grid: TimeGrid,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub g: f64,
    pub x0: f64,
}

impl LinearToy {
    pub fn new(steps: usize) -> Self {
        Self {
            grid: TimeGrid::new(1.0, steps).unwrap(),
            a: 0.7,
            b: 1.3,
            alpha: 0.5,
            g: 2.0,
            x0: 1.0,
        }
    }

    /// `v_n = g b r^{N-n} / (2α)`, from `∂J/∂v_n = 2α dt v_n - g dt b r^{N-n} = 0`.
    pub fn minimizer(&self) -> Vec<f64> {
        let n = self.grid.steps();
        let r = 1.0 / (1.0 + self.grid.dt() * self.a);
        (0..n).map(|k| self.g * self.b * r.powi((n - k) as i32) / (2.0 * self.alpha)).collect()
    }

    /// Direct evaluation of `J` through the step map.
    pub fn cost_of(&self, v: &[f64]) -> f64 {
        let dt = self.grid.dt();
        let r = 1.0 / (1.0 + dt * self.a);
        let mut x = self.x0;
        let mut running = 0.0;
        for &u in v {
            x = r * (x + dt * self.b * u);
            running += dt * self.alpha * u * u;
        }
        running - self.g * x
    }
}

impl ControlProblem for LinearToy {
    fn name(&self) -> &str {
        "linear-toy"
    }

    fn grid(&self) -> TimeGrid {
        self.grid
    }

    fn scheme(&self) -> Scheme {
        Scheme::ImplicitParabolic
    }

    fn control_shape(&self) -> ControlShape {
        ControlShape::Scalar
    }

    fn initial_state(&self) -> StateVector {
        StateVector::from_element(1, Complex64::new(self.x0, 0.0))
    }

    fn operator(&self, _t: f64, _v: &ControlValue) -> Operator {
        Operator::Tridiagonal(Tridiagonal::diagonal(vec![Complex64::new(self.a, 0.0)]))
    }

    fn source(&self, _t: f64, v: &ControlValue) -> Option<StateVector> {
        Some(StateVector::from_element(1, Complex64::new(self.b * scalar(v), 0.0)))
    }

    fn running_cost(&self, _t: f64, v: &ControlValue, _x: &StateVector) -> f64 {
        self.alpha * scalar(v) * scalar(v)
    }

    fn running_cost_grad(&self, _t: f64, _v: &ControlValue, x: &StateVector) -> StateVector {
        StateVector::zeros(x.len())
    }

    fn terminal_cost(&self, x: &StateVector) -> f64 {
        -self.g * x[0].re
    }

    fn terminal_cost_grad(&self, x: &StateVector) -> StateVector {
        StateVector::from_element(x.len(), Complex64::new(-self.g, 0.0))
    }

    fn xi_gradient(&self, _t: f64, v: &ControlValue, _x: &StateVector, y: &StateVector) -> ControlValue {
        ControlValue::Scalar(self.b * y[0].re + 2.0 * self.alpha * scalar(v))
    }
}

/// `exp(-i H τ)` for a real symmetric 2×2 `H = [[p, q], [q, s]]`.
pub fn expm_2x2(p: f64, q: f64, s: f64, tau: f64) -> [[Complex64; 2]; 2] {
    let mean = 0.5 * (p + s);
    let half = 0.5 * (p - s);
    let w = (half * half + q * q).sqrt();
    let phase = Complex64::from_polar(1.0, -mean * tau);
    let (c, sn) = ((w * tau).cos(), (w * tau).sin());
    let k = if w > 0.0 { sn / w } else { tau };
    let i = Complex64::new(0.0, 1.0);
    [
        [phase * (c - i * k * half), phase * (-i * k * q)],
        [phase * (-i * k * q), phase * (c + i * k * half)],
    ]
}

/// Exact piecewise-constant propagation of the two-level system
/// `H = diag(0, splitting) + v σx` from `|0⟩`.
pub fn twolevel_exact(splitting: f64, dt: f64, controls: &[f64]) -> [Complex64; 2] {
    let mut x = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    for &v in controls {
        let u = expm_2x2(0.0, v, splitting, dt);
        x = [u[0][0] * x[0] + u[0][1] * x[1], u[1][0] * x[0] + u[1][1] * x[1]];
    }
    x
}

pub fn scalars(v: &monotonic_control::ControlTrajectory) -> Vec<f64> {
    v.values().iter().map(scalar).collect()
}
