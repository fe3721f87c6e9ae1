//! Orientation of a CO molecule treated as a rigid rotor, driven through its
//! polarizability and hyperpolarizability by a two-component field.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::control::{ControlShape, ControlValue};
use crate::error::{ControlError, Result};
use crate::grid::TimeGrid;
use crate::operator::Operator;
use crate::problem::{ControlProblem, Scheme};
use crate::state::StateVector;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoParams {
    /// Rotational constant.
    pub b: f64,
    pub lambda_perp: f64,
    pub lambda_par: f64,
    pub beta_par: f64,
    pub beta_perp: f64,
    pub horizon: f64,
    pub alpha: f64,
    pub theta: f64,
    pub basis_size: usize,
    /// Whether `H₀` carries the factor `B`.
    pub include_b: bool,
}

impl Default for CoParams {
    fn default() -> Self {
        Self {
            b: 1.93,
            lambda_perp: 11.73,
            lambda_par: 15.65,
            beta_par: 28.35,
            beta_perp: 6.64,
            horizon: 20.0 * std::f64::consts::PI / 1.93,
            alpha: 0.1,
            theta: 1e3,
            basis_size: 12,
            include_b: true,
        }
    }
}

/// Tridiagonal `cos γ` in the `m = 0` spherical-harmonic basis.
pub fn cos_gamma(size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| {
        let k = i.min(j) as f64;
        if i.abs_diff(j) == 1 {
            (k + 1.0) / ((2.0 * k + 1.0) * (2.0 * k + 3.0)).sqrt()
        } else {
            0.0
        }
    })
}

#[derive(Debug, Clone)]
pub struct CoOrientation {
    grid: TimeGrid,
    h0: DMatrix<Complex64>,
    mu1: DMatrix<Complex64>,
    mu2: DMatrix<Complex64>,
    cos: DMatrix<Complex64>,
    alpha: f64,
}

pub fn build_co(params: &CoParams, steps: usize) -> Result<CoOrientation> {
    if params.basis_size < 4 {
        return Err(ControlError::Construction("CO basis needs at least four rotational states".into()));
    }
    if !(params.alpha > 0.0 && params.horizon > 0.0 && params.b > 0.0) {
        return Err(ControlError::Construction("CO parameters must be positive".into()));
    }
    let n = params.basis_size;
    let c = cos_gamma(n);
    let c2 = &c * &c;
    let c3 = &c2 * &c;
    let id = DMatrix::<f64>::identity(n, n);
    let lambda = (&c2 * params.lambda_par + (&id - &c2) * params.lambda_perp) * 0.5;
    let beta = (&c3 * (params.beta_par - 3.0 * params.beta_perp) + &c * (3.0 * params.beta_perp)) / 6.0;
    let scale = if params.include_b { params.b } else { 1.0 };
    let h0 = DMatrix::from_fn(n, n, |i, j| if i == j { scale * (i * (i + 1)) as f64 } else { 0.0 });
    let complex = |m: DMatrix<f64>| m.map(|x| Complex64::new(x, 0.0));
    Ok(CoOrientation {
        grid: TimeGrid::new(params.horizon, steps)?,
        h0: complex(h0),
        mu1: complex(lambda * -0.5),
        mu2: complex(beta * -0.75),
        cos: complex(c),
        alpha: params.alpha,
    })
}

fn pair(v: &ControlValue) -> [f64; 2] {
    match v {
        ControlValue::Pair(p) => *p,
        other => panic!("two-component control expected, got {:?}", other.shape()),
    }
}

impl CoOrientation {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_grid(mut self, grid: TimeGrid) -> Self {
        self.grid = grid;
        self
    }

    /// `⟨cos γ⟩` in state `x`.
    pub fn orientation(&self, x: &StateVector) -> f64 {
        self.inner(x, &(&self.cos * x))
    }

    /// `(ξ₁, ξ₂) = (-Re⟨Y, iμ₁X⟩ + α, -Re⟨Y, iμ₂X⟩)`.
    pub fn xis(&self, x: &StateVector, y: &StateVector) -> (f64, f64) {
        let c1 = self.inner(y, &(&self.mu1 * x * I));
        let c2 = self.inner(y, &(&self.mu2 * x * I));
        (self.alpha - c1, -c2)
    }
}

impl ControlProblem for CoOrientation {
    fn name(&self) -> &str {
        "co"
    }

    fn grid(&self) -> TimeGrid {
        self.grid
    }

    fn scheme(&self) -> Scheme {
        Scheme::CrankNicolsonUnitary
    }

    fn control_shape(&self) -> ControlShape {
        ControlShape::Pair
    }

    /// Rotational ground state `|0⟩`.
    fn initial_state(&self) -> StateVector {
        let mut x = StateVector::zeros(self.h0.nrows());
        x[0] = Complex64::new(1.0, 0.0);
        x
    }

    /// `i [H₀ + (v₁² + v₂²) μ₁ + v₁² v₂ μ₂]`.
    fn operator(&self, _t: f64, v: &ControlValue) -> Operator {
        let [v1, v2] = pair(v);
        let w = v1 * v1 + v2 * v2;
        let p = v1 * v1 * v2;
        Operator::Dense((&self.h0 + &self.mu1 * Complex64::new(w, 0.0) + &self.mu2 * Complex64::new(p, 0.0)) * I)
    }

    fn running_cost(&self, _t: f64, v: &ControlValue, _x: &StateVector) -> f64 {
        let [v1, v2] = pair(v);
        self.alpha * (v1 * v1 + v2 * v2)
    }

    fn running_cost_grad(&self, _t: f64, _v: &ControlValue, x: &StateVector) -> StateVector {
        StateVector::zeros(x.len())
    }

    /// `G(X) = -⟨X, (I + cos γ) X⟩`. The identity shift makes `G` concave and is
    /// constant along the norm-preserving flow.
    fn terminal_cost(&self, x: &StateVector) -> f64 {
        -self.inner(x, x) - self.orientation(x)
    }

    fn terminal_cost_grad(&self, x: &StateVector) -> StateVector {
        (x + &self.cos * x) * Complex64::new(-2.0, 0.0)
    }

    fn xi_gradient(&self, _t: f64, v: &ControlValue, x: &StateVector, y: &StateVector) -> ControlValue {
        let [v1, v2] = pair(v);
        let (xi1, xi2) = self.xis(x, y);
        ControlValue::Pair([2.0 * xi1 * v1 + 2.0 * xi2 * v1 * v2, 2.0 * xi1 * v2 + xi2 * v1 * v1])
    }

    /// `Δ = ξ₁ (v + v') + ξ₂ ((v₁ + v'₁) v'₂, v₁²)`.
    fn delta(
        &self,
        _t: f64,
        v_new: &ControlValue,
        v: &ControlValue,
        x: &StateVector,
        y: &StateVector,
    ) -> Result<ControlValue> {
        let ([a1, a2], [b1, b2]) = (pair(v_new), pair(v));
        let (xi1, xi2) = self.xis(x, y);
        Ok(ControlValue::Pair([
            xi1 * (b1 + a1) + xi2 * (b1 + a1) * a2,
            xi1 * (b2 + a2) + xi2 * b1 * b1,
        ]))
    }

    fn conserved_quantity(&self, x: &StateVector) -> Option<f64> {
        Some(self.inner(x, x).sqrt())
    }

    fn diagnostics(&self, terminal: &StateVector) -> Vec<(&'static str, f64)> {
        vec![("orientation", self.orientation(terminal))]
    }
}
