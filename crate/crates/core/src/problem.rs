//! The control-problem contract.
//!
//! A problem supplies the evolution `∂t X + A(t, v) X = B(t, v)`, the costs `F`
//! and `G` (both concave in the state), and the v-gradient of the pairing
//! `Ξ(v) = -⟨Y, A(t, v) X⟩ + ⟨Y, B(t, v)⟩ + F(t, v, X)`. Everything else
//! (propagation, increments, the monotonic update) is built on top of it.

use serde::{Deserialize, Serialize};

use crate::control::{ControlShape, ControlValue};
use crate::error::Result;
use crate::functional::{delta_generic, DEFAULT_LAMBDA_NODES};
use crate::grid::TimeGrid;
use crate::operator::Operator;
use crate::state::{weighted_inner, StateVector};

/// Time-stepping scheme used by the propagators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Crank–Nicolson for `A = i·H` with Hermitian `H`; norm preserving.
    CrankNicolsonUnitary,
    /// Backward Euler for real advection–diffusion; mass preserving under no-flux walls.
    ImplicitParabolic,
    /// Exact per-step matrix exponential. Forward only, small dense systems.
    DenseExponentialOracle,
}

impl Scheme {
    /// Weight ϑ of the one-step scheme `(I + ϑ dt A) X_{n+1} = (I - (1-ϑ) dt A) X_n + dt B`.
    pub fn implicitness(&self) -> Option<f64> {
        match self {
            Scheme::CrankNicolsonUnitary => Some(0.5),
            Scheme::ImplicitParabolic => Some(1.0),
            Scheme::DenseExponentialOracle => None,
        }
    }
}

pub trait ControlProblem: Send + Sync {
    fn name(&self) -> &str;

    /// Default time grid of this instance.
    fn grid(&self) -> TimeGrid;

    fn scheme(&self) -> Scheme;

    fn control_shape(&self) -> ControlShape;

    /// Uniform quadrature weight of the state inner product.
    fn state_weight(&self) -> f64 {
        1.0
    }

    fn initial_state(&self) -> StateVector;

    /// `A(t, v)` as a matrix.
    fn operator(&self, t: f64, v: &ControlValue) -> Operator;

    /// `B(t, v)`; `None` means zero.
    fn source(&self, _t: f64, _v: &ControlValue) -> Option<StateVector> {
        None
    }

    fn running_cost(&self, t: f64, v: &ControlValue, x: &StateVector) -> f64;

    fn running_cost_grad(&self, t: f64, v: &ControlValue, x: &StateVector) -> StateVector;

    fn terminal_cost(&self, x: &StateVector) -> f64;

    fn terminal_cost_grad(&self, x: &StateVector) -> StateVector;

    /// `∇_v Ξ(t, v, X, Y)` expressed through [`ControlProblem::control_dot`] at state `x`.
    fn xi_gradient(
        &self,
        t: f64,
        v: &ControlValue,
        x: &StateVector,
        y: &StateVector,
    ) -> ControlValue;

    /// Scalar product of the control space. May depend on the paired state.
    fn control_dot(&self, a: &ControlValue, b: &ControlValue, _x: &StateVector) -> Result<f64> {
        a.euclidean_dot(b)
    }

    /// Increment factor `Δ(v', v; t, X, Y)` with `Δ · (v' - v) = Ξ(v') - Ξ(v)`.
    fn delta(
        &self,
        t: f64,
        v_new: &ControlValue,
        v: &ControlValue,
        x: &StateVector,
        y: &StateVector,
    ) -> Result<ControlValue> {
        delta_generic(self, t, v_new, v, x, y, DEFAULT_LAMBDA_NODES)
    }

    /// Closed-form solution of `Δ(v', v) = -θ (v' - v)` when one is known.
    fn closed_form_vtheta(
        &self,
        _t: f64,
        _v: &ControlValue,
        _x: &StateVector,
        _y: &StateVector,
        _theta: f64,
    ) -> Option<ControlValue> {
        None
    }

    /// Quantity the scheme conserves exactly (norm, mass), if any.
    fn conserved_quantity(&self, _x: &StateVector) -> Option<f64> {
        None
    }

    /// Extra terminal diagnostics for reports.
    fn diagnostics(&self, _terminal: &StateVector) -> Vec<(&'static str, f64)> {
        Vec::new()
    }

    fn inner(&self, a: &StateVector, b: &StateVector) -> f64 {
        weighted_inner(self.state_weight(), a, b)
    }

    fn apply_a(&self, t: f64, v: &ControlValue, x: &StateVector) -> StateVector {
        self.operator(t, v).apply(x)
    }

    fn apply_a_adjoint(&self, t: f64, v: &ControlValue, y: &StateVector) -> StateVector {
        self.operator(t, v).adjoint().apply(y)
    }
}
