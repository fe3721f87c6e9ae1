use num_complex::Complex64;

use crate::control::{ControlShape, ControlValue};
use crate::grid::TimeGrid;
use crate::operator::Operator;
use crate::problem::{ControlProblem, Scheme};
use crate::state::StateVector;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Terminal cost of a quantum problem. Both variants are concave in the state.
#[derive(Debug, Clone)]
pub enum Terminal {
    /// `G(X) = -⟨X, O X⟩` with `O` positive semi-definite.
    Observable(Operator),
    /// `G(X) = 2 - 2 Re⟨X, X_target⟩`, equal to `‖X - X_target‖²` on the unit sphere.
    Overlap(StateVector),
}

/// Schrödinger-type control problem `∂t X + i (H₀ + v μ) X = 0` with
/// running cost `α v²`.
#[derive(Debug, Clone)]
pub struct BilinearQuantum {
    pub(crate) name: String,
    pub(crate) grid: TimeGrid,
    pub(crate) h0: Operator,
    pub(crate) dipole: Operator,
    pub(crate) weight: f64,
    pub(crate) alpha: f64,
    pub(crate) terminal: Terminal,
    pub(crate) x0: StateVector,
}

impl BilinearQuantum {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn terminal(&self) -> &Terminal {
        &self.terminal
    }

    pub fn dipole(&self) -> &Operator {
        &self.dipole
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.h0
    }

    /// `Re⟨Y, iμX⟩`, the coupling that drives the update formulas.
    pub fn coupling(&self, x: &StateVector, y: &StateVector) -> f64 {
        self.inner(y, &(self.dipole.apply(x) * I))
    }

    /// Same problem on a different time grid.
    pub fn with_grid(mut self, grid: TimeGrid) -> Self {
        self.grid = grid;
        self
    }
}

fn scalar(v: &ControlValue) -> f64 {
    match v {
        ControlValue::Scalar(s) => *s,
        other => panic!("scalar control expected, got {:?}", other.shape()),
    }
}

impl ControlProblem for BilinearQuantum {
    fn name(&self) -> &str {
        &self.name
    }

    fn grid(&self) -> TimeGrid {
        self.grid
    }

    fn scheme(&self) -> Scheme {
        Scheme::CrankNicolsonUnitary
    }

    fn control_shape(&self) -> ControlShape {
        ControlShape::Scalar
    }

    fn state_weight(&self) -> f64 {
        self.weight
    }

    fn initial_state(&self) -> StateVector {
        self.x0.clone()
    }

    fn operator(&self, _t: f64, v: &ControlValue) -> Operator {
        self.h0.combine(I, &self.dipole, I * scalar(v))
    }

    fn running_cost(&self, _t: f64, v: &ControlValue, _x: &StateVector) -> f64 {
        let v = scalar(v);
        self.alpha * v * v
    }

    fn running_cost_grad(&self, _t: f64, _v: &ControlValue, x: &StateVector) -> StateVector {
        StateVector::zeros(x.len())
    }

    fn terminal_cost(&self, x: &StateVector) -> f64 {
        match &self.terminal {
            Terminal::Observable(o) => -self.inner(x, &o.apply(x)),
            Terminal::Overlap(target) => 2.0 - 2.0 * self.inner(x, target),
        }
    }

    fn terminal_cost_grad(&self, x: &StateVector) -> StateVector {
        match &self.terminal {
            Terminal::Observable(o) => o.apply(x) * Complex64::new(-2.0, 0.0),
            Terminal::Overlap(target) => target * Complex64::new(-2.0, 0.0),
        }
    }

    fn xi_gradient(&self, _t: f64, v: &ControlValue, x: &StateVector, y: &StateVector) -> ControlValue {
        ControlValue::Scalar(-self.coupling(x, y) + 2.0 * self.alpha * scalar(v))
    }

    /// `Δ(v', v) = -Re⟨Y, iμX⟩ + α (v' + v)`.
    fn delta(
        &self,
        _t: f64,
        v_new: &ControlValue,
        v: &ControlValue,
        x: &StateVector,
        y: &StateVector,
    ) -> crate::error::Result<ControlValue> {
        Ok(ControlValue::Scalar(
            -self.coupling(x, y) + self.alpha * (scalar(v_new) + scalar(v)),
        ))
    }

    fn closed_form_vtheta(
        &self,
        _t: f64,
        v: &ControlValue,
        x: &StateVector,
        y: &StateVector,
        theta: f64,
    ) -> Option<ControlValue> {
        let v = scalar(v);
        Some(ControlValue::Scalar(
            ((theta - self.alpha) * v + self.coupling(x, y)) / (theta + self.alpha),
        ))
    }

    fn conserved_quantity(&self, x: &StateVector) -> Option<f64> {
        Some(self.inner(x, x).sqrt())
    }

    fn diagnostics(&self, terminal: &StateVector) -> Vec<(&'static str, f64)> {
        match &self.terminal {
            Terminal::Observable(o) => vec![("observable", self.inner(terminal, &o.apply(terminal)))],
            Terminal::Overlap(target) => {
                let diff = terminal - target;
                let overlap = terminal.dotc(target) * self.weight;
                vec![
                    ("distance_squared", self.inner(&diff, &diff)),
                    ("fidelity", overlap.norm_sqr()),
                ]
            }
        }
    }
}
