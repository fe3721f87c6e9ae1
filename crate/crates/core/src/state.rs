//! Discretized states and their time trajectories.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::grid::TimeGrid;

/// A state in the discretized space `V`. Real problems keep zero imaginary parts.
pub type StateVector = DVector<Complex64>;

/// `w · Re Σ conj(a_j) b_j`, the realified inner product with uniform quadrature weight `w`.
pub fn weighted_inner(weight: f64, a: &StateVector, b: &StateVector) -> f64 {
    weight
        * a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.re * y.re + x.im * y.im)
            .sum::<f64>()
}

pub fn real_state(values: impl IntoIterator<Item = f64>) -> StateVector {
    StateVector::from_vec(values.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
}

/// Forward solution `X_n`, n = 0..=N.
///
/// `implicitness` is the weight ϑ of the one-step scheme; the state paired
/// with the control on interval n is `(1 - ϑ) X_n + ϑ X_{n+1}`.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    grid: TimeGrid,
    states: Vec<StateVector>,
    implicitness: f64,
}

impl StateTrajectory {
    pub(crate) fn new(grid: TimeGrid, states: Vec<StateVector>, implicitness: f64) -> Self {
        debug_assert_eq!(states.len(), grid.steps() + 1);
        Self {
            grid,
            states,
            implicitness,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn state(&self, n: usize) -> &StateVector {
        &self.states[n]
    }

    pub fn terminal(&self) -> &StateVector {
        &self.states[self.grid.steps()]
    }

    pub fn implicitness(&self) -> f64 {
        self.implicitness
    }

    /// State representing interval `n` in the cost quadrature and the update formulas.
    pub fn pairing(&self, n: usize) -> StateVector {
        let w = self.implicitness;
        if w == 1.0 {
            self.states[n + 1].clone()
        } else {
            self.states[n].scale(1.0 - w) + self.states[n + 1].scale(w)
        }
    }
}

/// Backward adjoint solution.
///
/// `nodes[n]` approximates `Y(t_n)` with `nodes[N] = ∇G(X_N)` exactly; `intervals[n]`
/// is the multiplier of the step equation on interval n, which is what enters the
/// increment functional.
#[derive(Debug, Clone)]
pub struct AdjointTrajectory {
    grid: TimeGrid,
    nodes: Vec<StateVector>,
    intervals: Vec<StateVector>,
}

impl AdjointTrajectory {
    pub(crate) fn new(grid: TimeGrid, nodes: Vec<StateVector>, intervals: Vec<StateVector>) -> Self {
        debug_assert_eq!(nodes.len(), grid.steps() + 1);
        debug_assert_eq!(intervals.len(), grid.steps());
        Self {
            grid,
            nodes,
            intervals,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[StateVector] {
        &self.nodes
    }

    pub fn node(&self, n: usize) -> &StateVector {
        &self.nodes[n]
    }

    pub fn pairing(&self, n: usize) -> &StateVector {
        &self.intervals[n]
    }
}
