//! Monotonically convergent optimal control of evolution equations whose costs
//! are concave in the state, with an optimal-step gradient baseline.
//!
//! A [`ControlProblem`] describes `∂t X + A(t, v) X = B(t, v)` together with the
//! running and terminal costs. [`propagate`] solves the state and adjoint
//! equations, [`monotonic`] runs the monotonic iteration and [`gradient`] the
//! line-search baseline. Both solvers return a [`RunRecord`].

pub mod checks;
pub mod compare;
pub mod control;
pub mod error;
pub mod functional;
pub mod gradient;
pub mod grid;
pub mod monotonic;
pub mod operator;
pub mod problem;
pub mod problems;
pub mod propagate;
pub mod quadrature;
pub mod record;
pub mod state;

pub use control::{ControlShape, ControlTrajectory, ControlValue};
pub use error::{ControlError, Result};
pub use grid::TimeGrid;
pub use problem::{ControlProblem, Scheme};
pub use record::{IterationRow, RunRecord, RunStatus, SolverKind};
pub use state::{AdjointTrajectory, StateTrajectory, StateVector};
