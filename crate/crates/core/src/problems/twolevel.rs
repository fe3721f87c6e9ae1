//! Two-level system with the structure of the Morse problem, small enough for
//! exact matrix-exponential comparisons.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bilinear::{BilinearQuantum, Terminal};
use crate::error::{ControlError, Result};
use crate::grid::TimeGrid;
use crate::operator::Operator;
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoLevelParams {
    /// Level splitting: `H₀ = diag(0, splitting)`.
    pub splitting: f64,
    pub horizon: f64,
    pub alpha: f64,
    pub theta: f64,
}

impl Default for TwoLevelParams {
    fn default() -> Self {
        Self {
            splitting: 1.0,
            horizon: 1.0,
            alpha: 1.0,
            theta: 1.0,
        }
    }
}

/// `H₀ = diag(0, 1)`, `μ = σx`, transfer `|0⟩ → |1⟩` with `G = 2 - 2 Re⟨X, X_target⟩`.
pub fn build_twolevel(params: &TwoLevelParams, steps: usize) -> Result<BilinearQuantum> {
    if !(params.alpha > 0.0 && params.horizon > 0.0) {
        return Err(ControlError::Construction("two-level parameters must be positive".into()));
    }
    let c = |re: f64| Complex64::new(re, 0.0);
    let h0 = nalgebra::DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(params.splitting)]);
    let mu = nalgebra::DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    Ok(BilinearQuantum {
        name: "twolevel".into(),
        grid: TimeGrid::new(params.horizon, steps)?,
        h0: Operator::Dense(h0),
        dipole: Operator::Dense(mu),
        weight: 1.0,
        alpha: params.alpha,
        terminal: Terminal::Overlap(StateVector::from_vec(vec![c(0.0), c(1.0)])),
        x0: StateVector::from_vec(vec![c(1.0), c(0.0)]),
    })
}
