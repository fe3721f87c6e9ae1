use serde::{Deserialize, Serialize};

use crate::error::{ControlError, Result};

/// Uniform discretization of `[0, T]` into `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(ControlError::Config("time grid needs at least one step".into()));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(ControlError::Config(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Node time `t_n = n dt`.
    pub fn node(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    /// Midpoint of the interval `[t_n, t_{n+1})`.
    pub fn midpoint(&self, n: usize) -> f64 {
        (n as f64 + 0.5) * self.dt()
    }

    pub(crate) fn check_same(&self, other: &TimeGrid) -> Result<()> {
        if self.steps != other.steps || (self.horizon - other.horizon).abs() > 1e-12 * self.horizon {
            return Err(ControlError::GridMismatch {
                expected: self.steps,
                found: other.steps,
                horizon: self.horizon,
            });
        }
        Ok(())
    }
}
