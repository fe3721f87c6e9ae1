//! Mean-field-games crowd model: a controlled Fokker–Planck density on `[0, 1]`.
//!
//! Cell-centered finite volumes with no-flux walls. The advective flux at an
//! interior face is the average of the adjacent cell fluxes `v X`, which keeps
//! `A(t, v)` linear in `v`; its transpose defines the discrete gradient used in
//! the update formula, so the printed increment factor `∇Y + (v' + v)/2` holds
//! exactly under the density-weighted control pairing.

use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::control::{ControlShape, ControlValue};
use crate::error::{ControlError, Result};
use crate::grid::TimeGrid;
use crate::operator::{Operator, Tridiagonal};
use crate::problem::{ControlProblem, Scheme};
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfgParams {
    /// Constant price `p(t)`.
    pub p: f64,
    pub beta: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub horizon: f64,
    /// Diffusion coefficient ν.
    pub nu: f64,
    pub theta: f64,
}

impl Default for MfgParams {
    fn default() -> Self {
        Self {
            p: 1.0,
            beta: 0.8,
            c0: 1.0,
            c1: 0.1,
            c2: 1.0,
            horizon: 1.0,
            nu: 0.1,
            theta: 0.5,
        }
    }
}

#[derive(Debug)]
pub struct MeanFieldGame {
    params: MfgParams,
    grid: TimeGrid,
    h: f64,
    z: Vec<f64>,
    warned_negative: AtomicBool,
}

impl Clone for MeanFieldGame {
    fn clone(&self) -> Self {
        Self {
            params: self.params,
            grid: self.grid,
            h: self.h,
            z: self.z.clone(),
            warned_negative: AtomicBool::new(false),
        }
    }
}

pub fn build_mfg(params: &MfgParams, points: usize, steps: usize) -> Result<MeanFieldGame> {
    if points < 32 {
        return Err(ControlError::Construction(format!(
            "MFG grid needs at least 32 points, got {points}"
        )));
    }
    let positive = [params.p, params.beta, params.c0, params.c1, params.c2, params.horizon, params.nu];
    if positive.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(ControlError::Construction("MFG constants must be positive".into()));
    }
    let h = 1.0 / points as f64;
    Ok(MeanFieldGame {
        params: *params,
        grid: TimeGrid::new(params.horizon, steps)?,
        h,
        z: (0..points).map(|j| (j as f64 + 0.5) * h).collect(),
        warned_negative: AtomicBool::new(false),
    })
}

fn field(v: &ControlValue) -> &[f64] {
    match v {
        ControlValue::Field(f) => f,
        other => panic!("field control expected, got {:?}", other.shape()),
    }
}

impl MeanFieldGame {
    pub fn params(&self) -> &MfgParams {
        &self.params
    }

    pub fn cell_centers(&self) -> &[f64] {
        &self.z
    }

    pub fn cell_width(&self) -> f64 {
        self.h
    }

    pub fn with_grid(mut self, grid: TimeGrid) -> Self {
        self.grid = grid;
        self
    }

    /// Discrete `∇Y`: minus the transpose of the flux divergence.
    pub fn gradient(&self, y: &StateVector) -> Vec<f64> {
        let m = self.z.len();
        let inv = 0.5 / self.h;
        (0..m)
            .map(|j| {
                let hi = if j + 1 < m { y[j + 1].re } else { y[j].re };
                let lo = if j > 0 { y[j - 1].re } else { y[j].re };
                (hi - lo) * inv
            })
            .collect()
    }

    /// Flux divergence `div(q)` of a cell-centered flux density with no-flux walls.
    pub fn divergence(&self, q: &[f64]) -> Vec<f64> {
        let m = q.len();
        let face = |k: usize| -> f64 {
            // face k sits between cells k-1 and k
            if k == 0 || k == m {
                0.0
            } else {
                0.5 * (q[k - 1] + q[k])
            }
        };
        (0..m).map(|j| (face(j + 1) - face(j)) / self.h).collect()
    }

    fn density_check(&self, x: &StateVector) {
        if x.iter().any(|c| c.re < 0.0) && !self.warned_negative.swap(true, Ordering::Relaxed) {
            log::warn!("negative density encountered in the MFG running cost");
        }
    }
}

impl ControlProblem for MeanFieldGame {
    fn name(&self) -> &str {
        "mfg"
    }

    fn grid(&self) -> TimeGrid {
        self.grid
    }

    fn scheme(&self) -> Scheme {
        Scheme::ImplicitParabolic
    }

    fn control_shape(&self) -> ControlShape {
        ControlShape::Field(self.z.len())
    }

    fn state_weight(&self) -> f64 {
        self.h
    }

    /// Uniform unit density.
    fn initial_state(&self) -> StateVector {
        StateVector::from_element(self.z.len(), Complex64::new(1.0, 0.0))
    }

    /// `A(v) X = -ν ΔX + div(v X)`.
    fn operator(&self, _t: f64, v: &ControlValue) -> Operator {
        let v = field(v);
        let m = self.z.len();
        let diff = self.params.nu / (self.h * self.h);
        let adv = 0.5 / self.h;
        let mut diag = vec![Complex64::new(2.0 * diff, 0.0); m];
        diag[0] = Complex64::new(diff + adv * v[0], 0.0);
        diag[m - 1] = Complex64::new(diff - adv * v[m - 1], 0.0);
        let upper = (0..m - 1).map(|j| Complex64::new(-diff + adv * v[j + 1], 0.0)).collect();
        let lower = (0..m - 1).map(|j| Complex64::new(-diff - adv * v[j], 0.0)).collect();
        Operator::Tridiagonal(Tridiagonal::new(lower, diag, upper))
    }

    fn running_cost(&self, _t: f64, v: &ControlValue, x: &StateVector) -> f64 {
        self.density_check(x);
        let MfgParams { p, beta, c0, c1, c2, .. } = self.params;
        let v = field(v);
        self.h
            * self
                .z
                .iter()
                .zip(v)
                .zip(x.iter())
                .map(|((&z, &v), x)| {
                    let x = x.re;
                    p * (1.0 - beta * z) * x + c0 * z * x / (c1 + c2 * x) + 0.5 * v * v * x
                })
                .sum::<f64>()
    }

    fn running_cost_grad(&self, _t: f64, v: &ControlValue, x: &StateVector) -> StateVector {
        let MfgParams { p, beta, c0, c1, c2, .. } = self.params;
        let v = field(v);
        StateVector::from_iterator(
            self.z.len(),
            self.z.iter().zip(v).zip(x.iter()).map(|((&z, &v), x)| {
                let d = c1 + c2 * x.re;
                Complex64::new(p * (1.0 - beta * z) + c0 * c1 * z / (d * d) + 0.5 * v * v, 0.0)
            }),
        )
    }

    fn terminal_cost(&self, _x: &StateVector) -> f64 {
        0.0
    }

    fn terminal_cost_grad(&self, x: &StateVector) -> StateVector {
        StateVector::zeros(x.len())
    }

    fn xi_gradient(&self, _t: f64, v: &ControlValue, _x: &StateVector, y: &StateVector) -> ControlValue {
        let grad = self.gradient(y);
        ControlValue::Field(grad.iter().zip(field(v)).map(|(g, v)| g + v).collect())
    }

    /// Density-weighted pairing `Σ a b X Δz`.
    fn control_dot(&self, a: &ControlValue, b: &ControlValue, x: &StateVector) -> Result<f64> {
        let (a, b) = (field(a), field(b));
        if a.len() != b.len() || a.len() != x.len() {
            return Err(ControlError::Shape("MFG pairing needs matching field lengths".into()));
        }
        Ok(self.h * a.iter().zip(b).zip(x.iter()).map(|((a, b), x)| a * b * x.re).sum::<f64>())
    }

    /// `Δ(v', v) = ∇Y + (v' + v)/2`.
    fn delta(
        &self,
        _t: f64,
        v_new: &ControlValue,
        v: &ControlValue,
        _x: &StateVector,
        y: &StateVector,
    ) -> Result<ControlValue> {
        let (a, b) = (field(v_new), field(v));
        if a.len() != b.len() {
            return Err(ControlError::Shape("Δ needs controls of one shape".into()));
        }
        let grad = self.gradient(y);
        Ok(ControlValue::Field(
            grad.iter().zip(a.iter().zip(b)).map(|(g, (a, b))| g + 0.5 * (a + b)).collect(),
        ))
    }

    fn closed_form_vtheta(
        &self,
        _t: f64,
        v: &ControlValue,
        _x: &StateVector,
        y: &StateVector,
        theta: f64,
    ) -> Option<ControlValue> {
        let grad = self.gradient(y);
        Some(ControlValue::Field(
            field(v)
                .iter()
                .zip(grad)
                .map(|(v, g)| ((theta - 0.5) * v - g) / (theta + 0.5))
                .collect(),
        ))
    }

    fn conserved_quantity(&self, x: &StateVector) -> Option<f64> {
        Some(self.h * x.iter().map(|c| c.re).sum::<f64>())
    }

    fn diagnostics(&self, terminal: &StateVector) -> Vec<(&'static str, f64)> {
        let mass = self.h * terminal.iter().map(|c| c.re).sum::<f64>();
        let mean = self.h * terminal.iter().zip(&self.z).map(|(c, z)| c.re * z).sum::<f64>() / mass;
        let min = terminal.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        vec![("mass", mass), ("mean_position", mean), ("min_density", min)]
    }
}
