//! Vibrational control of an O–H bond in a Morse potential.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bilinear::{BilinearQuantum, Terminal};
use crate::error::{ControlError, Result};
use crate::grid::TimeGrid;
use crate::operator::{Operator, Tridiagonal};
use crate::state::StateVector;

/// Model constants in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MorseParams {
    pub d0: f64,
    pub beta: f64,
    pub z_eq: f64,
    pub z_star: f64,
    pub z_target: f64,
    pub gamma0: f64,
    pub mu0: f64,
    /// Coefficient of `-∂²/∂z²` in `H₀`.
    pub m: f64,
    pub horizon: f64,
    pub alpha: f64,
    pub theta: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Default for MorseParams {
    fn default() -> Self {
        Self {
            d0: 0.1994,
            beta: 1.189,
            z_eq: 1.821,
            z_star: 0.6,
            z_target: 2.5,
            gamma0: 25.0,
            mu0: 3.088,
            m: 2.8694e-4,
            horizon: 131000.0,
            alpha: 1.0,
            theta: 1e-2,
            z_min: 0.5,
            z_max: 8.0,
        }
    }
}

impl MorseParams {
    /// `V(z) = D₀ (exp(-β (z - z')) - 1)² - D₀`.
    pub fn potential(&self, z: f64) -> f64 {
        let e = (-self.beta * (z - self.z_eq)).exp() - 1.0;
        self.d0 * e * e - self.d0
    }

    /// `μ(z) = μ₀ z exp(-z / z*)`.
    pub fn dipole(&self, z: f64) -> f64 {
        self.mu0 * z * (-z / self.z_star).exp()
    }

    /// `O(z) = γ₀/√π exp(-γ₀² (z - z₀)²)`.
    pub fn observable(&self, z: f64) -> f64 {
        let u = z - self.z_target;
        self.gamma0 / std::f64::consts::PI.sqrt() * (-self.gamma0 * self.gamma0 * u * u).exp()
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            self.d0, self.beta, self.z_eq, self.z_star, self.z_target, self.gamma0, self.mu0, self.m,
            self.horizon, self.alpha,
        ];
        if positive.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(ControlError::Construction("Morse parameters must be positive".into()));
        }
        if self.z_max <= self.z_min {
            return Err(ControlError::Construction("empty spatial box".into()));
        }
        Ok(())
    }
}

/// Interior nodes of the Dirichlet box `[z_min, z_max]`.
pub fn spatial_grid(params: &MorseParams, points: usize) -> (Vec<f64>, f64) {
    let h = (params.z_max - params.z_min) / (points as f64 + 1.0);
    ((1..=points).map(|j| params.z_min + j as f64 * h).collect(), h)
}

/// Three-point `H₀ = -m ∂² + V` on the interior nodes.
pub fn hamiltonian(params: &MorseParams, points: usize) -> Tridiagonal {
    let (z, h) = spatial_grid(params, points);
    let kinetic = params.m / (h * h);
    let diag = z
        .iter()
        .map(|&z| Complex64::new(2.0 * kinetic + params.potential(z), 0.0))
        .collect();
    let off = vec![Complex64::new(-kinetic, 0.0); points - 1];
    Tridiagonal::new(off.clone(), diag, off)
}

/// Lowest eigenpair of the grid Hamiltonian, normalized in the weighted norm.
pub fn ground_state(params: &MorseParams, points: usize) -> Result<(f64, StateVector)> {
    let (_, h) = spatial_grid(params, points);
    let tri = hamiltonian(params, points);
    let dense = DMatrix::from_fn(points, points, |i, j| {
        if i == j {
            tri.diag[i].re
        } else if i == j + 1 {
            tri.lower[j].re
        } else if j == i + 1 {
            tri.upper[i].re
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::try_new(dense, 1e-14, 0)
        .ok_or_else(|| ControlError::Construction("diagonalization of H₀ did not converge".into()))?;
    let (k, &energy) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| ControlError::Construction("no eigenvalues".into()))?;
    let column = eig.eigenvectors.column(k);
    let norm = (h * column.iter().map(|c| c * c).sum::<f64>()).sqrt();
    let sign = if column.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let state = StateVector::from_iterator(
        points,
        column.iter().map(|c| Complex64::new(sign * c / norm, 0.0)),
    );
    Ok((energy, state))
}

/// Morse problem on `points` interior nodes and `steps` time steps.
pub fn build_morse(params: &MorseParams, points: usize, steps: usize) -> Result<BilinearQuantum> {
    if points < 64 {
        return Err(ControlError::Construction(format!(
            "Morse grid needs at least 64 points, got {points}"
        )));
    }
    params.validate()?;
    let grid = TimeGrid::new(params.horizon, steps)?;
    let (z, h) = spatial_grid(params, points);
    let (_, x0) = ground_state(params, points)?;
    let dipole = Tridiagonal::diagonal(z.iter().map(|&z| Complex64::new(params.dipole(z), 0.0)).collect());
    let observable =
        Tridiagonal::diagonal(z.iter().map(|&z| Complex64::new(params.observable(z), 0.0)).collect());
    Ok(BilinearQuantum {
        name: "morse".into(),
        grid,
        h0: Operator::Tridiagonal(hamiltonian(params, points)),
        dipole: Operator::Tridiagonal(dipole),
        weight: h,
        alpha: params.alpha,
        terminal: Terminal::Observable(Operator::Tridiagonal(observable)),
        x0,
    })
}
