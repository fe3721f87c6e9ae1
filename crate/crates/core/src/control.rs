//! Control values and piecewise-constant control trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{ControlError, Result};
use crate::grid::TimeGrid;

/// Shape of the control space attached to a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlShape {
    Scalar,
    Pair,
    /// Distributed control sampled on a spatial grid of the given size.
    Field(usize),
}

impl ControlShape {
    pub fn len(&self) -> usize {
        match self {
            ControlShape::Scalar => 1,
            ControlShape::Pair => 2,
            ControlShape::Field(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One sample of the control, `v(t) ∈ E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ControlValue {
    Scalar(f64),
    Pair([f64; 2]),
    Field(Vec<f64>),
}

impl ControlValue {
    pub fn zeros(shape: ControlShape) -> Self {
        Self::constant(shape, 0.0)
    }

    pub fn constant(shape: ControlShape, c: f64) -> Self {
        match shape {
            ControlShape::Scalar => ControlValue::Scalar(c),
            ControlShape::Pair => ControlValue::Pair([c, c]),
            ControlShape::Field(n) => ControlValue::Field(vec![c; n]),
        }
    }

    pub fn from_slice(shape: ControlShape, data: &[f64]) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(ControlError::Shape(format!(
                "{} entries for control shape {shape:?}",
                data.len()
            )));
        }
        Ok(match shape {
            ControlShape::Scalar => ControlValue::Scalar(data[0]),
            ControlShape::Pair => ControlValue::Pair([data[0], data[1]]),
            ControlShape::Field(_) => ControlValue::Field(data.to_vec()),
        })
    }

    pub fn shape(&self) -> ControlShape {
        match self {
            ControlValue::Scalar(_) => ControlShape::Scalar,
            ControlValue::Pair(_) => ControlShape::Pair,
            ControlValue::Field(v) => ControlShape::Field(v.len()),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        match self {
            ControlValue::Scalar(x) => std::slice::from_ref(x),
            ControlValue::Pair(p) => p,
            ControlValue::Field(v) => v,
        }
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        match self {
            ControlValue::Scalar(x) => std::slice::from_mut(x),
            ControlValue::Pair(p) => p,
            ControlValue::Field(v) => v,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }

    fn check_shape(&self, other: &ControlValue) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(ControlError::Shape(format!(
                "control shapes {:?} and {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &ControlValue) -> Result<ControlValue> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (o, b) in out.as_mut_slice().iter_mut().zip(other.as_slice()) {
            *o += c * b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &ControlValue) -> Result<ControlValue> {
        self.add_scaled(-1.0, other)
    }

    pub fn scaled(&self, c: f64) -> ControlValue {
        let mut out = self.clone();
        out.as_mut_slice().iter_mut().for_each(|x| *x *= c);
        out
    }

    /// Unweighted Euclidean pairing of the coefficient vectors.
    pub fn euclidean_dot(&self, other: &ControlValue) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self.as_slice().iter().zip(other.as_slice()).map(|(a, b)| a * b).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Piecewise-constant control: `values[n]` holds on `[t_n, t_{n+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlTrajectory {
    grid: TimeGrid,
    values: Vec<ControlValue>,
}

impl ControlTrajectory {
    pub fn new(grid: TimeGrid, values: Vec<ControlValue>) -> Result<Self> {
        if values.len() != grid.steps() {
            return Err(ControlError::Shape(format!(
                "{} control values for {} intervals",
                values.len(),
                grid.steps()
            )));
        }
        if let Some(first) = values.first() {
            let shape = first.shape();
            if values.iter().any(|v| v.shape() != shape) {
                return Err(ControlError::Shape("mixed control shapes in trajectory".into()));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ControlError::NonFinite("control trajectory"));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TimeGrid, value: ControlValue) -> Self {
        Self {
            grid,
            values: vec![value; grid.steps()],
        }
    }

    pub fn from_fn(grid: TimeGrid, f: impl FnMut(usize) -> ControlValue) -> Result<Self> {
        Self::new(grid, (0..grid.steps()).map(f).collect())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[ControlValue] {
        &self.values
    }

    pub fn value(&self, n: usize) -> &ControlValue {
        &self.values[n]
    }

    pub fn shape(&self) -> Option<ControlShape> {
        self.values.first().map(ControlValue::shape)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `self + c * other`, interval by interval.
    pub fn add_scaled(&self, c: f64, other: &ControlTrajectory) -> Result<ControlTrajectory> {
        self.grid.check_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.add_scaled(c, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    pub fn sub(&self, other: &ControlTrajectory) -> Result<ControlTrajectory> {
        self.add_scaled(-1.0, other)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.max_abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_checks_shapes() {
        let a = ControlValue::Pair([1.0, 2.0]);
        let b = ControlValue::Scalar(1.0);
        assert!(a.add_scaled(1.0, &b).is_err());
        let c = a.add_scaled(-2.0, &ControlValue::Pair([0.5, 1.0])).unwrap();
        assert_eq!(c, ControlValue::Pair([0.0, 0.0]));
        assert_eq!(a.euclidean_dot(&a).unwrap(), 5.0);
    }

    #[test]
    fn trajectory_validates_length_and_finiteness() {
        let grid = TimeGrid::new(1.0, 3).unwrap();
        assert!(ControlTrajectory::new(grid, vec![ControlValue::Scalar(0.0); 2]).is_err());
        let bad = vec![
            ControlValue::Scalar(0.0),
            ControlValue::Scalar(f64::NAN),
            ControlValue::Scalar(0.0),
        ];
        assert!(ControlTrajectory::new(grid, bad).is_err());
        let mixed = vec![
            ControlValue::Scalar(0.0),
            ControlValue::Pair([0.0, 0.0]),
            ControlValue::Scalar(0.0),
        ];
        assert!(ControlTrajectory::new(grid, mixed).is_err());
    }
}
