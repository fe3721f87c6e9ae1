//! Per-iteration logs shared by both solvers, and their CSV form.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::control::{ControlTrajectory, ControlValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Monotonic,
    Gradient,
}

impl SolverKind {
    pub fn tag(&self) -> &'static str {
        match self {
            SolverKind::Monotonic => "monotonic",
            SolverKind::Gradient => "gradient",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    /// The update norm dropped below the stopping tolerance.
    Converged,
    IterationCap,
    /// θ grew past its ceiling; the record holds the last accepted iterate.
    ThetaOverflow,
    LineSearchFailed,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Converged => "converged",
            RunStatus::IterationCap => "iteration-cap",
            RunStatus::ThetaOverflow => "theta-overflow",
            RunStatus::LineSearchFailed => "line-search-failed",
        })
    }
}

/// One accepted update `v^k → v^{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow {
    pub iter: usize,
    /// `J(v^k)`.
    pub cost: f64,
    /// `‖v^{k+1} - v^k‖` in the discrete `L²(0, T; E)` norm.
    pub update_norm: f64,
    pub theta: Option<f64>,
    pub picard_iters: Option<usize>,
    /// `J(v^{k+1}) - J(v^k) + θ_k ‖v^{k+1} - v^k‖²`, nonpositive up to slack.
    pub descent_residual: Option<f64>,
    /// Cost evaluations spent on this update (line-search probes).
    pub cost_evals: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub solver: SolverKind,
    pub rows: Vec<IterationRow>,
    pub status: RunStatus,
    pub final_cost: f64,
    pub final_control: ControlTrajectory,
    pub final_theta: Option<f64>,
    /// Largest deviation of the scheme's conserved quantity from its initial value.
    pub conservation_drift: Option<f64>,
}

impl RunRecord {
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    /// `J(v^0), …, J(v^K)`.
    pub fn costs(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.rows.iter().map(|r| r.cost).collect();
        c.push(self.final_cost);
        c
    }

    /// Mean line-search cost evaluations per iteration, if recorded.
    pub fn mean_cost_evals(&self) -> Option<f64> {
        let evals: Vec<usize> = self.rows.iter().filter_map(|r| r.cost_evals).collect();
        if evals.is_empty() {
            None
        } else {
            Some(evals.iter().sum::<usize>() as f64 / evals.len() as f64)
        }
    }
}

pub const CONVERGENCE_HEADER: &str = "iter,J,update_norm,theta,picard_iters,descent_residual,solver";

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the rows of each record under one header.
pub fn write_convergence_csv<W: Write>(out: &mut W, records: &[&RunRecord]) -> io::Result<()> {
    writeln!(out, "{CONVERGENCE_HEADER}")?;
    for record in records {
        for r in &record.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.iter,
                r.cost,
                r.update_norm,
                opt(r.theta),
                opt(r.picard_iters),
                opt(r.descent_residual),
                record.solver
            )?;
        }
    }
    Ok(())
}

/// One line per control interval: midpoint time, then the control components.
pub fn write_control_csv<W: Write>(out: &mut W, v: &ControlTrajectory) -> io::Result<()> {
    let grid = v.grid();
    let header: Vec<String> = match v.value(0) {
        ControlValue::Scalar(_) => vec!["v".into()],
        ControlValue::Pair(_) => vec!["v1".into(), "v2".into()],
        ControlValue::Field(f) => (0..f.len()).map(|j| format!("v{j}")).collect(),
    };
    writeln!(out, "t,{}", header.join(","))?;
    for (n, value) in v.values().iter().enumerate() {
        let row: Vec<String> = value.as_slice().iter().map(|x| x.to_string()).collect();
        writeln!(out, "{},{}", grid.midpoint(n), row.join(","))?;
    }
    Ok(())
}
