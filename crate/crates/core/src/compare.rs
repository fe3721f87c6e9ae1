//! Side-by-side runs of the monotonic and gradient solvers.

use std::fmt;

use crate::control::ControlTrajectory;
use crate::error::Result;
use crate::gradient::{run_gradient, LineSearchConfig};
use crate::monotonic::{run, MonotonicConfig};
use crate::problem::ControlProblem;
use crate::record::{RunRecord, SolverKind};

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub monotonic_final: f64,
    pub gradient_final: f64,
    pub winner: SolverKind,
    /// Iterations inspected for an early gradient lead.
    pub early_window: usize,
    pub gradient_leads_early: bool,
    /// First iteration at which the monotonic cost drops below the gradient
    /// cost after the gradient solver had been ahead.
    pub overtake_iteration: Option<usize>,
}

impl CompareReport {
    /// Compares `J(v^k)` of both runs iteration by iteration; ties go to monotonic.
    pub fn from_records(mono: &RunRecord, grad: &RunRecord, early_window: usize) -> Self {
        let (cm, cg) = (mono.costs(), grad.costs());
        let at = |c: &[f64], k: usize| c[k.min(c.len() - 1)];
        let horizon = cm.len().max(cg.len());
        let gradient_leads_early = (1..=early_window.min(horizon - 1)).any(|k| at(&cg, k) < at(&cm, k));
        let mut behind = false;
        let mut overtake_iteration = None;
        for k in 1..horizon {
            let (m, g) = (at(&cm, k), at(&cg, k));
            if g < m {
                behind = true;
            } else if behind && m < g {
                overtake_iteration = Some(k);
                break;
            }
        }
        Self {
            monotonic_final: mono.final_cost,
            gradient_final: grad.final_cost,
            winner: if mono.final_cost <= grad.final_cost {
                SolverKind::Monotonic
            } else {
                SolverKind::Gradient
            },
            early_window,
            gradient_leads_early,
            overtake_iteration,
        }
    }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "monotonic_final_J = {}", self.monotonic_final)?;
        writeln!(f, "gradient_final_J = {}", self.gradient_final)?;
        writeln!(f, "lower_final_J = {}", self.winner)?;
        writeln!(
            f,
            "gradient_leads_in_first_{}_iterations = {}",
            self.early_window, self.gradient_leads_early
        )?;
        match self.overtake_iteration {
            Some(k) => writeln!(f, "monotonic_overtakes_at_iteration = {k}"),
            None => writeln!(f, "monotonic_overtakes_at_iteration = none"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub monotonic: RunRecord,
    pub gradient: RunRecord,
    pub report: CompareReport,
}

/// Runs both solvers from the same `v0` with the same iteration budget, on two threads.
pub fn compare<P: ControlProblem + ?Sized>(
    problem: &P,
    v0: &ControlTrajectory,
    mono: &MonotonicConfig,
    line_search: &LineSearchConfig,
    budget: usize,
    early_window: usize,
) -> Result<Comparison> {
    let mono = MonotonicConfig {
        outer_max: budget,
        ..*mono
    };
    let stop_tol = mono.stop_tol;
    let (m, g) = std::thread::scope(|s| {
        let handle = s.spawn(|| run(problem, v0, &mono));
        let g = run_gradient(problem, v0, line_search, budget, stop_tol);
        (handle.join().expect("monotonic solver thread panicked"), g)
    });
    let (monotonic, gradient) = (m?, g?);
    let report = CompareReport::from_records(&monotonic, &gradient, early_window);
    Ok(Comparison {
        monotonic,
        gradient,
        report,
    })
}
