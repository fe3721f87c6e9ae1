use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use monotonic_control::checks::{
    factorization_error, gradient_fd_error, selftest as invariant_suite, seeded, FlipDeltaSign, PerturbAdjointTerminal,
    Subject,
};
use monotonic_control::compare::{compare as compare_solvers, CompareReport};
use monotonic_control::functional::running_cost;
use monotonic_control::gradient::run_gradient;
use monotonic_control::monotonic::run as run_monotonic;
use monotonic_control::problems::{build_twolevel, TwoLevelParams};
use monotonic_control::propagate::propagate_forward;
use monotonic_control::record::{write_control_csv, write_convergence_csv};
use monotonic_control::{ControlProblem, RunRecord, SolverKind};

use crate::config::{ProblemSpec, RunConfig};
use crate::CliError;

fn prepare(config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<(RunConfig, PathBuf), CliError> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("output"));
    fs::create_dir_all(&dir)?;
    Ok((cfg, dir))
}

pub fn run(config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<u8, CliError> {
    let (cfg, dir) = prepare(config, out, seed)?;
    let built = cfg.problem.build()?;
    let problem = built.as_dyn();
    let v0 = cfg.initial_trajectory(problem);
    let mut records = Vec::new();
    if cfg.solver.monotonic() {
        records.push(run_monotonic(problem, &v0, &cfg.monotonic)?);
    }
    if cfg.solver.gradient() {
        records.push(run_gradient(problem, &v0, &cfg.line_search, cfg.iterations, cfg.monotonic.stop_tol)?);
    }
    write_outputs(&dir, &cfg, problem, &records)?;
    for r in &records {
        println!("{}: {} after {} iterations, J = {}", r.solver, r.status, r.iterations(), r.final_cost);
    }
    Ok(0)
}

pub fn compare(config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<u8, CliError> {
    let (cfg, dir) = prepare(config, out, seed)?;
    let built = cfg.problem.build()?;
    let problem = built.as_dyn();
    let v0 = cfg.initial_trajectory(problem);
    let result = compare_solvers(problem, &v0, &cfg.monotonic, &cfg.line_search, cfg.iterations, cfg.early_window)?;
    let records = [result.monotonic, result.gradient];
    write_outputs(&dir, &cfg, problem, &records)?;
    fs::write(dir.join("compare.txt"), compare_text(&cfg.problem, &result.report))?;
    print!("{}", result.report);
    Ok(0)
}

fn compare_text(spec: &ProblemSpec, report: &CompareReport) -> String {
    format!("problem = {}\n{report}", spec.name())
}

fn write_outputs(dir: &Path, cfg: &RunConfig, problem: &dyn ControlProblem, records: &[RunRecord]) -> Result<(), CliError> {
    let refs: Vec<&RunRecord> = records.iter().collect();
    let mut csv = BufWriter::new(File::create(dir.join("convergence.csv"))?);
    write_convergence_csv(&mut csv, &refs)?;
    csv.flush()?;
    let both = records.len() > 1;
    for r in records {
        let name = match (r.solver, both) {
            (SolverKind::Gradient, true) => "final_control_gradient.csv",
            _ => "final_control.csv",
        };
        let mut f = BufWriter::new(File::create(dir.join(name))?);
        write_control_csv(&mut f, &r.final_control)?;
        f.flush()?;
    }
    fs::write(dir.join("summary.txt"), summary(cfg, problem, records)?)?;
    Ok(())
}

fn summary(cfg: &RunConfig, problem: &dyn ControlProblem, records: &[RunRecord]) -> Result<String, CliError> {
    let mut s = String::new();
    let grid = problem.grid();
    let _ = writeln!(s, "problem = {}", cfg.problem.name());
    let _ = writeln!(s, "horizon = {}", grid.horizon());
    let _ = writeln!(s, "steps = {}", grid.steps());
    let _ = writeln!(s, "initial_control = {}", cfg.initial_control);
    let _ = writeln!(s, "seed = {}", cfg.seed);
    for r in records {
        let _ = writeln!(s, "\n[{}]", r.solver);
        let _ = writeln!(s, "stop_reason = {}", r.status);
        let _ = writeln!(s, "iterations = {}", r.iterations());
        let _ = writeln!(s, "final_J = {}", r.final_cost);
        if let Some(theta) = r.final_theta {
            let _ = writeln!(s, "final_theta = {theta}");
        }
        if let Some(evals) = r.mean_cost_evals() {
            let _ = writeln!(s, "mean_cost_evals_per_iteration = {evals}");
        }
        if let Some(d) = r.conservation_drift {
            let _ = writeln!(s, "conservation_drift = {d:e}");
        }
        let x = propagate_forward(problem, &r.final_control)?;
        let diagnostics = problem.diagnostics(x.terminal());
        for (name, value) in &diagnostics {
            let _ = writeln!(s, "{name} = {value}");
        }
        if cfg.report_both_costs {
            let running = running_cost(problem, &r.final_control, &x)?;
            let _ = writeln!(s, "running_cost = {running}");
            let _ = writeln!(s, "terminal_cost = {}", problem.terminal_cost(x.terminal()));
            match &cfg.problem {
                // minimized functional is J̃ = -⟨O⟩ + ∫αv², reported also in maximization form
                ProblemSpec::Morse { .. } => {
                    let _ = writeln!(s, "J_tilde = {}", r.final_cost);
                    let _ = writeln!(s, "minus_J_tilde = {}", -r.final_cost);
                }
                // J̃ with the projector onto the target as observable
                ProblemSpec::TwoLevel { .. } => {
                    let fidelity = diagnostics.iter().find(|(n, _)| *n == "fidelity").map_or(f64::NAN, |d| d.1);
                    let _ = writeln!(s, "J = {}", r.final_cost);
                    let _ = writeln!(s, "J_tilde = {}", running - fidelity);
                }
                _ => {}
            }
        }
    }
    Ok(s)
}

pub fn selftest(seed: u64) -> Result<u8, CliError> {
    let outcomes = invariant_suite(seed)?;
    // each injected fault must be caught by the check aimed at it
    let twolevel = || build_twolevel(&TwoLevelParams::default(), 64);
    let flipped = Subject::new(FlipDeltaSign(twolevel()?), 0.0, 0.8);
    let caught = factorization_error(&mut seeded(seed), &flipped, 20)? > 1e-10;
    let perturbed = Subject::new(
        PerturbAdjointTerminal {
            inner: twolevel()?,
            factor: 1.5,
        },
        0.0,
        0.8,
    );
    let caught_adjoint = gradient_fd_error(&mut seeded(seed), &perturbed, 3, 1e-5)? > 1e-5;
    println!("{:<28} {:<10} {:>12} {:>10}  result", "check", "problem", "value", "tolerance");
    let mut all = true;
    for o in &outcomes {
        all &= o.passed;
        println!(
            "{:<28} {:<10} {:>12.3e} {:>10.1e}  {}",
            o.check,
            o.problem,
            o.value,
            o.tolerance,
            if o.passed { "pass" } else { "FAIL" }
        );
    }
    for (name, ok) in [("mutation: flipped Δ sign", caught), ("mutation: scaled ∇G", caught_adjoint)] {
        all &= ok;
        println!("{:<28} {:<10} {:>12} {:>10}  {}", name, "twolevel", "", "", if ok { "caught" } else { "MISSED" });
    }
    println!("{}", if all { "selftest passed" } else { "selftest FAILED" });
    Ok(if all { 0 } else { 1 })
}
