//! Run configuration: a TOML file with a few top-level keys and optional sections.
//!
//! ```toml
//! problem = "morse"          # morse | mfg | co | twolevel
//! solver = "both"            # monotonic | gradient | both
//! iterations = 50
//!
//! [grid]
//! points = 256
//! steps = 4000
//!
//! [morse]
//! horizon = 5000.0
//!
//! [monotonic]
//! picard_mode = "sweep"
//!
//! [line_search]
//! golden_tol = 0.5
//! ```
//!
//! Every problem section defaults to the reference parameter table, and an
//! absent `monotonic.theta_init` falls back to the problem's `theta`.

use std::path::{Path, PathBuf};

use monotonic_control::gradient::LineSearchConfig;
use monotonic_control::monotonic::MonotonicConfig;
use monotonic_control::problems::{
    build_co, build_mfg, build_morse, build_twolevel, BilinearQuantum, CoOrientation, CoParams, MeanFieldGame,
    MfgParams, MorseParams, TwoLevelParams,
};
use monotonic_control::{ControlProblem, ControlShape, ControlTrajectory, ControlValue};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverSelection {
    Monotonic,
    Gradient,
    #[default]
    Both,
}

impl SolverSelection {
    pub fn monotonic(&self) -> bool {
        matches!(self, SolverSelection::Monotonic | SolverSelection::Both)
    }

    pub fn gradient(&self) -> bool {
        matches!(self, SolverSelection::Gradient | SolverSelection::Both)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    points: Option<usize>,
    steps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: String,
    #[serde(default)]
    solver: SolverSelection,
    iterations: Option<usize>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    initial_control: Option<f64>,
    #[serde(default)]
    report_both_costs: bool,
    early_window: Option<usize>,
    #[serde(default)]
    grid: GridSection,
    monotonic: Option<toml::Table>,
    #[serde(default)]
    line_search: LineSearchConfig,
    morse: Option<MorseParams>,
    mfg: Option<MfgParams>,
    co: Option<CoParams>,
    twolevel: Option<TwoLevelParams>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Morse { params: MorseParams, points: usize, steps: usize },
    Mfg { params: MfgParams, points: usize, steps: usize },
    Co { params: CoParams, steps: usize },
    TwoLevel { params: TwoLevelParams, steps: usize },
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Morse { .. } => "morse",
            ProblemSpec::Mfg { .. } => "mfg",
            ProblemSpec::Co { .. } => "co",
            ProblemSpec::TwoLevel { .. } => "twolevel",
        }
    }

    fn theta(&self) -> f64 {
        match self {
            ProblemSpec::Morse { params, .. } => params.theta,
            ProblemSpec::Mfg { params, .. } => params.theta,
            ProblemSpec::Co { params, .. } => params.theta,
            ProblemSpec::TwoLevel { params, .. } => params.theta,
        }
    }

    /// Zero field for the crowd model, a small constant elsewhere so that the
    /// symmetric zero field is not the starting point.
    fn default_initial_control(&self) -> f64 {
        match self {
            ProblemSpec::Mfg { .. } => 0.0,
            _ => 1e-3,
        }
    }

    pub fn build(&self) -> Result<Built, CliError> {
        let built = match self {
            ProblemSpec::Morse { params, points, steps } => Built::Quantum(build_morse(params, *points, *steps)?),
            ProblemSpec::Mfg { params, points, steps } => Built::Mfg(build_mfg(params, *points, *steps)?),
            ProblemSpec::Co { params, steps } => Built::Co(build_co(params, *steps)?),
            ProblemSpec::TwoLevel { params, steps } => Built::Quantum(build_twolevel(params, *steps)?),
        };
        Ok(built)
    }
}

pub enum Built {
    Quantum(BilinearQuantum),
    Mfg(MeanFieldGame),
    Co(CoOrientation),
}

impl Built {
    pub fn as_dyn(&self) -> &dyn ControlProblem {
        match self {
            Built::Quantum(p) => p,
            Built::Mfg(p) => p,
            Built::Co(p) => p,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub solver: SolverSelection,
    pub iterations: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub initial_control: f64,
    pub report_both_costs: bool,
    pub early_window: usize,
    pub monotonic: MonotonicConfig,
    pub line_search: LineSearchConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let RawConfig {
            problem,
            solver,
            iterations,
            seed,
            output,
            initial_control,
            report_both_costs,
            early_window,
            grid,
            monotonic,
            line_search,
            morse,
            mfg,
            co,
            twolevel,
        } = raw;
        let sections = [("morse", morse.is_some()), ("mfg", mfg.is_some()), ("co", co.is_some()), ("twolevel", twolevel.is_some())];
        if let Some((other, _)) = sections.iter().find(|(name, present)| *present && *name != problem) {
            return Err(CliError::Config(format!("section [{other}] does not apply to problem '{problem}'")));
        }
        let spec = match problem.as_str() {
            "morse" => ProblemSpec::Morse {
                params: morse.unwrap_or_default(),
                points: grid.points.unwrap_or(512),
                steps: grid.steps.unwrap_or(4000),
            },
            "mfg" => ProblemSpec::Mfg {
                params: mfg.unwrap_or_default(),
                points: grid.points.unwrap_or(64),
                steps: grid.steps.unwrap_or(100),
            },
            "co" => {
                no_points(&grid, "co")?;
                ProblemSpec::Co {
                    params: co.unwrap_or_default(),
                    steps: grid.steps.unwrap_or(2000),
                }
            }
            "twolevel" => {
                no_points(&grid, "twolevel")?;
                ProblemSpec::TwoLevel {
                    params: twolevel.unwrap_or_default(),
                    steps: grid.steps.unwrap_or(256),
                }
            }
            other => return Err(CliError::Config(format!("unknown problem '{other}'"))),
        };
        let iterations = iterations.unwrap_or(DEFAULT_ITERATIONS);
        if iterations == 0 {
            return Err(CliError::Config("iterations must be positive".into()));
        }
        let mut table = monotonic.unwrap_or_default();
        table.entry("theta_init").or_insert(toml::Value::Float(spec.theta()));
        let mut monotonic: MonotonicConfig = table.try_into().map_err(|e: toml::de::Error| CliError::Config(format!("[monotonic]: {e}")))?;
        monotonic.outer_max = iterations;
        monotonic.validate()?;
        line_search.validate()?;
        let initial_control = initial_control.unwrap_or_else(|| spec.default_initial_control());
        if !initial_control.is_finite() {
            return Err(CliError::Config("initial_control must be finite".into()));
        }
        Ok(Self {
            problem: spec,
            solver,
            iterations,
            seed: seed.unwrap_or(0),
            output,
            initial_control,
            report_both_costs,
            early_window: early_window.unwrap_or(5),
            monotonic,
            line_search,
        })
    }

    pub fn initial_trajectory(&self, problem: &dyn ControlProblem) -> ControlTrajectory {
        let shape: ControlShape = problem.control_shape();
        ControlTrajectory::constant(problem.grid(), ControlValue::constant(shape, self.initial_control))
    }
}

fn no_points(grid: &GridSection, problem: &str) -> Result<(), CliError> {
    match grid.points {
        Some(_) => Err(CliError::Config(format!("grid.points does not apply to '{problem}'"))),
        None => Ok(()),
    }
}
