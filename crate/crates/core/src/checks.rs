//! Invariant checks shared by the self-test command and the test suites, plus
//! fault-injection wrappers that each check must catch.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::control::{ControlShape, ControlTrajectory, ControlValue};
use crate::error::{ControlError, Result};
use crate::functional::{delta_generic, evaluate_cost, increment_bound_check, pairing_integral, xi};
use crate::gradient::gradient_of;
use crate::grid::TimeGrid;
use crate::monotonic::{picard_vtheta, solve_vtheta, MonotonicConfig};
use crate::operator::Operator;
use crate::problem::{ControlProblem, Scheme};
use crate::problems::{
    build_co, build_mfg, build_morse, build_twolevel, CoParams, MfgParams, MorseParams, TwoLevelParams,
};
use crate::propagate::propagate_forward;
use crate::state::StateVector;

/// A problem instance with the control magnitudes used to sample it.
pub struct Subject {
    pub problem: Box<dyn ControlProblem>,
    /// Center of sampled controls.
    pub base: f64,
    /// Half-width of sampled controls around `base`.
    pub spread: f64,
}

impl Subject {
    pub fn new(problem: impl ControlProblem + 'static, base: f64, spread: f64) -> Self {
        Self {
            problem: Box::new(problem),
            base,
            spread,
        }
    }

    pub fn name(&self) -> &str {
        self.problem.name()
    }
}

/// The four shipped problems at sizes small enough for repeated checks.
pub fn reduced_subjects() -> Result<Vec<Subject>> {
    let morse = MorseParams {
        horizon: 200.0,
        ..MorseParams::default()
    };
    let co = CoParams {
        horizon: 2.0,
        ..CoParams::default()
    };
    Ok(vec![
        Subject::new(build_twolevel(&TwoLevelParams::default(), 64)?, 0.0, 0.8),
        Subject::new(build_morse(&morse, 96, 200)?, 0.0, 0.02),
        Subject::new(build_mfg(&MfgParams::default(), 32, 20)?, 0.0, 0.5),
        Subject::new(build_co(&co, 200)?, 0.0, 0.6),
    ])
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_value<R: Rng>(rng: &mut R, shape: ControlShape, base: f64, spread: f64) -> ControlValue {
    let mut v = ControlValue::zeros(shape);
    for x in v.as_mut_slice() {
        *x = base + spread * rng.gen_range(-1.0..1.0);
    }
    v
}

pub fn random_control<R: Rng>(rng: &mut R, problem: &dyn ControlProblem, base: f64, spread: f64) -> ControlTrajectory {
    let shape = problem.control_shape();
    ControlTrajectory::from_fn(problem.grid(), |_| random_value(rng, shape, base, spread))
        .expect("sampled controls are finite")
}

/// A state of the kind the problem's scheme produces: unit norm for the
/// quantum schemes, a positive density for the parabolic one.
pub fn random_state<R: Rng>(rng: &mut R, problem: &dyn ControlProblem) -> StateVector {
    let dim = problem.initial_state().len();
    match problem.scheme() {
        Scheme::ImplicitParabolic => StateVector::from_fn(dim, |_, _| Complex64::new(rng.gen_range(0.5..1.5), 0.0)),
        _ => {
            let x = StateVector::from_fn(dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let norm = problem.inner(&x, &x).sqrt();
            x / Complex64::new(norm, 0.0)
        }
    }
}

/// A co-state of the same field type; real for the parabolic scheme.
pub fn random_costate<R: Rng>(rng: &mut R, problem: &dyn ControlProblem) -> StateVector {
    let dim = problem.initial_state().len();
    let real = problem.scheme() == Scheme::ImplicitParabolic;
    StateVector::from_fn(dim, |_, _| {
        let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
        Complex64::new(rng.gen_range(-1.0..1.0), im)
    })
}

/// Largest `|dot(Δ(v', v), v' - v) - (Ξ(v') - Ξ(v))| / (1 + |Ξ(v')| + |Ξ(v)|)`
/// over random tuples, using the problem's own `Δ`.
pub fn factorization_error<R: Rng>(rng: &mut R, s: &Subject, samples: usize) -> Result<f64> {
    let p = s.problem.as_ref();
    let shape = p.control_shape();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let t = rng.gen_range(0.0..p.grid().horizon());
        let v = random_value(rng, shape, s.base, s.spread);
        let w = random_value(rng, shape, s.base, s.spread);
        let x = random_state(rng, p);
        let y = random_costate(rng, p);
        let (xa, xb) = (xi(p, t, &w, &x, &y), xi(p, t, &v, &x, &y));
        let d = p.delta(t, &w, &v, &x, &y)?;
        let lhs = p.control_dot(&d, &w.sub(&v)?, &x)?;
        worst = worst.max((lhs - (xa - xb)).abs() / (1.0 + xa.abs() + xb.abs()));
    }
    Ok(worst)
}

/// Largest mismatch between the problem's `Δ` and the quadrature form, measured
/// through the pairing with `v' - v` (factorizations need not coincide).
pub fn delta_consistency<R: Rng>(rng: &mut R, s: &Subject, samples: usize) -> Result<f64> {
    let p = s.problem.as_ref();
    let shape = p.control_shape();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let t = rng.gen_range(0.0..p.grid().horizon());
        let v = random_value(rng, shape, s.base, s.spread);
        let w = random_value(rng, shape, s.base, s.spread);
        let x = random_state(rng, p);
        let y = random_costate(rng, p);
        let dv = w.sub(&v)?;
        let own = p.control_dot(&p.delta(t, &w, &v, &x, &y)?, &dv, &x)?;
        let quad = p.control_dot(&delta_generic(p, t, &w, &v, &x, &y, 4)?, &dv, &x)?;
        worst = worst.max((own - quad).abs() / (1.0 + own.abs()));
    }
    Ok(worst)
}

/// Largest `(J(v') - J(v) - ∫Υ) / (1 + |J(v') - J(v)|)` over random control pairs;
/// nonpositive when the increment bound holds.
pub fn increment_bound_excess<R: Rng>(rng: &mut R, s: &Subject, pairs: usize) -> Result<f64> {
    let p = s.problem.as_ref();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let v = random_control(rng, p, s.base, s.spread);
        let w = random_control(rng, p, s.base, s.spread);
        let b = increment_bound_check(p, &v, &w)?;
        worst = worst.max((b.lhs - b.rhs) / (1.0 + b.lhs.abs()));
    }
    Ok(worst)
}

/// Largest relative error between central differences of `J` along random
/// directions and the pairing of the adjoint gradient with those directions.
pub fn gradient_fd_error<R: Rng>(rng: &mut R, s: &Subject, directions: usize, eps: f64) -> Result<f64> {
    let p = s.problem.as_ref();
    let v = random_control(rng, p, s.base, s.spread);
    let x = propagate_forward(p, &v)?;
    let g = gradient_of(p, &v)?;
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let dir = random_control(rng, p, 0.0, 1.0);
        let plus = evaluate_cost(p, &v.add_scaled(eps, &dir)?)?;
        let minus = evaluate_cost(p, &v.add_scaled(-eps, &dir)?)?;
        let fd = (plus - minus) / (2.0 * eps);
        let exact = pairing_integral(p, &g, &dir, &x)?;
        worst = worst.max((fd - exact).abs() / exact.abs().max(fd.abs()).max(1e-300));
    }
    Ok(worst)
}

/// Drift of the conserved quantity along one trajectory with a random control.
pub fn conservation_drift<R: Rng>(rng: &mut R, s: &Subject) -> Result<Option<f64>> {
    let p = s.problem.as_ref();
    let v = random_control(rng, p, s.base, s.spread);
    let x = propagate_forward(p, &v)?;
    let Some(reference) = p.conserved_quantity(x.state(0)) else {
        return Ok(None);
    };
    Ok(x.states()
        .iter()
        .filter_map(|st| p.conserved_quantity(st))
        .map(|c| (c - reference).abs())
        .reduce(f64::max))
}

/// Largest gap between generic Picard and the closed-form `V_θ`, with θ raised
/// from `theta` until Picard contracts. `None` when no closed form exists.
pub fn closed_form_gap<R: Rng>(rng: &mut R, s: &Subject, theta: f64, samples: usize) -> Result<Option<f64>> {
    let p = s.problem.as_ref();
    let shape = p.control_shape();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let t = rng.gen_range(0.0..p.grid().horizon());
        let v = random_value(rng, shape, s.base, s.spread);
        let x = random_state(rng, p);
        let y = random_costate(rng, p);
        let mut th = theta;
        let picard = loop {
            match picard_vtheta(p, t, &v, &x, &y, th, 1e-14, 5000) {
                Ok((value, _)) => break value,
                Err(ControlError::ThetaTooSmall { .. }) if th < 1e12 * theta => th *= 2.0,
                Err(e) => return Err(e),
            }
        };
        let Some(closed) = p.closed_form_vtheta(t, &v, &x, &y, th) else {
            return Ok(None);
        };
        let gap = picard.sub(&closed)?.max_abs();
        worst = worst.max(gap);
    }
    Ok(Some(worst))
}

/// Largest `‖Δ(v', v) + θ (v' - v)‖` for `v' = V_θ` from the configured solver.
pub fn vtheta_residual<R: Rng>(rng: &mut R, s: &Subject, cfg: &MonotonicConfig, samples: usize) -> Result<f64> {
    let p = s.problem.as_ref();
    let shape = p.control_shape();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let t = rng.gen_range(0.0..p.grid().horizon());
        let v = random_value(rng, shape, s.base, s.spread);
        let x = random_state(rng, p);
        let y = random_costate(rng, p);
        let (w, _) = solve_vtheta(p, t, &v, &x, &y, cfg.theta_init, cfg)?;
        let r = p.delta(t, &w, &v, &x, &y)?.add_scaled(cfg.theta_init, &w.sub(&v)?)?;
        worst = worst.max(r.as_slice().iter().map(|c| c * c).sum::<f64>().sqrt());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub check: &'static str,
    pub problem: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(check: &'static str, problem: &str, value: f64, tolerance: f64) -> Self {
        Self {
            check,
            problem: problem.to_string(),
            value,
            tolerance,
            passed: value.is_finite() && value <= tolerance,
        }
    }
}

/// Runs every invariant check on one subject.
pub fn check_subject(s: &Subject, seed: u64) -> Vec<CheckOutcome> {
    let mut rng = seeded(seed);
    let name = s.name().to_string();
    let fail = |check: &'static str, e: ControlError| {
        log::error!("{check} on {name}: {e}");
        CheckOutcome::new(check, &name, f64::INFINITY, 0.0)
    };
    let mut out = Vec::new();
    let mut record = |check: &'static str, tol: f64, r: Result<f64>| {
        out.push(match r {
            Ok(value) => CheckOutcome::new(check, &name, value, tol),
            Err(e) => fail(check, e),
        })
    };
    record("factorization identity", 1e-10, factorization_error(&mut rng, s, 20));
    record("increment bound", 1e-8, increment_bound_excess(&mut rng, s, 3).map(|e| e.max(0.0)));
    record("adjoint gradient", 1e-5, gradient_fd_error(&mut rng, s, 3, 1e-5));
    match conservation_drift(&mut rng, s) {
        Ok(Some(d)) => record("conservation", 1e-8, Ok(d)),
        Ok(None) => {}
        Err(e) => record("conservation", 1e-8, Err(e)),
    }
    match closed_form_gap(&mut rng, s, 1.0, 20) {
        Ok(Some(gap)) => record("closed-form agreement", 1e-10, Ok(gap)),
        Ok(None) => {}
        Err(e) => record("closed-form agreement", 1e-10, Err(e)),
    }
    out
}

/// The full self-test over every reduced problem.
pub fn selftest(seed: u64) -> Result<Vec<CheckOutcome>> {
    Ok(reduced_subjects()?
        .iter()
        .enumerate()
        .flat_map(|(i, s)| check_subject(s, seed.wrapping_add(i as u64)))
        .collect())
}

macro_rules! delegate {
    ($field:tt) => {
        fn name(&self) -> &str {
            self.$field.name()
        }
        fn grid(&self) -> TimeGrid {
            self.$field.grid()
        }
        fn scheme(&self) -> Scheme {
            self.$field.scheme()
        }
        fn control_shape(&self) -> ControlShape {
            self.$field.control_shape()
        }
        fn state_weight(&self) -> f64 {
            self.$field.state_weight()
        }
        fn initial_state(&self) -> StateVector {
            self.$field.initial_state()
        }
        fn operator(&self, t: f64, v: &ControlValue) -> Operator {
            self.$field.operator(t, v)
        }
        fn source(&self, t: f64, v: &ControlValue) -> Option<StateVector> {
            self.$field.source(t, v)
        }
        fn running_cost(&self, t: f64, v: &ControlValue, x: &StateVector) -> f64 {
            self.$field.running_cost(t, v, x)
        }
        fn running_cost_grad(&self, t: f64, v: &ControlValue, x: &StateVector) -> StateVector {
            self.$field.running_cost_grad(t, v, x)
        }
        fn terminal_cost(&self, x: &StateVector) -> f64 {
            self.$field.terminal_cost(x)
        }
        fn xi_gradient(&self, t: f64, v: &ControlValue, x: &StateVector, y: &StateVector) -> ControlValue {
            self.$field.xi_gradient(t, v, x, y)
        }
        fn control_dot(&self, a: &ControlValue, b: &ControlValue, x: &StateVector) -> Result<f64> {
            self.$field.control_dot(a, b, x)
        }
        fn conserved_quantity(&self, x: &StateVector) -> Option<f64> {
            self.$field.conserved_quantity(x)
        }
    };
}

/// Fault injection: reverses the sign of `Δ`.
pub struct FlipDeltaSign<P>(pub P);

impl<P: ControlProblem> ControlProblem for FlipDeltaSign<P> {
    delegate!(0);

    fn terminal_cost_grad(&self, x: &StateVector) -> StateVector {
        self.0.terminal_cost_grad(x)
    }

    fn delta(
        &self,
        t: f64,
        v_new: &ControlValue,
        v: &ControlValue,
        x: &StateVector,
        y: &StateVector,
    ) -> Result<ControlValue> {
        Ok(self.0.delta(t, v_new, v, x, y)?.scaled(-1.0))
    }
}

/// Fault injection: starts the adjoint from a scaled `∇G` while `G` itself is unchanged.
pub struct PerturbAdjointTerminal<P> {
    pub inner: P,
    pub factor: f64,
}

impl<P: ControlProblem> ControlProblem for PerturbAdjointTerminal<P> {
    delegate!(inner);

    fn terminal_cost_grad(&self, x: &StateVector) -> StateVector {
        self.inner.terminal_cost_grad(x) * Complex64::new(self.factor, 0.0)
    }

    fn delta(
        &self,
        t: f64,
        v_new: &ControlValue,
        v: &ControlValue,
        x: &StateVector,
        y: &StateVector,
    ) -> Result<ControlValue> {
        self.inner.delta(t, v_new, v, x, y)
    }
}
