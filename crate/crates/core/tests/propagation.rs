mod common;

use common::{twolevel_exact, LinearToy};
use monotonic_control::checks::{random_control, seeded};
use monotonic_control::functional::{cost, evaluate_cost};
use monotonic_control::problems::morse::{ground_state, hamiltonian};
use monotonic_control::problems::{build_mfg, build_morse, build_twolevel, MfgParams, MorseParams, TwoLevelParams};
use monotonic_control::propagate::{propagate_adjoint, propagate_forward};
use monotonic_control::{ControlProblem, ControlTrajectory, ControlValue, Scheme, StateVector, TimeGrid};
use num_complex::Complex64;
use proptest::prelude::*;

/// The two-level problem with the exact per-step exponential as scheme.
struct OracleScheme(monotonic_control::problems::BilinearQuantum);

impl ControlProblem for OracleScheme {
    fn name(&self) -> &str {
        "twolevel-oracle"
    }
    fn grid(&self) -> TimeGrid {
        self.0.grid()
    }
    fn scheme(&self) -> Scheme {
        Scheme::DenseExponentialOracle
    }
    fn control_shape(&self) -> monotonic_control::ControlShape {
        self.0.control_shape()
    }
    fn initial_state(&self) -> StateVector {
        self.0.initial_state()
    }
    fn operator(&self, t: f64, v: &ControlValue) -> monotonic_control::operator::Operator {
        self.0.operator(t, v)
    }
    fn running_cost(&self, t: f64, v: &ControlValue, x: &StateVector) -> f64 {
        self.0.running_cost(t, v, x)
    }
    fn running_cost_grad(&self, t: f64, v: &ControlValue, x: &StateVector) -> StateVector {
        self.0.running_cost_grad(t, v, x)
    }
    fn terminal_cost(&self, x: &StateVector) -> f64 {
        self.0.terminal_cost(x)
    }
    fn terminal_cost_grad(&self, x: &StateVector) -> StateVector {
        self.0.terminal_cost_grad(x)
    }
    fn xi_gradient(&self, t: f64, v: &ControlValue, x: &StateVector, y: &StateVector) -> ControlValue {
        self.0.xi_gradient(t, v, x, y)
    }
}

fn smooth_pulse(grid: TimeGrid) -> ControlTrajectory {
    ControlTrajectory::from_fn(grid, |n| {
        let t = grid.midpoint(n);
        ControlValue::Scalar(0.6 * (3.0 * t).sin() + 0.3 * (7.0 * t).cos())
    })
    .unwrap()
}

#[test]
fn crank_nicolson_matches_exact_exponential_at_4096_steps() {
    let params = TwoLevelParams::default();
    let p = build_twolevel(&params, 4096).unwrap();
    let v = smooth_pulse(p.grid());
    let x = propagate_forward(&p, &v).unwrap();
    let j = cost(&p, &v, &x).unwrap();

    let dt = p.grid().dt();
    let controls = common::scalars(&v);
    let exact = twolevel_exact(params.splitting, dt, &controls);
    let running: f64 = controls.iter().map(|u| dt * params.alpha * u * u).sum();
    let j_exact = running + 2.0 - 2.0 * exact[1].re;

    let terminal = x.terminal();
    let err = ((terminal[0] - exact[0]).norm_sqr() + (terminal[1] - exact[1]).norm_sqr()).sqrt();
    assert!(err <= 1e-6, "terminal state error {err:e}");
    assert!((j - j_exact).abs() <= 1e-6 * j_exact.abs(), "J = {j}, exact {j_exact}");
}

#[test]
fn dense_exponential_scheme_is_exact_for_piecewise_constant_controls() {
    let params = TwoLevelParams::default();
    let p = OracleScheme(build_twolevel(&params, 64).unwrap());
    let v = smooth_pulse(p.grid());
    let x = propagate_forward(&p, &v).unwrap();
    let exact = twolevel_exact(params.splitting, p.grid().dt(), &common::scalars(&v));
    let t = x.terminal();
    assert!((t[0] - exact[0]).norm() < 1e-12 && (t[1] - exact[1]).norm() < 1e-12);
}

#[test]
fn dense_exponential_scheme_has_no_adjoint() {
    let p = OracleScheme(build_twolevel(&TwoLevelParams::default(), 16).unwrap());
    let v = smooth_pulse(p.grid());
    let x = propagate_forward(&p, &v).unwrap();
    assert!(propagate_adjoint(&p, &v, &x).is_err());
}

#[test]
fn crank_nicolson_error_is_second_order() {
    let params = TwoLevelParams::default();
    let err = |steps: usize| {
        let p = build_twolevel(&params, steps).unwrap();
        let v = ControlTrajectory::constant(p.grid(), ControlValue::Scalar(0.7));
        let x = propagate_forward(&p, &v).unwrap();
        let exact = twolevel_exact(params.splitting, p.grid().dt(), &common::scalars(&v));
        (x.terminal()[1] - exact[1]).norm()
    };
    let ratio = err(64) / err(128);
    assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn linear_toy_propagation_matches_step_map() {
    let toy = LinearToy::new(50);
    let v = ControlTrajectory::from_fn(toy.grid, |n| ControlValue::Scalar((n as f64 * 0.37).sin())).unwrap();
    let j = evaluate_cost(&toy, &v).unwrap();
    let direct = toy.cost_of(&common::scalars(&v));
    assert!((j - direct).abs() < 1e-13);
}

/// Eigenvalues below `lambda` of the symmetric tridiagonal (diag `d`, off-diagonal `e`), by Sturm count.
fn count_below(d: &[f64], e: f64, lambda: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (j, &dj) in d.iter().enumerate() {
        let prev = if j == 0 { 0.0 } else { e * e / q };
        q = dj - lambda - prev;
        if q == 0.0 {
            q = -1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn lowest_eigenvalue_by_bisection(params: &MorseParams, points: usize) -> f64 {
    let h = hamiltonian(params, points);
    let d: Vec<f64> = h.diag.iter().map(|c| c.re).collect();
    let e = h.upper[0].re;
    let (mut lo, mut hi) = (-params.d0 - 1.0, 0.0);
    assert_eq!(count_below(&d, e, hi).min(1), 1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(&d, e, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn morse_ground_energy_matches_fine_grid() {
    let params = MorseParams::default();
    let (energy, state) = ground_state(&params, 512).unwrap();
    let fine = lowest_eigenvalue_by_bisection(&params, 16384);
    assert!((energy - fine).abs() <= 1e-4 * fine.abs(), "grid {energy}, fine {fine}");
    // harmonic estimate -D₀ + ω/2 with ω = 2β sqrt(m D₀)
    let omega = 2.0 * params.beta * (params.m * params.d0).sqrt();
    assert!((energy - (-params.d0 + 0.5 * omega)).abs() < 0.05 * omega);
    let h = (params.z_max - params.z_min) / 513.0;
    let norm: f64 = h * state.iter().map(|c| c.norm_sqr()).sum::<f64>();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn morse_initial_state_is_stationary_without_field() {
    let params = MorseParams {
        horizon: 1000.0,
        ..MorseParams::default()
    };
    let p = build_morse(&params, 128, 200).unwrap();
    let v = ControlTrajectory::constant(p.grid(), ControlValue::Scalar(0.0));
    let x = propagate_forward(&p, &v).unwrap();
    let x0 = p.initial_state();
    let overlap = p.inner(&x0, x.terminal()).hypot({
        let ix = x.terminal() * Complex64::new(0.0, 1.0);
        p.inner(&x0, &ix)
    });
    assert!((overlap - 1.0).abs() < 1e-10, "|⟨X₀, X(T)⟩| = {overlap}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn crank_nicolson_preserves_norm(seed in any::<u64>(), amplitude in 0.0f64..3.0) {
        let p = build_twolevel(&TwoLevelParams::default(), 128).unwrap();
        let v = random_control(&mut seeded(seed), &p, 0.0, amplitude);
        let x = propagate_forward(&p, &v).unwrap();
        for s in x.states() {
            prop_assert!((p.inner(s, s) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mfg_preserves_mass_under_random_fields(seed in any::<u64>(), amplitude in 0.0f64..5.0) {
        let p = build_mfg(&MfgParams::default(), 48, 30).unwrap();
        let v = random_control(&mut seeded(seed), &p, 0.0, amplitude);
        let x = propagate_forward(&p, &v).unwrap();
        let m0 = p.conserved_quantity(x.state(0)).unwrap();
        for s in x.states() {
            prop_assert!((p.conserved_quantity(s).unwrap() - m0).abs() <= 1e-8);
        }
    }
}
