mod common;

use common::LinearToy;
use monotonic_control::checks::{random_costate, random_state, random_value, reduced_subjects, seeded};
use monotonic_control::monotonic::{
    criticality_residual, monotonic_step, picard_vtheta, run, MonotonicConfig, PicardMode,
};
use monotonic_control::problems::{build_co, build_mfg, build_twolevel, CoParams, MfgParams, TwoLevelParams};
use monotonic_control::propagate::{propagate_adjoint, propagate_forward};
use monotonic_control::{ControlProblem, ControlTrajectory, ControlValue, RunStatus};
use rand::Rng;

fn pair(v: &ControlValue) -> [f64; 2] {
    match v {
        ControlValue::Pair(p) => *p,
        _ => panic!("pair expected"),
    }
}

fn norm(v: &ControlValue) -> f64 {
    v.as_slice().iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[test]
fn co_update_solves_the_fixed_point_in_the_order_v2_then_v1() {
    let p = build_co(&CoParams { horizon: 2.0, ..CoParams::default() }, 50).unwrap();
    let mut rng = seeded(7);
    let theta = 1e3;
    let mut printed_worst: f64 = 0.0;
    for _ in 0..50 {
        let v = random_value(&mut rng, p.control_shape(), 0.0, 0.6);
        let x = random_state(&mut rng, &p);
        let y = random_costate(&mut rng, &p);
        let (xi1, xi2) = p.xis(&x, &y);
        let [v1, v2] = pair(&v);

        let w2 = ((theta - xi1) * v2 - xi2 * v1 * v1) / (theta + xi1);
        let w1 = (theta - xi1 - xi2 * w2) * v1 / (theta + xi1 + xi2 * w2);
        let solved = ControlValue::Pair([w1, w2]);
        let residual = p.delta(0.0, &solved, &v, &x, &y).unwrap().add_scaled(theta, &solved.sub(&v).unwrap()).unwrap();
        assert!(norm(&residual) < 1e-12, "residual {}", norm(&residual));

        let (picard, _) = picard_vtheta(&p, 0.0, &v, &x, &y, theta, 1e-14, 1000).unwrap();
        assert!(picard.sub(&solved).unwrap().max_abs() < 1e-12);

        // component order as typeset: first entry from the v₂ expression, second negated
        let printed = ControlValue::Pair([w2, -(theta - xi1 + xi2 * w2) / (theta + xi1 + xi2 * w2) * v1]);
        let r = p.delta(0.0, &printed, &v, &x, &y).unwrap().add_scaled(theta, &printed.sub(&v).unwrap()).unwrap();
        printed_worst = printed_worst.max(norm(&r));
    }
    assert!(printed_worst > 1e-3, "the typeset ordering unexpectedly solves the equation");
}

#[test]
fn picard_is_exact_when_delta_ignores_the_new_control() {
    // α = 0 makes Δ(v', v) = b Y, independent of v'
    let toy = LinearToy {
        alpha: 0.0,
        ..LinearToy::new(10)
    };
    let x = toy.initial_state();
    let y = monotonic_control::StateVector::from_element(1, num_complex::Complex64::new(0.4, 0.0));
    let v = ControlValue::Scalar(0.3);
    let theta = 2.0;
    let (w, iters) = picard_vtheta(&toy, 0.0, &v, &x, &y, theta, 1e-14, 50).unwrap();
    assert!(iters <= 2);
    assert!((w.as_slice()[0] - (0.3 - toy.b * 0.4 / theta)).abs() < 1e-15);
}

#[test]
fn critical_initial_control_stops_immediately() {
    // b = α = 0: J does not depend on v, so every control is critical
    let toy = LinearToy {
        alpha: 0.0,
        b: 0.0,
        ..LinearToy::new(20)
    };
    let v0 = ControlTrajectory::constant(toy.grid, ControlValue::Scalar(0.25));
    assert_eq!(criticality_residual(&toy, &v0).unwrap(), 0.0);
    let rec = run(&toy, &v0, &MonotonicConfig::default()).unwrap();
    assert_eq!(rec.status, RunStatus::Converged);
    assert_eq!(rec.iterations(), 1);
    assert_eq!(rec.rows[0].update_norm, 0.0);
    assert_eq!(rec.final_control, v0);
}

#[test]
fn linear_toy_converges_to_the_analytic_minimizer() {
    let toy = LinearToy::new(40);
    let v0 = ControlTrajectory::constant(toy.grid, ControlValue::Scalar(0.0));
    let cfg = MonotonicConfig {
        stop_tol: 1e-12,
        outer_max: 500,
        ..MonotonicConfig::with_theta(0.5)
    };
    let rec = run(&toy, &v0, &cfg).unwrap();
    assert_eq!(rec.status, RunStatus::Converged);
    let exact = toy.minimizer();
    let err = common::scalars(&rec.final_control)
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-9, "max error {err:e}");
}

#[test]
fn sweep_and_trajectory_modes_agree_on_every_problem() {
    for s in reduced_subjects().unwrap() {
        let p = s.problem.as_ref();
        let mut rng = seeded(3);
        let v = monotonic_control::checks::random_control(&mut rng, p, s.base, s.spread);
        let x = propagate_forward(p, &v).unwrap();
        let y = propagate_adjoint(p, &v, &x).unwrap();
        let mut theta = match p.name() {
            "morse" => 1e-2,
            "co" => 1e3,
            "mfg" => 0.5,
            _ => 1.0,
        };
        let cfg = |mode| MonotonicConfig {
            picard_tol: 1e-13,
            picard_max: 2000,
            picard_mode: mode,
            ..MonotonicConfig::default()
        };
        let (a, b) = loop {
            let a = monotonic_step(p, &v, &y, theta, &cfg(PicardMode::Trajectory));
            let b = monotonic_step(p, &v, &y, theta, &cfg(PicardMode::Sweep));
            match (a, b) {
                (Ok(a), Ok(b)) => break (a, b),
                _ => theta *= 2.0,
            }
        };
        let gap = a.control.sub(&b.control).unwrap().max_abs();
        assert!(gap <= 1e-8, "{}: modes differ by {gap:e}", p.name());
    }
}

fn assert_descent(rec: &monotonic_control::RunRecord) {
    let costs = rec.costs();
    for (k, row) in rec.rows.iter().enumerate() {
        let theta = row.theta.unwrap();
        let bound = -theta * row.update_norm * row.update_norm + 1e-9 * (1.0 + costs[k].abs());
        assert!(costs[k + 1] - costs[k] <= bound, "iteration {k}: ΔJ = {:e}", costs[k + 1] - costs[k]);
    }
}

#[test]
fn twolevel_run_is_monotone_and_critical_at_stop() {
    let params = TwoLevelParams::default();
    let p = build_twolevel(&params, 128).unwrap();
    let v0 = ControlTrajectory::constant(p.grid(), ControlValue::Scalar(1e-3));
    let rec = run(&p, &v0, &MonotonicConfig::with_theta(params.theta)).unwrap();
    assert_descent(&rec);
    assert_eq!(rec.status, RunStatus::Converged);
    let theta = rec.final_theta.unwrap();
    assert!(criticality_residual(&p, &rec.final_control).unwrap() <= 10.0 * theta * 1e-8);
}

#[test]
fn mfg_run_is_monotone_in_both_modes() {
    let p = build_mfg(&MfgParams::default(), 32, 20).unwrap();
    let v0 = ControlTrajectory::constant(p.grid(), ControlValue::zeros(p.control_shape()));
    let base = MonotonicConfig {
        outer_max: 15,
        ..MonotonicConfig::with_theta(0.5)
    };
    let traj = run(&p, &v0, &base).unwrap();
    let sweep = run(&p, &v0, &MonotonicConfig { picard_mode: PicardMode::Sweep, ..base }).unwrap();
    assert_descent(&traj);
    assert_descent(&sweep);
    assert!((traj.final_cost - sweep.final_cost).abs() < 1e-8);
}

#[test]
fn theta_grows_when_started_too_small() {
    // the CO update has no closed form, and Picard diverges for θ below |ξ|
    let p = build_co(&CoParams { horizon: 2.0, ..CoParams::default() }, 100).unwrap();
    let v0 = ControlTrajectory::constant(p.grid(), ControlValue::Pair([0.5, 0.5]));
    let cfg = MonotonicConfig {
        outer_max: 5,
        ..MonotonicConfig::with_theta(1e-4)
    };
    let rec = run(&p, &v0, &cfg).unwrap();
    let thetas: Vec<f64> = rec.rows.iter().map(|r| r.theta.unwrap()).collect();
    assert!(thetas[0] > 1e-4);
    assert!(thetas.windows(2).all(|w| w[1] >= w[0]));
    assert_descent(&rec);
}

#[test]
fn non_finite_initial_control_is_rejected() {
    let p = build_twolevel(&TwoLevelParams::default(), 8).unwrap();
    let v0 = ControlTrajectory::from_fn(p.grid(), |n| ControlValue::Scalar(if n == 3 { f64::NAN } else { 0.0 }));
    assert!(v0.is_err() || run(&p, &v0.unwrap(), &MonotonicConfig::default()).is_err());
}

#[test]
fn update_size_is_bounded_by_inverse_theta() {
    let p = build_twolevel(&TwoLevelParams::default(), 64).unwrap();
    let mut rng = seeded(11);
    for _ in 0..20 {
        let v = random_value(&mut rng, p.control_shape(), 0.0, 1.0);
        let x = random_state(&mut rng, &p);
        let y = random_costate(&mut rng, &p);
        let t = rng.gen_range(0.0..1.0);
        let small = p.closed_form_vtheta(t, &v, &x, &y, 10.0).unwrap().sub(&v).unwrap().max_abs();
        let large = p.closed_form_vtheta(t, &v, &x, &y, 1000.0).unwrap().sub(&v).unwrap().max_abs();
        assert!(large <= small / 50.0 + 1e-15);
    }
}
