use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn monoctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monoctl"))
        .args(args)
        .output()
        .expect("monoctl runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

struct Row {
    iter: usize,
    cost: f64,
    theta: Option<f64>,
    solver: String,
}

fn convergence(dir: &Path) -> Vec<Row> {
    let text = fs::read_to_string(dir.join("convergence.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iter,J,update_norm,theta,picard_iters,descent_residual,solver"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Row {
                iter: f[0].parse().unwrap(),
                cost: f[1].parse().unwrap(),
                theta: f[3].parse().ok(),
                solver: f[6].to_string(),
            }
        })
        .collect()
}

fn summary_value(dir: &Path, section: &str, key: &str) -> String {
    let text = fs::read_to_string(dir.join("summary.txt")).unwrap();
    let start = text.find(&format!("[{section}]")).expect("section present");
    text[start..]
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .expect("key present")
        .to_string()
}

fn out_dir(tmp: &tempfile::TempDir) -> String {
    tmp.path().join("out").to_str().unwrap().to_string()
}

#[test]
fn twolevel_run_writes_five_nonincreasing_monotonic_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "problem = \"twolevel\"\nsolver = \"monotonic\"\niterations = 5\n");
    let out = out_dir(&tmp);
    let res = monoctl(&["run", &cfg, "--out", &out]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = convergence(Path::new(&out));
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.solver == "monotonic"));
    assert!(rows.iter().enumerate().all(|(k, r)| r.iter == k));
    assert!(rows.windows(2).all(|w| w[1].cost <= w[0].cost + 1e-9));
    assert_eq!(summary_value(Path::new(&out), "monotonic", "iterations"), "5");
    let control = fs::read_to_string(Path::new(&out).join("final_control.csv")).unwrap();
    assert_eq!(control.lines().next(), Some("t,v"));
    assert_eq!(control.lines().count(), 257);
}

#[test]
fn morse_run_tags_both_solvers() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "problem = \"morse\"\niterations = 50\n[grid]\npoints = 96\nsteps = 200\n[morse]\nhorizon = 200.0\n\
         [line_search]\ngolden_tol = 0.5\n",
    );
    let out = out_dir(&tmp);
    let res = monoctl(&["run", &cfg, "--out", &out]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = convergence(Path::new(&out));
    let mono: Vec<&Row> = rows.iter().filter(|r| r.solver == "monotonic").collect();
    assert!(!mono.is_empty() && rows.iter().any(|r| r.solver == "gradient"));
    assert!(mono.windows(2).all(|w| w[1].cost <= w[0].cost + 1e-9 * (1.0 + w[0].cost.abs())));
    assert!(Path::new(&out).join("final_control_gradient.csv").exists());
}

#[test]
fn co_runs_without_theta_growth_in_the_first_ten_iterations() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "problem = \"co\"\nsolver = \"monotonic\"\niterations = 10\n[grid]\nsteps = 2000\n[co]\nalpha = 0.1\ntheta = 1e3\n",
    );
    let out = out_dir(&tmp);
    let res = monoctl(&["run", &cfg, "--out", &out]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = convergence(Path::new(&out));
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.theta == Some(1e3)));
    let control = fs::read_to_string(Path::new(&out).join("final_control.csv")).unwrap();
    assert_eq!(control.lines().next(), Some("t,v1,v2"));
}

#[test]
fn twolevel_compare_agrees_to_1e_4() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp);
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/twolevel.toml");
    let res = monoctl(&["compare", config, "--out", &out]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(Path::new(&out).join("compare.txt")).unwrap();
    let get = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{key} = ")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((get("monotonic_final_J") - get("gradient_final_J")).abs() <= 1e-4);
    assert!(text.contains("monotonic_overtakes_at_iteration = "));
    assert!(text.contains("lower_final_J = "));
    let report = summary_value(Path::new(&out), "monotonic", "J_tilde");
    assert!(report.parse::<f64>().is_ok());
}

#[test]
fn mfg_compare_records_early_lead_and_overtake() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "problem = \"mfg\"\niterations = 10\n[grid]\npoints = 32\nsteps = 20\n");
    let out = out_dir(&tmp);
    let res = monoctl(&["compare", &cfg, "--out", &out]);
    assert!(res.status.success());
    let text = fs::read_to_string(Path::new(&out).join("compare.txt")).unwrap();
    assert!(text.contains("gradient_leads_in_first_5_iterations = "));
    assert!(text.contains("monotonic_overtakes_at_iteration = "));
}

#[test]
fn same_config_and_seed_give_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "problem = \"mfg\"\niterations = 6\n[grid]\npoints = 32\nsteps = 20\n");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let res = monoctl(&["compare", &cfg, "--out", dir.to_str().unwrap(), "--seed", "42"]);
        assert!(res.status.success());
    }
    for name in ["convergence.csv", "final_control.csv", "final_control_gradient.csv", "summary.txt", "compare.txt"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name} differs");
    }
}

#[test]
fn unknown_problem_exits_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "problem = \"hydrogen\"\n");
    let res = monoctl(&["run", &cfg, "--out", &out_dir(&tmp)]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("hydrogen"));
}

#[test]
fn missing_config_and_bad_budget_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("absent.toml");
    assert_eq!(monoctl(&["run", missing.to_str().unwrap()]).status.code(), Some(2));
    let cfg = write_config(tmp.path(), "problem = \"twolevel\"\niterations = 0\n");
    assert_eq!(monoctl(&["compare", &cfg]).status.code(), Some(2));
    assert_eq!(monoctl(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let res = monoctl(&["selftest"]);
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert_eq!(res.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("selftest passed"));
    assert!(stdout.contains("caught") && !stdout.contains("MISSED"));
}
