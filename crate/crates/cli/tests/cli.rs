//! End-to-end tests of the spinsim binary: flag handling, exit codes, output
//! formats, and the documented reproducibility contract.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const PI: f64 = std::f64::consts::PI;

fn spinsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinsim"))
        .args(args)
        .env_remove("SPINSIM_WORKERS")
        .output()
        .expect("spawn spinsim")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        !out.stdout.is_empty(),
        "no stdout; stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn write_file(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

#[test]
fn machine_sixty_degree_run_passes() {
    let out = spinsim(&[
        "machine",
        "--gamma",
        "1.0471975511965976",
        "--n",
        "100000",
        "--seed",
        "42",
        "--format",
        "json",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert!((v["analytic"]["mu1"].as_f64().unwrap() - 0.75).abs() < 1e-9);
    assert!((v["analytic"]["mu2"].as_f64().unwrap() - 0.25).abs() < 1e-9);
    assert_eq!(v["report"]["pass"], Value::Bool(true));
    let counts = &v["tally"];
    assert_eq!(
        counts["count_o1"].as_u64().unwrap() + counts["count_o2"].as_u64().unwrap(),
        100000
    );
}

#[test]
fn machine_aligned_is_deterministic() {
    let out = spinsim(&["machine", "--gamma", "0", "--n", "10", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["tally"]["count_o1"], 10);
    assert_eq!(v["tally"]["count_o2"], 0);
}

#[test]
fn machine_center_state_is_even() {
    let out = spinsim(&[
        "machine", "--radius", "0", "--gamma", "2.0", "--n", "100000", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["analytic"]["mu1"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["analytic"]["mu2"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn machine_accepts_degrees() {
    let out = spinsim(&[
        "machine",
        "--gamma",
        "60",
        "--degrees",
        "--check",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    // Output stays in radians.
    assert!((v["params"]["gamma"].as_f64().unwrap() - PI / 3.0).abs() < 1e-12);
    assert!((v["analytic"]["mu1"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert!(v.get("tally").is_none());
}

#[test]
fn machine_explicit_vectors() {
    let out = spinsim(&[
        "machine", "--v", "0,0,0.5", "--u", "1,0,0", "--n", "50000", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    // w.u = 0, so an even split regardless of the interior radius.
    assert!((v["analytic"]["mu1"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["params"]["radius"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn machine_usage_errors_exit_2() {
    assert_eq!(spinsim(&["machine", "--n", "10"]).status.code(), Some(2));
    assert_eq!(
        spinsim(&["machine", "--gamma", "4.0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        spinsim(&["machine", "--gamma", "1.0", "--radius", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        spinsim(&["machine", "--gamma", "1.0", "--n", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(spinsim(&["machine", "--v", "0,0,1"]).status.code(), Some(2));
    assert_eq!(spinsim(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn unified_factorized_totals() {
    let out = spinsim(&[
        "unified",
        "--gamma",
        "1.5707963267948966",
        "--theta0",
        "1.5707963267948966",
        "--profile",
        "const:0.8",
        "--n",
        "100000",
        "--seed",
        "11",
        "--format",
        "json",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    let analytic = &v["analytic"];
    assert!((analytic["p_detect"].as_f64().unwrap() - 0.8).abs() < 1e-9);
    assert!((analytic["p_o1"].as_f64().unwrap() - 0.4).abs() < 1e-9);
    assert!((analytic["p_o2"].as_f64().unwrap() - 0.4).abs() < 1e-9);
    assert!((analytic["p_a0"].as_f64().unwrap() - 0.2).abs() < 1e-9);
    // Uniform half cap at γ = π/2 splits at 2π/3.
    assert!((analytic["boundary_angle"].as_f64().unwrap() - 2.0 * PI / 3.0).abs() < 1e-8);
    assert!(analytic["consistency_deviation"].as_f64().unwrap() < 1e-9);
}

#[test]
fn unified_check_mode_lossless() {
    let out = spinsim(&[
        "unified",
        "--gamma",
        "0",
        "--profile",
        "const:1",
        "--check",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["analytic"]["p_detect"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["analytic"]["p_o1"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn unified_theta_dependent_profile_reports_deviation() {
    let dir = std::env::temp_dir().join("spinsim_cli_profile_test");
    std::fs::create_dir_all(&dir).unwrap();
    let profile = dir.join("p.tsv");
    let mut text = String::new();
    for g in [0.0, PI] {
        for i in 0..=200 {
            let t = PI * i as f64 / 200.0;
            text.push_str(&format!("{g} {t} {}\n", (1.0 - t.cos()) / 2.0));
        }
    }
    write_file(&profile, &text);

    let out = spinsim(&[
        "unified",
        "--gamma",
        "1.5707963267948966",
        "--profile",
        &format!("file:{}", profile.display()),
        "--check",
        "--format",
        "json",
    ]);
    // Analytic mode: factorization holds only for θ-independent profiles,
    // and the deviation says by how much this one misses.
    let v = stdout_json(&out);
    let dev = v["analytic"]["consistency_deviation"].as_f64().unwrap();
    assert!(
        (dev - 1.0 / 12.0).abs() < 1e-4,
        "deviation {dev} should be near 1/12"
    );
}

#[test]
fn mixed_quarter_weight_totals() {
    let out = spinsim(&[
        "mixed",
        "--lambda1",
        "0.75",
        "--gamma",
        "1.0471975511965976",
        "--profile",
        "const:1",
        "--n",
        "100000",
        "--seed",
        "8",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["analytic"]["p_o1"].as_f64().unwrap() - 0.625).abs() < 1e-9);
    assert!((v["analytic"]["p_o2"].as_f64().unwrap() - 0.375).abs() < 1e-9);
    assert_eq!(v["tally"]["count_a0"], 0);
}

#[test]
fn mixed_balanced_weights_are_even() {
    let out = spinsim(&[
        "mixed",
        "--lambda1",
        "0.5",
        "--gamma",
        "0.8",
        "--profile",
        "const:0.9",
        "--check",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let p1 = v["analytic"]["p_o1"].as_f64().unwrap();
    let p2 = v["analytic"]["p_o2"].as_f64().unwrap();
    assert!((p1 - p2).abs() < 1e-12);
}

#[test]
fn mixed_rejects_asymmetric_profile() {
    let out = spinsim(&[
        "mixed",
        "--lambda1",
        "0.75",
        "--gamma",
        "1.0",
        "--profile",
        "cosine",
        "--n",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("asymmetric"), "stderr: {err}");
}

#[test]
fn sweep_analytic_column_is_monotone() {
    let out = spinsim(&[
        "sweep",
        "--scenario",
        "machine",
        "--points",
        "33",
        "--check",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "gamma,mu1,mu2,p_detect,freq_o1,freq_o2,freq_a0,z_o1,z_o2,z_a0,chi_squared,p_value,pass"
    );
    let mu1: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(mu1.len(), 33);
    assert_eq!(mu1[0], 1.0);
    assert_eq!(mu1[32], 0.0);
    assert!(
        mu1.windows(2).all(|w| w[1] <= w[0] + 1e-15),
        "mu1 not nonincreasing: {mu1:?}"
    );
}

#[test]
fn sweep_simulated_grid_passes() {
    let out = spinsim(&[
        "sweep",
        "--scenario",
        "machine",
        "--points",
        "9",
        "--n",
        "100000",
        "--seed",
        "1234",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 9);
    for p in points {
        assert_eq!(p["report"]["pass"], Value::Bool(true));
        let z = p["report"]["outcomes"][0]["z"].as_f64().unwrap();
        assert!(z.abs() < 5.0);
    }
}

#[test]
fn sweep_mixed_scenario() {
    let out = spinsim(&[
        "sweep",
        "--scenario",
        "mixed",
        "--lambda1",
        "0.9",
        "--points",
        "5",
        "--profile",
        "const:0.8",
        "--n",
        "50000",
        "--seed",
        "21",
        "--format",
        "json",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    let points = v["points"].as_array().unwrap();
    // Conditional law: mu1 = (1 + 0.8 cos γ)/2 since |2λ1 − 1| = 0.8.
    for p in points {
        let gamma = p["gamma"].as_f64().unwrap();
        let mu1 = p["mu1"].as_f64().unwrap();
        assert!((mu1 - (1.0 + 0.8 * gamma.cos()) / 2.0).abs() < 1e-12);
        assert_eq!(p["report"]["pass"], Value::Bool(true));
    }
    // The asymmetric preset is still refused for mixed sweeps.
    let bad = spinsim(&[
        "sweep",
        "--scenario",
        "mixed",
        "--points",
        "3",
        "--profile",
        "cosine",
        "--n",
        "10",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sweep_needs_two_points() {
    assert_eq!(
        spinsim(&["sweep", "--points", "1", "--check"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn sweep_json_contains_all_csv_numbers() {
    let args = [
        "sweep",
        "--scenario",
        "unified",
        "--points",
        "3",
        "--profile",
        "const:0.8",
        "--n",
        "20000",
        "--seed",
        "77",
    ];
    let csv = spinsim(&[&args[..], &["--format", "csv"]].concat());
    let json = spinsim(&[&args[..], &["--format", "json"]].concat());
    assert_eq!(csv.status.code(), Some(0));
    let v = stdout_json(&json);
    let points = v["points"].as_array().unwrap();

    let text = String::from_utf8(csv.stdout).unwrap();
    for (line, point) in text.lines().skip(1).zip(points) {
        let cells: Vec<&str> = line.split(',').collect();
        let gamma: f64 = cells[0].parse().unwrap();
        assert_eq!(gamma, point["gamma"].as_f64().unwrap());
        let freq_o1: f64 = cells[4].parse().unwrap();
        assert_eq!(
            freq_o1,
            point["report"]["outcomes"][0]["frequency"]
                .as_f64()
                .unwrap()
        );
        let z_a0: f64 = cells[9].parse().unwrap();
        assert_eq!(z_a0, point["report"]["outcomes"][2]["z"].as_f64().unwrap());
    }
}

#[test]
fn ensemble_worked_model() {
    let dir = std::env::temp_dir().join("spinsim_cli_ensemble_test");
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("model.txt");
    write_file(
        &model,
        "# worked model\n0.6 0.8333333333333334 1\n0.4 0.5 0\n",
    );
    let out = spinsim(&[
        "ensemble",
        "--model",
        model.to_str().unwrap(),
        "--n",
        "100000",
        "--seed",
        "5",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["analytic"]["p_detect"].as_f64().unwrap() - 0.7).abs() < 1e-12);
    assert!((v["analytic"]["p_total"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["analytic"]["p_conditional"].as_f64().unwrap() - 5.0 / 7.0).abs() < 1e-12);
    assert_eq!(v["report"]["pass"], Value::Bool(true));
}

#[test]
fn ensemble_deterministic_detection() {
    let dir = std::env::temp_dir().join("spinsim_cli_ensemble_det");
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("model.txt");
    // All-or-nothing detection; the conditional covers detected microstates only.
    write_file(&model, "0.5 1 1\n0.5 0 0\n");
    let out = spinsim(&[
        "ensemble",
        "--model",
        model.to_str().unwrap(),
        "--n",
        "50000",
        "--seed",
        "6",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["analytic"]["p_detect"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["analytic"]["p_conditional"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    // Detected objects come only from the first microstate.
    assert_eq!(v["tally"]["count_o2"], 0);
}

#[test]
fn ensemble_bad_file_exits_2() {
    let dir = std::env::temp_dir().join("spinsim_cli_ensemble_bad");
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("bad.txt");
    write_file(&model, "0.5 1\n");
    assert_eq!(
        spinsim(&["ensemble", "--model", model.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        spinsim(&["ensemble", "--model", "/no/such/file"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn reruns_are_byte_identical_modulo_duration() {
    let args = [
        "unified",
        "--gamma",
        "0.9",
        "--profile",
        "const:0.8",
        "--n",
        "50000",
        "--seed",
        "11",
        "--format",
        "json",
    ];
    let mut a = stdout_json(&spinsim(&args));
    let mut b = stdout_json(&spinsim(&args));
    a.as_object_mut().unwrap().remove("duration_seconds");
    b.as_object_mut().unwrap().remove("duration_seconds");
    assert_eq!(a, b);

    // CSV carries no timing at all and reproduces byte for byte.
    let csv_args = [
        "unified",
        "--gamma",
        "0.9",
        "--profile",
        "const:0.8",
        "--n",
        "50000",
        "--seed",
        "11",
        "--format",
        "csv",
    ];
    assert_eq!(spinsim(&csv_args).stdout, spinsim(&csv_args).stdout);
}

#[test]
fn worker_count_does_not_change_results() {
    let base = [
        "machine", "--gamma", "1.2", "--n", "100000", "--seed", "31", "--format", "json",
    ];
    let reference = stdout_json(&spinsim(&[&base[..], &["--workers", "1"]].concat()));
    let par = stdout_json(&spinsim(&[&base[..], &["--workers", "7"]].concat()));
    assert_eq!(reference["tally"], par["tally"]);

    // Environment variable path.
    let out = Command::new(env!("CARGO_BIN_EXE_spinsim"))
        .args(base)
        .env("SPINSIM_WORKERS", "3")
        .output()
        .unwrap();
    let env_run = serde_json::from_slice::<Value>(&out.stdout).unwrap();
    assert_eq!(env_run["params"]["workers"], 3);
    assert_eq!(reference["tally"], env_run["tally"]);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join("spinsim_cli_out_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("record.json");
    let out = spinsim(&[
        "machine",
        "--gamma",
        "0.5",
        "--n",
        "1000",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "machine");
}

#[test]
fn density_file_with_normalization_flag() {
    let dir = std::env::temp_dir().join("spinsim_cli_density_test");
    std::fs::create_dir_all(&dir).unwrap();
    let density = dir.join("f.tsv");
    // Deliberately unnormalized uniform table.
    let mut text = String::new();
    for i in 0..=40 {
        let t = PI / 2.0 + (PI / 2.0) * i as f64 / 40.0;
        text.push_str(&format!("{t} 1.0\n"));
    }
    write_file(&density, &text);
    let arg = format!("file:{}", density.display());

    // Strict load refuses it.
    let strict = spinsim(&["unified", "--gamma", "1.0", "--density", &arg, "--check"]);
    assert_eq!(strict.status.code(), Some(2));

    // Normalized load matches the uniform closed form.
    let out = spinsim(&[
        "unified",
        "--gamma",
        "1.0",
        "--density",
        &arg,
        "--normalize-density",
        "--check",
        "--format",
        "json",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    let expected_boundary = ((1.0f64 + 0.0) * (0.5f64).cos().powi(2) - 1.0).acos();
    let got = v["analytic"]["boundary_angle"].as_f64().unwrap();
    assert!(
        (got - expected_boundary).abs() < 1e-6,
        "boundary {got} vs {expected_boundary}"
    );

    // --theta0 conflicts with a tabulated density.
    let conflict = spinsim(&[
        "unified",
        "--gamma",
        "1.0",
        "--density",
        &arg,
        "--normalize-density",
        "--theta0",
        "1.0",
        "--check",
    ]);
    assert_eq!(conflict.status.code(), Some(2));
}
