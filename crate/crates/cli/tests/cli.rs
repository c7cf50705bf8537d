use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pfo_cli::config::{BasisSpec, GaussianInit, MapSpec};
use pfo_cli::{ExperimentConfig, RunArtifact};

fn pfo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfo")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).trim().to_string()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_json(path: &Path, value: serde_json::Value) -> PathBuf {
    fs::write(path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    path.to_path_buf()
}

#[test]
fn golden_headers() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g");
    let e = dir.path().join("e");
    assert_eq!(code(&pfo(&["fit-gaussian", "--out", s(&g), "--max-iters", "3"])), 0);
    assert_eq!(code(&pfo(&["fit-empirical", "--out", s(&e), "--max-iters", "3"])), 0);
    assert_eq!(header(&g.join("trace.csv")), "iter,cost,grad_norm,a11,a12,a21,a22");
    assert_eq!(header(&g.join("ellipses.csv")), "iter,pair,series,level,point,x,y");
    assert_eq!(header(&e.join("trace.csv")), "iter,cost,grad_norm,theta1,theta2,theta3");
    assert_eq!(header(&e.join("map_curves.csv")), "iter,x,s");
    assert_eq!(header(&e.join("densities.csv")), "iter,pair,bin,left,right,pushforward,target");

    let d0 = write_json(&dir.path().join("d0.json"), serde_json::json!({"dim": 1, "points": [[0.0], [1.0]], "weights": [0.5, 0.5]}));
    let o = dir.path().join("o");
    assert_eq!(code(&pfo(&["ot", s(&d0), s(&d0), "--out", s(&o)])), 0);
    assert_eq!(header(&o.join("coupling.csv")), "row,col,mass");
}

#[test]
fn plot_files_have_fixed_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g");
    let e = dir.path().join("e");
    assert_eq!(code(&pfo(&["fit-gaussian", "--out", s(&g), "--max-iters", "4", "--dump-iters", "0,2"])), 0);
    // Iterations 0, 2 and the final 4; five pairs; two series; two levels; 128 points.
    let rows = fs::read_to_string(g.join("ellipses.csv")).unwrap().lines().count() - 1;
    assert_eq!(rows, 3 * 5 * 2 * 2 * 128);

    assert_eq!(code(&pfo(&["fit-empirical", "--out", s(&e), "--max-iters", "4", "--dump-iters", "1"])), 0);
    let curves = fs::read_to_string(e.join("map_curves.csv")).unwrap().lines().count() - 1;
    assert_eq!(curves, 2 * 200);
    let bins = fs::read_to_string(e.join("densities.csv")).unwrap().lines().count() - 1;
    assert_eq!(bins, 2 * 50);
}

#[test]
fn config_round_trips_bit_exactly() {
    let mut cfg = ExperimentConfig {
        seed: u64::MAX,
        ..ExperimentConfig::default()
    };
    cfg.descent.step = 0.1 + 0.2;
    cfg.descent.grad_tol = 5e-324;
    cfg.ar1.a0 = vec![vec![1.0 / 3.0, -0.0], vec![f64::MAX, -1e-300]];
    cfg.gaussian_init = GaussianInit::Matrix(vec![vec![std::f64::consts::PI, 2.0_f64.sqrt()], vec![1e22, 0.7]]);
    cfg.basis = BasisSpec::Monomials { exponents: vec![5, 2, 0] };
    cfg.theta_init = Some(vec![-2.000000000000001, 0.30000000000000004]);
    cfg.ulam.map = MapSpec::Linear {
        matrix: vec![vec![0.9, -0.4], vec![0.4, 0.9]],
    };
    let json = cfg.to_json();
    let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.to_json(), json);
    assert_eq!(back.descent.step.to_bits(), cfg.descent.step.to_bits());
    assert_eq!(back.ar1.a0[0][1].to_bits(), (-0.0f64).to_bits());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&pfo(&["--help"])), 0);
    assert_eq!(code(&pfo(&["--version"])), 0);
    assert_eq!(code(&pfo(&[])), 1);
    assert_eq!(code(&pfo(&["fit-gaussian", "--alpha", "abc"])), 1);
    assert_eq!(code(&pfo(&["fit-gaussian", "--alpha", "-1", "--out", s(dir.path())])), 1);
    assert_eq!(code(&pfo(&["ot", "/nonexistent/a.json", "/nonexistent/b.json"])), 1);

    // The literal sum with the default step blows up; the artifact is still written.
    let lit = dir.path().join("lit");
    let out = pfo(&["fit-gaussian", "--sum-pairs", "--out", s(&lit)]);
    assert_eq!(code(&out), 2);
    let artifact = RunArtifact::load(&lit.join("run.json")).unwrap();
    assert_eq!(artifact.status, "error");
    assert!(lit.join("trace.csv").exists());
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"dim\": 1,\n  \"points\": [[0.0]],\n  \"weights\": [1.0,]\n}\n").unwrap();
    let out = pfo(&["ot", s(&bad), s(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"), "{}", String::from_utf8_lossy(&out.stderr));

    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, "{\n  \"seed\": 1,\n  \"descnet\": {}\n}\n").unwrap();
    let out = pfo(&["fit-gaussian", "--config", s(&cfg)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, extra) in [
        ("fit-gaussian", vec![]),
        ("fit-empirical", vec!["--sampling", "random", "--seed", "7", "--max-iters", "300"]),
        ("ulam", vec!["--seed", "3"]),
    ] {
        let a = dir.path().join(format!("{cmd}-a"));
        let b = dir.path().join(format!("{cmd}-b"));
        for d in [&a, &b] {
            let mut args = vec![cmd, "--out", s(d)];
            args.extend(extra.iter().copied());
            assert_eq!(code(&pfo(&args)), 0, "{cmd}");
        }
        let files = RunArtifact::load(&a.join("run.json")).unwrap().files;
        for f in files.iter().filter(|f| f.ends_with(".csv")) {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{cmd}: {f}");
        }
    }
}

#[test]
fn run_artifact_replays_to_the_same_objective() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let out = pfo(&["fit-empirical", "--out", s(&first), "--sampling", "random", "--seed", "11", "--alpha", "0.2", "--max-iters", "500"]);
    assert_eq!(code(&out), 0);
    let a = RunArtifact::load(&first.join("run.json")).unwrap();
    for f in &a.files {
        assert!(first.join(f).exists(), "{f} listed but missing");
    }
    assert!(a.iterations.unwrap() <= a.config.descent.max_iters);

    let second = dir.path().join("second");
    assert_eq!(code(&pfo(&["fit-empirical", "--config", s(&first.join("run.json")), "--out", s(&second)])), 0);
    let b = RunArtifact::load(&second.join("run.json")).unwrap();
    assert!((a.final_cost.unwrap() - b.final_cost.unwrap()).abs() <= 1e-12);
    assert_eq!(a.parameters, b.parameters);
}

#[test]
fn zero_iterations_keep_the_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let e = dir.path().join("e");
    assert_eq!(code(&pfo(&["fit-empirical", "--out", s(&e), "--max-iters", "0"])), 0);
    let trace = fs::read_to_string(e.join("trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0,") && lines[1].ends_with(",-2.0,0.0,2.0"));
}

#[test]
fn simulation_examples() {
    let dir = tempfile::tempdir().unwrap();
    let snaps = |name: &str, extra: &[&str]| {
        let d = dir.path().join(name);
        let mut args = vec!["simulate-ar1", "--out", s(&d)];
        args.extend_from_slice(extra);
        assert_eq!(code(&pfo(&args)), 0);
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("snapshots.json")).unwrap()).unwrap();
        v["snapshots"].as_array().unwrap().clone()
    };
    let noisy = snaps("noisy", &[]);
    assert_eq!(noisy.len(), 6);
    let c2: Vec<f64> = noisy[1]["cov"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap())).collect();
    for (got, want) in c2.iter().zip([4.41, 3.5, 3.5, 3.41]) {
        assert!((got - want).abs() < 1e-12);
    }
    assert_eq!(snaps("two", &["--steps", "2"]).len(), 2);
    let clean = snaps("clean", &["--noise-free"]);
    assert_eq!(clean[1]["cov"], serde_json::json!([[4.25, 3.5], [3.5, 3.25]]));
}

#[test]
fn truth_on_noise_free_data_converges_immediately() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.ar1.noise_cov = vec![vec![0.0; 2]; 2];
    cfg.gaussian_init = GaussianInit::Matrix(cfg.ar1.a0.clone());
    let path = dir.path().join("cfg.json");
    fs::write(&path, cfg.to_json()).unwrap();
    let out_dir = dir.path().join("o");
    assert_eq!(code(&pfo(&["fit-gaussian", "--config", s(&path), "--out", s(&out_dir)])), 0);
    let a = RunArtifact::load(&out_dir.join("run.json")).unwrap();
    assert_eq!(a.status, "converged");
    assert_eq!(a.iterations, Some(0));
}

#[test]
fn distance_examples() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str, v: serde_json::Value| write_json(&dir.path().join(name), v);
    let cloud = p("cloud.json", serde_json::json!({"dim": 2, "points": [[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]], "weights": [0.2, 0.3, 0.5]}));
    let a = p("a.json", serde_json::json!({"dim": 2, "points": [[1.0, 2.0]], "weights": [1.0]}));
    let b = p("b.json", serde_json::json!({"dim": 2, "points": [[4.0, 6.0]], "weights": [1.0]}));
    assert_eq!(stdout(&pfo(&["ot", s(&cloud), s(&cloud)])), "0.00000000000");
    assert_eq!(stdout(&pfo(&["ot", s(&a), s(&b)])), "5.00000000000");

    let g0 = p("g0.json", serde_json::json!({"dim": 2, "mean": [0.0, 0.0], "cov": [[2.0, 0.3], [0.3, 1.0]]}));
    let g1 = p("g1.json", serde_json::json!({"dim": 2, "mean": [1.0, 1.0], "cov": [[1.0, -0.2], [-0.2, 0.5]]}));
    let exact: f64 = stdout(&pfo(&["ot", s(&g0), s(&g1), "--mode", "closed-form"])).parse().unwrap();
    let sampled: f64 = stdout(&pfo(&["ot", s(&g0), s(&g1), "--mode", "sampled", "--samples", "1000", "--seed", "5"]))
        .parse()
        .unwrap();
    assert!((sampled - exact).abs() <= 0.05 * exact, "{sampled} vs {exact}");
    // Twelve significant digits.
    let text = stdout(&pfo(&["ot", s(&g0), s(&g1)]));
    assert_eq!(text.chars().filter(char::is_ascii_digit).count(), 12, "{text}");
}

#[test]
fn linear_basis_on_dirac_data_matches_dmd() {
    let dir = tempfile::tempdir().unwrap();
    let traj = [[1.0, 0.5], [0.72, 0.81], [0.33, 1.02], [-0.1, 1.05], [-0.49, 0.93], [-0.8, 0.62]];
    let snaps: Vec<_> = traj
        .iter()
        .map(|x| serde_json::json!({"dim": 2, "points": [x], "weights": [1.0]}))
        .collect();
    let file = write_json(&dir.path().join("dirac.json"), serde_json::json!({ "snapshots": snaps }));
    let out_dir = dir.path().join("o");
    let out = pfo(&[
        "fit-empirical", "--snapshots", s(&file), "--basis", "linear", "--alpha", "0.5", "--max-iters", "100000", "--grad-tol", "1e-11",
        "--out", s(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let fitted = RunArtifact::load(&out_dir.join("run.json")).unwrap().parameters;

    let states: Vec<_> = traj.iter().map(|x| pfo_core::DVector::from_row_slice(x)).collect();
    let dmd = pfo_core::baselines::dmd_least_squares(&states).unwrap();
    for (k, v) in fitted.iter().enumerate() {
        assert!((v - dmd[(k / 2, k % 2)]).abs() < 1e-6, "{fitted:?} vs {dmd}");
    }
}

#[test]
fn writes_leave_no_temporary_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    assert_eq!(code(&pfo(&["edmd", "--out", s(&o)])), 0);
    let mut names: Vec<String> = fs::read_dir(&o).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["edmd_operator.csv", "run.json"]);
}
