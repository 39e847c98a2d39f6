use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qdisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdisc")).args(args).output().unwrap()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = vec!["--out-dir", dir.to_str().unwrap()];
    all.extend_from_slice(args);
    let out = qdisc(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = qdisc(&["sweep", "--config", "missing.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.cfg"));
}

#[test]
fn bad_arguments_exit_2_and_help_exits_0() {
    assert_eq!(qdisc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qdisc(&["optimize", "--delta", "0.3"]).status.code(), Some(2));
    assert_eq!(qdisc(&["boundary", "--surface", "x.csv", "--numerator", "qaoa", "--denominator", "maj"]).status.code(), Some(2));
    assert_eq!(qdisc(&["--help"]).status.code(), Some(0));
    assert_eq!(qdisc(&["--version"]).status.code(), Some(0));
}

#[test]
fn invalid_config_values_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "n_queries = 4\nprotocols = [\"maj\"]\n").unwrap();
    let out = qdisc(&["--config", cfg.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap(), "sweep"]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(&cfg, "delta_stepz = 4\n").unwrap();
    assert_eq!(qdisc(&["--config", cfg.to_str().unwrap(), "sweep"]).status.code(), Some(2));
}

#[test]
fn hybrid_curve_csv() {
    let tmp = tempfile::tempdir().unwrap();
    run_in(tmp.path(), &["hybrid-curve", "--n", "100", "--sigma-min", "0.01", "--sigma-max", "2", "--points", "30"]);
    let text = fs::read_to_string(tmp.path().join("hybrid_curve.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "sigma,sigma_over_pi,xi_min,xi_large,xi_small,regime,note");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 30);
    assert_eq!(rows[0][5], "coherent-optimal");
    assert_eq!(rows[29][5], "incoherent-optimal");
    let xi: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(xi.windows(2).all(|w| w[1] < w[0]));
    let m = json(&tmp.path().join("manifest.json"));
    assert_eq!(m["command"], "hybrid-curve");
    assert_eq!(m["config"]["args"]["points"], 30);
}

#[test]
fn hybrid_curve_rejects_bad_range() {
    let out = qdisc(&["hybrid-curve", "--n", "10", "--sigma-min", "0", "--sigma-max", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_then_boundary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("sweep.toml");
    fs::write(
        &cfg,
        "delta_min = 0.0\ndelta_max = 0.3\ndelta_steps = 7\nsigma_min = 0.0\nsigma_max = 0.8\nsigma_steps = 9\n\
         protocols = [\"maj\", \"qsp-simple\", \"helstrom\"]\n",
    )
    .unwrap();
    let out_dir = tmp.path().join("out");
    let out = qdisc(&["--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap(), "sweep"]);
    assert!(out.status.success());
    let surfaces = fs::read_to_string(out_dir.join("surfaces.csv")).unwrap();
    assert_eq!(surfaces.lines().count(), 1 + 3 * 7 * 9);
    for f in ["maj.svg", "qsp-simple.svg", "helstrom.svg", "ratio.svg", "ratio.csv", "boundary.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    // δ = 0 makes every protocol a coin flip, so the first column has ratio 1.
    let svg = fs::read_to_string(out_dir.join("ratio.svg")).unwrap();
    assert!(svg.contains(r##"fill="#ffffff""##));
    let ratio = fs::read_to_string(out_dir.join("ratio.csv")).unwrap();
    let first: Vec<&str> = ratio.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[2], "1");

    // Swapped ratio through the standalone subcommand.
    let b_dir = tmp.path().join("b");
    let out = run_in(
        &b_dir,
        &["boundary", "--surface", out_dir.join("surfaces.csv").to_str().unwrap(), "--numerator", "qsp-simple", "--denominator", "maj"],
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("polylines"), "{stdout}");
    let boundary = fs::read_to_string(b_dir.join("boundary.csv")).unwrap();
    assert!(boundary.starts_with("polyline,delta,sigma\n"));
    // The δ = 0 column sits exactly on the level set; look at the interior.
    let points: Vec<(f64, f64)> = boundary
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
            (f[0], f[1])
        })
        .filter(|p| p.0 > 0.0)
        .collect();
    assert!(!points.is_empty());
    assert!(points.iter().all(|p| (p.1 - 0.416).abs() < 0.05), "{points:?}");

    let missing = qdisc(&[
        "--out-dir",
        b_dir.to_str().unwrap(),
        "boundary",
        "--surface",
        out_dir.join("surfaces.csv").to_str().unwrap(),
        "--numerator",
        "adaptive",
        "--denominator",
        "maj",
    ]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("s.toml");
    fs::write(
        &cfg,
        "delta_min = 0.1\ndelta_max = 0.5\ndelta_steps = 2\nsigma_min = 0.0\nsigma_max = 0.3\nsigma_steps = 2\n\
         protocols = [\"qsp-simple-mc\"]\nmc_trials = 500\nseed = 1\nsvg = false\n",
    )
    .unwrap();
    let sweep = |dir: &str, extra: &[&str]| {
        let d = tmp.path().join(dir);
        let mut args = vec!["--config", cfg.to_str().unwrap(), "--out-dir", d.to_str().unwrap()];
        args.extend_from_slice(extra);
        args.push("sweep");
        assert!(qdisc(&args).status.success());
        (fs::read_to_string(d.join("surfaces.csv")).unwrap(), json(&d.join("manifest.json")))
    };
    let (a, ma) = sweep("a", &[]);
    let (b, mb) = sweep("b", &["--seed", "2"]);
    let (c, _) = sweep("c", &["--seed", "1"]);
    assert_eq!(ma["seed"], 1);
    assert_eq!(mb["seed"], 2);
    assert_ne!(a, b);
    assert_eq!(a, c);
    assert!(!tmp.path().join("a").join("ratio.csv").exists());
}

#[test]
fn optimize_reports_json() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("o.toml");
    fs::write(&cfg, "opt_starts = 2\nopt_quadrature_order = 10\n").unwrap();
    run_in(tmp.path(), &["--config", cfg.to_str().unwrap(), "optimize", "--delta", "0.2", "--sigma", "0.1", "--n", "3"]);
    let r = json(&tmp.path().join("optimize.json"));
    assert_eq!(r["params"].as_array().unwrap().len(), 8);
    let e = r["error_prob"].as_f64().unwrap();
    assert!(e <= r["simple_error"].as_f64().unwrap() + 1e-12);
    assert_eq!(qdisc(&["optimize", "--delta", "0.2", "--sigma", "0.1", "--n", "0"]).status.code(), Some(2));
}

#[test]
fn adaptive_reports_exact_and_sampled() {
    let tmp = tempfile::tempdir().unwrap();
    run_in(tmp.path(), &["--seed", "4", "adaptive", "--delta", "0.4", "--sigma", "0.2", "--shots", "3", "--trials", "20000"]);
    let r = json(&tmp.path().join("adaptive.json"));
    let mc = r["error_prob"].as_f64().unwrap();
    let se = r["std_error"].as_f64().unwrap();
    let exact = r["exact_error_prob"].as_f64().unwrap();
    assert!((mc - exact).abs() < 4.0 * se + 1e-12, "{mc} vs {exact}");
}

#[test]
fn oracle_dump_is_json() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["oracle", "dump"]);
    let printed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed, json(&tmp.path().join("oracle.json")));
    let rows = printed.as_array().unwrap();
    assert!(rows.iter().any(|r| r["name"] == "one_shot_error"));
}
