use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn omega(args: &[&str]) -> Output {
    omega_env(args, &[])
}

fn omega_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_omega"));
    cmd.args(args).env_remove("OMEGA_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_string()
}

const MODEL: &[&str] = &["--mu", "0.05,0.08,0.06", "--cov", "0.04,0.01,0;0.01,0.09,0.02;0,0.02,0.0625"];

#[test]
fn normal_omega_value() {
    let out = omega(&["omega", "--mu", "0.05", "--sigma", "0.1", "--theta", "0.02"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("label,mu,sigma,theta,sharpe,omega"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[..4], ["law1", "0.05", "0.1", "0.02"]);
    assert!((row[4].parse::<f64>().unwrap() - 0.3).abs() < 1e-12);
    // high-precision quadrature of both integrals
    let value: f64 = row[5].parse().unwrap();
    assert!((value / 2.124_601_151_272_888_6 - 1.0).abs() < 1e-13, "{value}");
}

#[test]
fn missing_sigma_is_a_usage_error() {
    let out = omega(&["omega", "--mu", "0.05", "--theta", "0.02"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--sigma"), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_flag_values_are_usage_errors() {
    assert_eq!(code(&omega(&["omega", "--mu", "x", "--sigma", "0.1"])), 2);
    assert_eq!(code(&omega(&["omega", "--mu", "0", "--sigma", "-1"])), 2);
    assert_eq!(code(&omega(&["sample", "--mu", "0,0", "--cov", "1,0;0"])), 2);
    assert_eq!(code(&omega(&["no-such-command"])), 2);
}

#[test]
fn existence_exit_codes() {
    let out = omega(&["check-existence", "--generator", "student_t", "--nu", "1"]);
    assert_eq!(code(&out), 4);
    assert_eq!(stdout(&out).trim(), "undefined (tail index 1.0 <= 1)");

    let out = omega(&["check-existence", "--generator", "cauchy"]);
    assert_eq!(code(&out), 4);

    let out = omega(&["check-existence", "--generator", "student_t", "--nu", "1.5"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("defined"));

    let out = omega(&["omega", "--mu", "0", "--sigma", "1", "--generator", "student_t", "--nu", "1"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("α > 1"));
}

#[test]
fn returns_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "r.csv", "date,a,b\n1,0.02,-0.01\n2,-0.01,0.03\n3,0.04,1e-2\n");
    let out = omega(&["omega", "--returns", &path, "--theta", "0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // a: gains 0.06, losses 0.01; b: gains 0.04, losses 0.01
    assert_eq!(stdout(&out), "label,n,theta,omega,gain_loss_ratio\na,3,0,6,6\nb,3,0,4,4\n");

    let out =
        omega(&["curve", "--returns", &path, "--theta-min", "-0.02", "--theta-max", "0.05", "--theta-count", "8"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("theta,a,b"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn malformed_returns_report_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "r.csv", "date,a\n1,0.02\n2,abc\n");
    let out = omega(&["omega", "--returns", &path]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("r.csv:3:2:"), "{}", stderr(&out));

    let empty = write(dir.path(), "e.csv", "date,a\n");
    let out = omega(&["omega", "--returns", &empty]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("no rows"));
}

#[test]
fn sampling_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    let args = |p: &Path| -> Vec<String> {
        let mut v: Vec<String> = ["sample", "--generator", "student_t", "--nu", "5", "--n-samples", "2500"]
            .iter()
            .chain(MODEL)
            .map(|s| s.to_string())
            .collect();
        v.extend(["--output".to_string(), p.to_str().unwrap().to_string()]);
        v
    };
    let run = |p: &Path, extra: &[&str], env: &[(&str, &str)]| {
        let mut v = args(p);
        v.extend(extra.iter().map(|s| s.to_string()));
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        let out = omega_env(&refs, env);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    };
    run(&a, &["--seed", "9"], &[]);
    run(&b, &[], &[("OMEGA_SEED", "9")]);
    run(&c, &["--seed", "10"], &[("OMEGA_SEED", "9")]);
    let (a, b, c) = (fs::read(a).unwrap(), fs::read(b).unwrap(), fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next(), Some("x1,x2,x3,radius"));
    assert_eq!(text.lines().count(), 2501);

    assert_eq!(code(&omega_env(&["sample", "--mu", "0", "--sigma", "1"], &[("OMEGA_SEED", "seven")])), 2);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.toml", "mu = [0.05]\nsigma = [0.1]\ntheta = 0.5\n");
    let from_file = omega(&["omega", "--config", &config]);
    assert_eq!(code(&from_file), 0, "{}", stderr(&from_file));
    assert!(stdout(&from_file).contains(",0.5,"));
    let overridden = omega(&["omega", "--config", &config, "--theta", "0.02"]);
    assert!(stdout(&overridden).contains(",0.02,0.3,"));

    let bad = write(dir.path(), "bad.toml", "mu = [0.05]\nsigmaa = 1\n");
    let out = omega(&["omega", "--config", &bad]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("bad.toml:2:"), "{}", stderr(&out));
}

#[test]
fn model_file_and_density_grid() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.toml", "mu = [0.0, 0.0]\ncov = [[1.0, 0.0], [0.0, 1.0]]\n");
    let out = omega(&["density-grid", "--model", &model, "--x-range", "0:0:1", "--y-range", "0:1:2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    let two_pi = 2.0 * std::f64::consts::PI;
    assert!((rows[0][2] - 1.0 / two_pi).abs() < 1e-15);
    assert!((rows[1][2] - (-0.5f64).exp() / two_pi).abs() < 1e-15);

    let out = omega(&["density-grid", "--mu", "0", "--sigma", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn optimize_agrees_and_is_reproducible() {
    let mut args: Vec<&str> = vec![
        "optimize",
        "--generator",
        "student_t",
        "--nu",
        "5",
        "--target-vol",
        "0.22",
        "--theta",
        "0.01",
        "--seed",
        "4",
    ];
    args.extend(MODEL);
    let a = omega(&args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let b = omega(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "objective,theta,candidate,label,score,w1,w2,w3");
    let sharpe: Vec<&str> = lines[1].split(',').collect();
    let omega_row: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(sharpe[0], "sharpe");
    assert_eq!(omega_row[0], "omega");
    // same winner under both objectives
    assert_eq!(sharpe[2..4], omega_row[2..4]);
    let budget: f64 = sharpe[5..].iter().map(|w| w.parse::<f64>().unwrap()).sum();
    assert!((budget - 1.0).abs() < 1e-12);
}

#[test]
fn infeasible_target_exit_code() {
    let mut args: Vec<&str> = vec!["optimize", "--target-vol", "0.01"];
    args.extend(MODEL);
    let out = omega(&args);
    assert_eq!(code(&out), 7);
    assert!(stderr(&out).contains("minimum volatility"), "{}", stderr(&out));
}

#[test]
fn equivalence_writes_both_reports() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("eq.csv");
    let mut args: Vec<&str> = vec![
        "equivalence",
        "--target-vol",
        "0.22",
        "--n-candidates",
        "40",
        "--theta-min",
        "-0.1",
        "--theta-max",
        "0.15",
        "--theta-count",
        "6",
        "--output",
        output.to_str().unwrap(),
    ];
    args.extend(MODEL);
    let out = omega(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("argmax agrees at all 6 thresholds"));
    let main = fs::read_to_string(&output).unwrap();
    assert_eq!(main.lines().next(), Some("theta,argmax_omega,argmax_sharpe,agree"));
    assert!(main.lines().skip(1).all(|l| l.ends_with(",true")));
    let long = fs::read_to_string(dir.path().join("eq.long.csv")).unwrap();
    assert_eq!(long.lines().next(), Some("theta,candidate,omega,sharpe,rank_omega,rank_sharpe"));
    assert_eq!(long.lines().count(), 1 + 6 * 40);

    for mode in ["constraint-off", "empirical-lognormal"] {
        let mut args = args.clone();
        args.extend(["--mode", mode, "--n-samples", "5000"]);
        let out = omega(&args);
        assert_eq!(code(&out), 0, "{mode}: {}", stderr(&out));
        assert!(stderr(&out).starts_with(mode));
    }
}

#[test]
fn failed_run_leaves_existing_output_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let output = write(dir.path(), "keep.csv", "previous\n");
    let out = omega(&["omega", "--mu", "0", "--sigma", "1", "--generator", "cauchy", "--output", &output]);
    assert_eq!(code(&out), 4);
    assert_eq!(fs::read_to_string(&output).unwrap(), "previous\n");
    // no temporary files left behind
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = omega(&["omega", "--mu", "0", "--sigma", "1", "--output", "/nonexistent-dir/x.csv"]);
    assert_eq!(code(&out), 6);
}

#[test]
fn normal_curves_decrease() {
    let out = omega(&["curve", "--mu", "0.05,0.08", "--sigma", "0.1,0.2", "--labels", "low,high"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("theta,low,high"));
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 201);
    for col in 1..=2 {
        assert!(rows.windows(2).all(|w| w[1][col] < w[0][col]));
    }
}

#[test]
fn normal_equivalence_agrees_everywhere() {
    let mut args: Vec<&str> = vec!["equivalence", "--target-vol", "0.22", "--n-candidates", "50", "--seed", "1"];
    args.extend(MODEL);
    let out = omega(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 22);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}
