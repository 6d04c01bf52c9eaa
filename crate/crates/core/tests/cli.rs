use std::path::Path;
use std::process::{Command, Output};

fn heatsource(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatsource"))
        .args(args)
        .env_remove("HEATSOURCE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no '{key}' in output:\n{out}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn final_data_mean_is_one_half() {
    let o = heatsource(&["forward", "--t", "1", "--example", "ex1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,t,u"));
    let u: Vec<f64> = lines
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(u.len(), 51);
    let h = 1.0 / 50.0;
    let mean: f64 = u
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = if i == 0 || i == 50 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * v
        })
        .sum::<f64>()
        * h
        / 3.0;
    assert!((mean - 0.5).abs() <= 1e-6, "{mean}");
}

#[test]
fn noiseless_cutoff_round_trip() {
    let o = heatsource(&[
        "invert-cutoff",
        "--theta",
        "12",
        "--noiselv",
        "0",
        "--example",
        "ex1",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(value(&out, "err_f") <= 1e-6);
    assert_eq!(value(&out, "delta"), 0.0);
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let o = heatsource(&["noise"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn numerical_failure_exit_code() {
    // no cut-off given and δ = 0 leaves the parameter rule undefined
    let o = heatsource(&["invert-cutoff", "--noiselv", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn unknown_example_is_rejected() {
    let o = heatsource(&["example", "ex9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "[regularization]\ntheta = 6 # from file\n").unwrap();
    let o = heatsource(&[
        "--config",
        cfg.to_str().unwrap(),
        "invert-cutoff",
        "--theta",
        "12",
        "--noiselv",
        "0.01",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(value(&stdout(&o), "theta"), 6.0);
}

#[test]
fn seed_from_environment() {
    let run = |env_seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_heatsource"));
        c.args([
            "invert-cutoff",
            "--theta",
            "4",
            "--noiselv",
            "0.05",
            "--seed",
            "1",
        ]);
        match env_seed {
            Some(s) => c.env("HEATSOURCE_SEED", s),
            None => c.env_remove("HEATSOURCE_SEED"),
        };
        value(&stdout(&c.output().unwrap()), "delta")
    };
    let flag = run(None);
    let same = run(Some("1"));
    let other = run(Some("2"));
    assert_eq!(flag, same);
    assert_ne!(flag, other);
}

#[test]
fn noise_command_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("mu.csv");
    let output = dir.path().join("noisy.csv");
    let mut text = String::from("x,value\n");
    for i in 0..=10 {
        text.push_str(&format!("{},{}\n", i as f64 / 10.0, 1.0 + i as f64));
    }
    std::fs::write(&input, text).unwrap();
    let o = heatsource(&[
        "noise",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--noiselv",
        "0.1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let noisy = std::fs::read_to_string(&output).unwrap();
    let rows: Vec<(f64, f64)> = noisy
        .lines()
        .skip(1)
        .map(|l| {
            let mut p = l.split(',').map(|v| v.parse::<f64>().unwrap());
            (p.next().unwrap(), p.next().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 11);
    for (i, (_, v)) in rows.iter().enumerate() {
        let clean = 1.0 + i as f64;
        assert!((v - clean).abs() <= 0.1 * clean + 1e-12);
    }
}

fn table(dir: &Path) -> Vec<u8> {
    let o = heatsource(&[
        "table1",
        "--seeds",
        "3",
        "--noiselv",
        "0.05",
        "--theta",
        "6",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(dir.join("table1.csv")).unwrap()
}

#[test]
fn table_batch_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = table(a.path());
    assert_eq!(first, table(b.path()));
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("noise_level,delta,theta,seed,err_f,err_u_max,n_stop\n"));
    assert_eq!(text.lines().count(), 4);
    let summary = std::fs::read_to_string(a.path().join("table1_summary.csv")).unwrap();
    assert!(summary.lines().next().unwrap().contains("median_err_f"));
}

#[test]
fn iteration_writes_residual_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = heatsource(&[
        "invert-iter",
        "--space",
        "modes",
        "--rule",
        "discrepancy",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = std::fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
    assert!(trace.starts_with("n,residual,threshold\n"));
    let profile = std::fs::read_to_string(dir.path().join("profile_f.csv")).unwrap();
    assert!(profile.starts_with("x,f_true,f_recon\n"));
    assert_eq!(profile.lines().count(), 52);
    let field = std::fs::read_to_string(dir.path().join("field_u.csv")).unwrap();
    assert!(field.starts_with("x,t,u_true,u_recon\n"));
    assert_eq!(field.lines().count(), 1 + 20 * 51);
}
