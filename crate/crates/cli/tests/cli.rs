use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dynprice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynprice"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value_after(text: &str, label: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(label))
        .unwrap_or_else(|| panic!("no {label} in {text}"));
    line[label.len()..].trim().parse().unwrap()
}

#[test]
fn solve_prints_closed_forms() {
    let o = dynprice(&["solve"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!((value_after(&s, "p^u =") - 5.0).abs() < 1e-8);
    assert!((value_after(&s, "p^c =") - 10.0 / 3.0).abs() < 1e-8);
    assert!((value_after(&s, "p^D =") - 5.0).abs() < 1e-8);
    assert!((value_after(&s, "J^D per unit n =") - 75.0).abs() < 1e-8);

    let s = stdout(&dynprice(&["solve", "--demand", "exponential 80 0.5"]));
    assert!((value_after(&s, "p^u =") - 2.0).abs() < 1e-8);
    assert!((value_after(&s, "p^c =") - 4.0 * 2f64.ln()).abs() < 1e-8);
    assert!((value_after(&s, "p^D =") - 4.0 * 2f64.ln()).abs() < 1e-8);

    let s = stdout(&dynprice(&[
        "solve",
        "--demand",
        "worstcase z=0.5",
        "--inventory",
        "2",
        "--n",
        "100",
    ]));
    assert!((value_after(&s, "p^D =") - 1.0).abs() < 1e-8);
    assert!((value_after(&s, "J^D at n = 100:") - 50.0).abs() < 1e-8);
}

#[test]
fn run_writes_one_segment_per_clairvoyant_rep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dynprice(&[
        "run",
        "--policy",
        "clairvoyant",
        "--n",
        "1000",
        "--reps",
        "3",
        "--seed",
        "9",
        "--out",
        out,
        "--check",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("traces.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# dynprice "));
    assert!(lines[1].starts_with("# config_hash = "));
    assert_eq!(lines[1].len(), "# config_hash = ".len() + 16);
    assert_eq!(lines[2], "# seed = 9");
    assert_eq!(lines[3], "rep_id,seg_index,price,t_start,duration,sales,revenue_cum");
    let rows = &lines[4..];
    assert_eq!(rows.len(), 3);
    for (rep, row) in rows.iter().enumerate() {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[0], rep.to_string());
        assert_eq!(f[1], "0");
        assert!((f[2].parse::<f64>().unwrap() - 5.0).abs() < 1e-8);
    }
}

#[test]
fn run_needs_a_single_market_size() {
    let o = dynprice(&["run", "--n", "10,100"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_with_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dynprice(&[
        "sweep",
        "--n",
        "100,1000,10000",
        "--reps",
        "30",
        "--out",
        out,
        "--check",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let regret = fs::read_to_string(dir.path().join("regret.csv")).unwrap();
    assert_eq!(regret.lines().filter(|l| l.contains(",dpa,")).count(), 3);
    let slopes = fs::read_to_string(dir.path().join("slopes.csv")).unwrap();
    assert_eq!(slopes.lines().filter(|l| l.starts_with("dpa,")).count(), 1);
    assert!(stdout(&o).contains("slope "));
}

#[test]
fn sweep_rejects_two_sizes() {
    let o = dynprice(&["sweep", "--n", "10,100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("problem.n"), "{}", stderr(&o));
}

#[test]
fn lowerbound_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dynprice(&[
        "lowerbound",
        "--n",
        "1000",
        "--reps",
        "20",
        "--policy",
        "clairvoyant",
        "--out",
        out,
        "--check",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("lowerbound.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "policy,n,K_hat,K_se,R_hat_z0,R_hat_z1,divergence_lhs,divergence_rhs,two_point_lhs,two_point_rhs,pass"
    );
    let row: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(row[0], "clairvoyant");
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
    assert_eq!(row[10], "true");
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.cfg");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "seed = 4\nreplications = 5\n\n[demand]\ncurve = exponential 80 0.5\n\n[problem]\ninventory = 20\nhorizon = 1\nn = 1000\n\n[policy]\nname = fixed\nprice = 2\n",
    );
    let s = stdout(&dynprice(&["solve", "--config", &cfg]));
    assert!((value_after(&s, "p^u =") - 2.0).abs() < 1e-8);
    let s = stdout(&dynprice(&["solve", "--config", &cfg, "--demand", "linear 30 3"]));
    assert!((value_after(&s, "p^u =") - 5.0).abs() < 1e-8);

    let out = dir.path().join("o");
    let o = dynprice(&["run", "--config", &cfg, "--reps", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("traces.csv")).unwrap();
    assert!(csv.contains("# seed = 4"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn invalid_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[problem]\ninventory = -3\n");
    let o = dynprice(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("problem.inventory"), "{}", stderr(&o));

    let o = dynprice(&["solve", "--demand", "cubic 1 2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("demand.curve"), "{}", stderr(&o));
}

#[test]
fn identical_runs_give_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        let o = dynprice(&[
            "sweep",
            "--policy",
            "dpa2",
            "--n",
            "100,1000,5000",
            "--reps",
            "20",
            "--seed",
            "77",
            "--workers",
            workers,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["regret.csv", "slopes.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}
