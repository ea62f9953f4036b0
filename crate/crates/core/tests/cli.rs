use std::path::Path;
use std::process::{Command, Output};

use perclab::output::TRAJECTORY_HEADER;
use perclab::{theory, ModelParams};
use serde_json::Value;

fn perc_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perc-lab"))
        .args(args)
        .env_remove("PERC_LAB_SEED")
        .output()
        .expect("spawn perc-lab")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SIM: &[&str] = &[
    "sim", "--n", "3000", "--p", "0.004", "--k", "2", "--tau", "0.2", "--gamma", "2", "--a0", "80",
];

#[test]
fn missing_p_is_a_usage_error() {
    let out = perc_lab(&["theory", "--n", "1e6", "--k", "2", "--a0", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn theory_report_values() {
    let out = perc_lab(&[
        "theory", "--n", "1e6", "--p", "1e-4", "--k", "2", "--tau", "0", "--gamma", "1", "--a0",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["a_c"].as_f64().unwrap() - 50.0).abs() < 1e-9);
    assert!((v["lambda"].as_f64().unwrap() - 100.0).abs() < 1e-9);
    assert_eq!(v["beta"].as_f64().unwrap(), 1.0);
    let traj: Vec<f64> = v["traj"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!(traj.len() <= 20);
    for (got, want) in traj.iter().zip([100.0, 150.0, 212.5]) {
        assert!((got - want).abs() < 1e-9);
    }

    let out = perc_lab(&[
        "theory", "--n", "7000", "--p", "0.1", "--k", "3", "--tau", "0.3", "--gamma", "5", "--a0",
        "100",
    ]);
    let v = json(&out);
    assert_eq!(v["regime"], "NORMALIZES");
    let want = (0.7f64 / 1.5).powi(3) * 7000.0;
    assert!((v["predicted_final"].as_f64().unwrap() - want).abs() < 1e-6 * want);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for tag in ["a", "b"] {
        let csv = dir.path().join(format!("{tag}.csv"));
        let sum = dir.path().join(format!("{tag}.json"));
        let mut args = SIM.to_vec();
        args.extend(["--engine", "async", "--trials", "3", "--seed", "7"]);
        args.extend(["--out", path_arg(&csv), "--summary", path_arg(&sum)]);
        let out = perc_lab(&args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push((std::fs::read(&csv).unwrap(), std::fs::read(&sum).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn trajectory_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    for engine in ["sync", "async"] {
        let csv = dir.path().join(format!("{engine}.csv"));
        let mut args = SIM.to_vec();
        args.extend(["--engine", engine, "--trials", "2", "--out", path_arg(&csv)]);
        let out = perc_lab(&args);
        assert_eq!(out.status.code(), Some(0));
        let mut reader = csv::Reader::from_path(&csv).unwrap();
        let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(header, TRAJECTORY_HEADER);
        let mut rows = 0;
        for rec in reader.records() {
            let rec = rec.unwrap();
            let trial: usize = rec[0].parse().unwrap();
            let step: usize = rec[1].parse().unwrap();
            let time: f64 = rec[2].parse().unwrap();
            let nums: Vec<usize> = (3..7).map(|i| rec[i].parse().unwrap()).collect();
            assert!(trial < 2);
            assert_eq!(nums[0], nums[1] + nums[2]);
            if engine == "sync" {
                assert_eq!(step as f64, time);
            }
            rows += 1;
        }
        assert!(rows > 2);
    }
}

#[test]
fn empty_graph_gives_one_row_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = perc_lab(&[
        "sim",
        "--n",
        "500",
        "--p",
        "0",
        "--k",
        "2",
        "--a0",
        "30",
        "--trials",
        "4",
        "--out",
        path_arg(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| &r[3] == "30"));
}

#[test]
fn unit_delays_match_sync_rounds() {
    let dir = tempfile::tempdir().unwrap();
    let sync_csv = dir.path().join("s.csv");
    let async_csv = dir.path().join("a.csv");
    let mut args = SIM.to_vec();
    args.extend(["--seed", "3", "--out", path_arg(&sync_csv)]);
    assert_eq!(perc_lab(&args).status.code(), Some(0));
    let mut args = SIM.to_vec();
    args.extend([
        "--seed",
        "3",
        "--engine",
        "async",
        "--delay",
        "unit",
        "--out",
        path_arg(&async_csv),
    ]);
    assert_eq!(perc_lab(&args).status.code(), Some(0));

    let rounds: Vec<(f64, usize)> = csv::Reader::from_path(&sync_csv)
        .unwrap()
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[2].parse().unwrap(), r[3].parse().unwrap())
        })
        .collect();
    let events: Vec<(f64, usize)> = csv::Reader::from_path(&async_csv)
        .unwrap()
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[2].parse().unwrap(), r[3].parse().unwrap())
        })
        .collect();
    for &(t, total) in &rounds {
        let at_t = events
            .iter()
            .filter(|e| e.0 <= t)
            .map(|e| e.1)
            .max()
            .unwrap();
        assert_eq!(at_t, total, "round {t}");
    }
}

#[test]
fn config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let mut args = SIM.to_vec();
    args.extend(["--trials", "3", "--seed", "11", "--engine", "async"]);
    args.extend([
        "--summary",
        path_arg(&first),
        "--emit-config",
        path_arg(&cfg),
    ]);
    assert_eq!(perc_lab(&args).status.code(), Some(0));
    let out = perc_lab(&[
        "sim",
        "--config",
        path_arg(&cfg),
        "--summary",
        path_arg(&second),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
}

#[test]
fn seed_from_the_environment_wins() {
    let mut args = SIM.to_vec();
    args.extend(["--trials", "2", "--seed", "1"]);
    let run = |env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_perc-lab"));
        cmd.args(&args).env_remove("PERC_LAB_SEED");
        if let Some(s) = env {
            cmd.env("PERC_LAB_SEED", s);
        }
        json(&cmd.output().unwrap())
    };
    let with_env = run(Some("42"));
    assert_eq!(with_env["base_seed"], 42);
    let mut explicit = SIM.to_vec();
    explicit.extend(["--trials", "2", "--seed", "42"]);
    assert_eq!(with_env, json(&perc_lab(&explicit)));
    assert_eq!(run(None)["base_seed"], 1);
}

#[test]
fn chaos_needs_inhibition_to_dominate() {
    let out = perc_lab(&[
        "chaos", "--n", "1e5", "--p", "3.16e-4", "--k", "2", "--tau", "0.2", "--gamma", "3",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn chaos_target_at_the_lower_end() {
    let params = ModelParams::new(100_000, 3.16e-4, 2, 0.5, 3.0, 0, 0);
    let a_c = theory::compute_threshold(&params).unwrap();
    let (_, target) = theory::ell_from_start(&params, 1.5 * a_c, 0.1 * 100_000.0, 10_000).unwrap();
    let target = format!("{target}");
    let out = perc_lab(&[
        "chaos", "--n", "1e5", "--p", "3.16e-4", "--k", "2", "--tau", "0.5", "--gamma", "3",
        "--target", &target,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert!(
        (v["c_found"].as_f64().unwrap() - 1.5).abs() < 1e-9,
        "{}",
        v["c_found"]
    );
    assert!(!v["plateau_table"].as_array().unwrap().is_empty());
}

#[test]
fn unwritable_output_fails_before_running() {
    let out = perc_lab(&[
        "sim",
        "--n",
        "1e6",
        "--p",
        "1e-4",
        "--k",
        "2",
        "--a0",
        "300",
        "--trials",
        "1000",
        "--out",
        "/nonexistent/dir/t.csv",
    ]);
    assert_ne!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn sweep_writes_one_row_per_grid_value() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = perc_lab(&[
        "sweep",
        "--n",
        "2000",
        "--p",
        "0.01",
        "--k",
        "2",
        "--param",
        "a0",
        "--grid",
        "5,20,80",
        "--trials",
        "3",
        "--out",
        path_arg(&csv),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv::Reader::from_path(&csv).unwrap().records().count();
    assert_eq!(rows, 3);
    assert_eq!(json(&out).as_array().unwrap().len(), 3);
}
