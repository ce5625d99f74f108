//! End-to-end tests of the `photocell` binary.

use std::path::Path;
use std::process::{Command, Output};

use photocell_cli::ResultTable;

fn photocell(args: &[&str], envs: &[(&str, &str)], dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_photocell"));
    cmd.args(args).current_dir(dir);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Lines that may differ between identical reruns.
fn strip_volatile(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with("# timestamp_unix"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn steady_prints_normalised_populations() {
    let dir = tempfile::tempdir().unwrap();
    let out = photocell(&["steady"], &[], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("rho_x1"), "{text}");
    assert!(text.contains("sum        = 1.000000000000"), "{text}");

    let out = photocell(&["steady", "--uncoupled"], &[], dir.path());
    assert!(stdout(&out).contains("rho_a1"));
}

#[test]
fn iv_emits_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = photocell(
        &["iv", "--out", "curve.csv", "--points", "50"],
        &[],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stdout(&out));
    let text = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let table = ResultTable::parse_csv(&text).unwrap();
    assert_eq!(table.columns, vec!["V", "j_over_e", "P", "Gamma"]);
    assert_eq!(table.rows.len(), 50);
    // Metadata reproduces the run: resolved config keys and the command.
    let keys: Vec<&str> = table.metadata.iter().map(|(k, _)| k.as_str()).collect();
    assert!(keys.contains(&"command"));
    assert!(keys.contains(&"config.Gamma"));
    assert!(keys.contains(&"tool_version"));
}

#[test]
fn identical_configs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "grid_n = 12\n").unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = photocell(
            &["sweep-rates", "--config", "run.cfg", "--out", name],
            &[("PHOTOCELL_THREADS", "2")],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(strip_volatile(&a), strip_volatile(&b));
    assert_eq!(ResultTable::parse_csv(&a).unwrap().rows.len(), 144);
}

#[test]
fn sweep_rates_reproduces_the_published_operating_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = photocell(
        &["sweep-rates", "--grid-n", "50", "--out", "grid.csv"],
        &[],
        dir.path(),
    );
    assert!(out.status.success());
    let table =
        ResultTable::parse_csv(&std::fs::read_to_string(dir.path().join("grid.csv")).unwrap())
            .unwrap();
    // Nearest cell to (gamma_x, gamma_c) = (25, 12) meV carries ~24%.
    let mut best = (f64::INFINITY, 0.0);
    for row in &table.rows {
        let d = (row[0] - 25e-3).abs() + (row[1] - 12e-3).abs();
        if d < best.0 {
            best = (d, row[2]);
        }
    }
    assert!((best.1 - 0.24).abs() < 0.04, "enhancement {}", best.1);
}

#[test]
fn evolve_trajectory_starts_in_the_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = photocell(&["evolve", "--out", "traj.csv"], &[], dir.path());
    assert!(out.status.success());
    let table =
        ResultTable::parse_csv(&std::fs::read_to_string(dir.path().join("traj.csv")).unwrap())
            .unwrap();
    assert_eq!(table.columns[0], "t");
    let first = &table.rows[0];
    assert_eq!(first[0], 0.0);
    assert_eq!(first[1], 1.0);
    assert!(stdout(&photocell(&["evolve"], &[], dir.path())).contains("distance to steady state"));
}

#[test]
fn sweep_temp_covers_the_requested_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = photocell(
        &[
            "sweep-temp",
            "--t-min",
            "50",
            "--t-max",
            "300",
            "--points",
            "6",
            "--out",
            "temps.csv",
        ],
        &[],
        dir.path(),
    );
    assert!(out.status.success());
    let table =
        ResultTable::parse_csv(&std::fs::read_to_string(dir.path().join("temps.csv")).unwrap())
            .unwrap();
    assert_eq!(table.columns, vec!["T", "enhancement", "n_x"]);
    assert_eq!(table.rows.len(), 6);
    assert_eq!(table.rows[0][0], 50.0);
    assert_eq!(table.rows[5][0], 300.0);
    // Colder runs enhance more.
    assert!(table.rows[0][1] > table.rows[5][1]);
}

#[test]
fn bad_config_fails_with_a_line_number() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "E1 = 1.8\nnonsense = 1\n").unwrap();
    let out = photocell(&["steady", "--config", "bad.cfg"], &[], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn audit_reads_a_superoperator_table() {
    let dir = tempfile::tempdir().unwrap();
    // Pure dephasing: clean audit.
    let dephasing = "d=2\n0,0,0,0\n0,-0.2,0,0\n0,0,-0.2,0\n0,0,0,0\n";
    std::fs::write(dir.path().join("dephasing.sop"), dephasing).unwrap();
    let out = photocell(
        &["audit", "--superop", "dephasing.sop", "--t-end", "10"],
        &[],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(stdout(&out).contains("positive throughout"));

    // The built-in demo flags the counterexample.
    let out = photocell(&["audit", "--out", "toy.csv"], &[], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("NEGATIVITY"));
    assert!(dir.path().join("toy.csv").exists());

    // Malformed tables are rejected.
    std::fs::write(dir.path().join("broken.sop"), "d=2\n0,0,0\n").unwrap();
    let out = photocell(&["audit", "--superop", "broken.sop"], &[], dir.path());
    assert!(!out.status.success());
}

#[test]
fn validate_exits_zero_on_a_pristine_build() {
    let dir = tempfile::tempdir().unwrap();
    let out = photocell(&["validate"], &[], dir.path());
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert_eq!(text.matches("PASS").count(), 10, "{text}");
    assert!(text.contains("10 of 10 checks passed"));
}
