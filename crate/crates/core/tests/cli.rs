use std::fs;
use std::process::{Command, Output};

use ipd_learning::io::{read_sweep_csv, read_trajectory_csv, RunManifest};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipd-learning"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn equilibrium_prints_one_line() {
    let o = run(&["equilibrium", "--payoff", "5,3,1,0", "--strategy", "0.9,0.1,0.9,0.1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "x_e=0.5 y_e=0.5 u_e=2.25 v_e=2.25");
}

#[test]
fn validation_failures_exit_1_on_stderr() {
    for args in [
        vec!["equilibrium", "--payoff", "5,2,1,0", "--strategy", "0.5,0.5,0.5,0.5"],
        vec!["equilibrium", "--payoff", "5,3,1,0", "--strategy", "1.5,0.5,0.5,0.5"],
        vec!["equilibrium", "--payoff", "5,3,1"],
        vec!["trajectory", "--payoff", "5,3,1,0", "--strategy", "0.5,0.5,0.5,0.5", "--dt", "-1"],
        vec!["frobnicate"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(stdout(&o).is_empty());
        assert_eq!(stderr(&o).trim_end().lines().count(), 1, "{args:?}: {}", stderr(&o));
    }
    let o = run(&["equilibrium", "--payoff", "5,2,1,0", "--strategy", "0.5,0.5,0.5,0.5"]);
    assert!(stderr(&o).contains("2R>T+S"));
}

#[test]
fn trajectory_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let o = run(&[
        "trajectory",
        "--payoff",
        "5,3.25,1,0",
        "--strategy",
        "0.9,0.1,0.9,0.7",
        "--sample-interval",
        "1",
        "-o",
        csv.to_str().unwrap(),
        "--plot-script",
        dir.path().join("plot.py").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("terminal=Interior case=Case4"));

    let header = fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with("t,x_C,x_D,y_C,y_D,x_e,y_e,u_e,v_e\n"));
    let table = read_trajectory_csv(&csv).unwrap();
    assert_eq!(table.times[0], 0.0);
    assert_eq!(table.states[0].as_array(), [0.9, 0.1, 0.9, 0.7]);

    let manifest = RunManifest::read(&dir.path().join("traj.manifest.json")).unwrap();
    assert_eq!(manifest.command, "trajectory");
    assert_eq!(manifest.outputs.len(), 2);
    assert!(fs::read_to_string(dir.path().join("plot.py")).unwrap().contains("traj.csv"));
}

#[test]
fn basin_rows_follow_axis_order() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("basin.csv");
    let o = run(&[
        "basin",
        "--payoff",
        "5,4.5,1,0",
        "--axis1",
        "x_D:0.1:0.9:3",
        "--axis2",
        "x_C:0.1:0.9:2",
        "--fixed",
        "y_C=0.8,y_D=0.2",
        "--sample-interval",
        "10",
        "-o",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_sweep_csv(&csv).unwrap();
    let coords: Vec<(f64, f64)> = rows.iter().map(|r| (r.axis1, r.axis2)).collect();
    assert_eq!(
        coords,
        vec![(0.1, 0.1), (0.1, 0.9), (0.5, 0.1), (0.5, 0.9), (0.9, 0.1), (0.9, 0.9)]
    );
}

#[test]
fn manifest_with_command_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("g.csv");
    let o = run(&["grid4d", "--payoff", "5,3,1,0", "--n", "2", "-o", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let manifest = dir.path().join("g.manifest.json");
    let o = run(&["--manifest", manifest.to_str().unwrap(), "grid4d", "--payoff", "5,3,1,0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let csv = dir.path().join(format!("fp{threads}.csv"));
        let o = run(&[
            "--threads",
            threads,
            "fixed-points",
            "--payoff",
            "5,3,1,0",
            "--n",
            "12",
            "-o",
            csv.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        files.push(fs::read(csv).unwrap());
    }
    assert_eq!(files[0], files[1]);
}
