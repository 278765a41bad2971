//! End-to-end behaviour of the binary: output format and exit statuses.

use std::process::{Command, Output};

use relay_fbl::scenario::Scenario;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relay-fbl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sweep_header_carries_units() {
    let o = run(&["sweep", "--variable", "eta", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "eta [1],relay_avg.bl_throughput [bits/cu],relay_avg.msdr [bits/cu],relay_avg.msdr_feasible [bool]"
    );
    let rows: Vec<_> = text.lines().skip(1).filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("0.01,"));
}

#[test]
fn invalid_fields_exit_with_status_2() {
    for args in [
        &["--d-backhaul", "-5", "optimize"][..],
        &["--eta", "0.9", "optimize"],
        &["--qos-p-d", "1.5", "optimize"],
        &["--m", "abc", "optimize"],
        &["--pathloss-model", "free_space", "optimize"],
        &["sweep", "--variable", "eta", "--n", "0"],
        &["sweep", "--variable", "eta", "--grid", "0.0,0.2"],
        &["sweep", "--variable", "blocklength", "--schemes", "nonsense"],
        &["compare", "--pair", "relay_vs_direct", "--variable", "coding_rate"],
    ] {
        let o = run(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn invalid_field_is_named_on_stderr() {
    let o = run(&["--d-relaying", "-1", "--f-c", "0", "optimize"]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("d_relaying") && err.contains("f_c"), "{err}");
}

#[test]
fn scenario_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("default.scn");
    let text = Scenario::default().to_text();
    std::fs::write(&path, &text).unwrap();
    let from_file = run(&["--scenario", path.to_str().unwrap(), "optimize"]);
    let builtin = run(&["optimize"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, builtin.stdout);
    assert_eq!(text.parse::<Scenario>().unwrap(), Scenario::default());
}

#[test]
fn flags_override_the_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.scn");
    std::fs::write(&path, "m = 200\n").unwrap();
    let a = run(&["--scenario", path.to_str().unwrap(), "--m", "500", "optimize"]);
    let b = run(&["optimize"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn fixed_gains_scenario_runs() {
    let o = run(&[
        "--pathloss-model",
        "fixed_gains",
        "--g1",
        "1e-12",
        "--g2",
        "1e-9",
        "--g3",
        "1e-9",
        "sweep",
        "--variable",
        "blocklength",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().filter(|l| !l.starts_with('#')).count(), 6);
}

#[test]
fn compare_reports_summary_lines() {
    let o = run(&["compare", "--pair", "relay_vs_direct", "--n", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(
        text.contains("# relay_dominates.bl_throughput: strict at 6/6 points"),
        "{text}"
    );
}

#[test]
fn validate_passes_on_a_small_battery() {
    let o = run(&["validate", "--points", "2", "--mc-samples", "2e5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("# passed 12/12"));
}

#[test]
fn impossible_validation_tolerance_exits_with_status_1() {
    let o = run(&["validate", "--points", "1", "--mc-samples", "1e4", "--sigma", "1e-9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unreachable_tolerance_exits_with_status_3() {
    let o = run(&["optimize", "--objective", "bl_throughput", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("budget_exhausted"));
}
