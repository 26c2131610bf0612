//! The command-line tool driven as a subprocess.

use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varqite-mkp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = cli(args, cwd);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn generate_solve_report_audit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["generate", "--count", "2", "--seed", "4", "--out", "inst", "--shapes", "1x2,2x2"], d);
    assert_eq!(std::fs::read_dir(d.join("inst")).unwrap().count(), 2);

    let solve = [
        "solve", "--instances", "inst", "--methods", "qite-ihva,hea", "--trials", "2", "--seed", "3",
        "--out", "results.csv", "--steps", "40", "--deterministic",
    ];
    ok(&solve, d);
    let first = std::fs::read(d.join("results.csv")).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with(
        "instance_id,method,trial,seed,bitstring,mkp_objective,feasible,optimal,qubo_objective,opt_gap,opt_gap_mkp,final_energy,steps,runtime_ms\n"
    ));
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
    ok(&solve, d);
    assert_eq!(std::fs::read(d.join("results.csv")).unwrap(), first);

    let report = ok(&["report", "--results", "results.csv", "--out", "report.csv"], d);
    assert!(report.starts_with("method,feasibility_best,optimality_best"));
    assert_eq!(std::fs::read_to_string(d.join("report.csv")).unwrap(), report);
    let audit = ok(&["audit", "--results", "results.csv", "--report", "report.csv"], d);
    assert!(audit.contains("0 problems"));
}

#[test]
fn audit_fails_on_inconsistent_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("bad.csv"),
        "instance_id,method,trial,seed,bitstring,mkp_objective,feasible,optimal,qubo_objective,opt_gap,opt_gap_mkp,final_energy,steps,runtime_ms\n\
         a,hea,0,1,01,3,false,true,-5.0,0.0,0.0,-1.0,3,0\n",
    )
    .unwrap();
    let out = cli(&["audit", "--results", "bad.csv"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn sweep_trace_and_circuit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["generate", "--count", "1", "--seed", "8", "--out", "inst", "--shapes", "1x2"], d);
    let file = "inst/mkp-1x2-8.json";
    ok(&["sweep", "--instance", file, "--d", "1,10", "--steps", "20,40", "--tau", "10", "--out", "sweep.csv"], d);
    let sweep = std::fs::read_to_string(d.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 5);
    assert!(sweep.starts_with("instance_id,d,n_steps,tau,best_energy,min_energy,reached\n"));

    ok(&["trace", "--instance", file, "--steps", "25", "--out", "trace.csv"], d);
    let trace = std::fs::read_to_string(d.join("trace.csv")).unwrap();
    assert!(trace.starts_with("step,tau,energy,approx_ratio,best_energy\n"));
    assert_eq!(trace.lines().count(), 1 + 26);

    let dump = ok(&["circuit", "--instance", file, "--method", "ihva"], d);
    assert!(dump.lines().count() > 0);
    for line in dump.lines() {
        assert_eq!(line.split(", ").count(), 3, "{line}");
    }
    assert!(dump.contains("rzy"));
}

#[test]
fn bad_arguments_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["generate", "--count", "1", "--out", "inst", "--shapes", "1x2"], d);
    let out = cli(&["solve", "--instances", "inst", "--methods", "nope", "--out", "r.csv"], d);
    assert_eq!(out.status.code(), Some(2));
    let out = cli(&["generate", "--count", "1", "--out", "x", "--shapes", "3by3"], d);
    assert_eq!(out.status.code(), Some(2));
}
