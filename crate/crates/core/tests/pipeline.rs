//! Library-level pipeline: suite -> experiment -> CSV -> report -> audit.

use varqite_mkp::engines::QiteConfig;
use varqite_mkp::harness::{
    audit, io as csvio, run_experiment, scaling_sweep, ExperimentOptions, ExperimentReport, Method,
    MethodSpec, SolveConfig,
};
use varqite_mkp::instances::{generate_suite, load_instances, write_jsonl};

fn quick() -> SolveConfig {
    SolveConfig {
        qite: QiteConfig { n_steps: 60, ..QiteConfig::default() },
        ..SolveConfig::default()
    }
}

#[test]
fn suite_runs_end_to_end_and_audits_clean() {
    let suite = generate_suite(3, 5, &[(1, 2), (2, 2)]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("suite.jsonl");
    write_jsonl(&bundle, &suite).unwrap();
    assert_eq!(load_instances(&bundle).unwrap(), suite);

    let specs: Vec<_> = Method::ALL.iter().map(|&m| MethodSpec::new(m).with_trials(2)).collect();
    let out = run_experiment(&suite, &specs, &quick(), 1, ExperimentOptions::default()).unwrap();
    assert_eq!(out.results.len(), 3 * 5 * 2);
    for r in &out.results {
        assert_eq!(r.bitstring.len(), suite.iter().find(|i| i.id == r.instance_id).unwrap().n_vars());
        assert!(!r.optimal || r.feasible);
        if r.optimal {
            assert_eq!(r.opt_gap_mkp, Some(0.0));
        }
    }

    let path = dir.path().join("results.csv");
    csvio::write_results_file(&path, &out.results).unwrap();
    let back = csvio::read_results_file(&path).unwrap();
    assert_eq!(back, out.results);
    let report = ExperimentReport::from_results(&back).unwrap();
    assert_eq!(report, out.report);
    assert_eq!(report.rows.len(), 5);
    for row in &report.rows {
        for v in [row.feasibility_best, row.optimality_best, row.mean_feasibility_rate, row.mean_optimality_rate] {
            assert!((0.0..=1.0).contains(&v));
        }
        assert!(row.feasibility_best >= row.mean_feasibility_rate);
    }
    assert!(audit(&back, Some(&report)).is_clean());

    let mut tampered = back.clone();
    tampered[0].feasible = false;
    tampered[0].optimal = true;
    assert!(!audit(&tampered, None).is_clean());
}

#[test]
fn sweep_csv_has_one_row_per_cell() {
    let suite = generate_suite(1, 2, &[(1, 3)]).unwrap();
    let s = scaling_sweep(&suite[0], &[1.0, 10.0], &[20, 40, 80], 10.0, &quick(), 0).unwrap();
    let mut buf = Vec::new();
    csvio::write_sweep(&mut buf, &s).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], csvio::SWEEP_HEADER.join(","));
    assert_eq!(lines.len(), 7);
    for r in &s.rows {
        assert!(r.best_energy >= s.min_energy - 1e-9);
        assert_eq!(r.reached, r.best_energy - s.min_energy <= 1e-4 * s.min_energy.abs().max(1.0));
    }
}
