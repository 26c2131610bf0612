use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::experiment::SweepResult;
use super::report::{ExperimentReport, ReportRow};
use super::trial::TrialResult;
use crate::error::Result;

fn write_rows<W: Write, T: serde::Serialize>(out: W, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const RESULTS_HEADER: [&str; 14] = [
    "instance_id",
    "method",
    "trial",
    "seed",
    "bitstring",
    "mkp_objective",
    "feasible",
    "optimal",
    "qubo_objective",
    "opt_gap",
    "opt_gap_mkp",
    "final_energy",
    "steps",
    "runtime_ms",
];

pub const REPORT_HEADER: [&str; 6] = [
    "method",
    "feasibility_best",
    "optimality_best",
    "mean_feasibility_rate",
    "mean_optimality_rate",
    "mean_optimality_gap",
];

pub const SWEEP_HEADER: [&str; 7] =
    ["instance_id", "d", "n_steps", "tau", "best_energy", "min_energy", "reached"];

pub fn write_results<W: Write>(out: W, results: &[TrialResult]) -> Result<()> {
    write_rows(out, results, &RESULTS_HEADER)
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<TrialResult>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_report<W: Write>(out: W, report: &ExperimentReport) -> Result<()> {
    write_rows(out, &report.rows, &REPORT_HEADER)
}

pub fn read_report<R: Read>(input: R) -> Result<ExperimentReport> {
    let mut r = csv::Reader::from_reader(input);
    let rows: Vec<ReportRow> = r.deserialize().collect::<std::result::Result<_, _>>()?;
    Ok(ExperimentReport { rows })
}

pub fn write_sweep<W: Write>(out: W, sweep: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in &sweep.rows {
        w.serialize((
            &sweep.instance_id,
            r.d,
            r.n_steps,
            r.tau,
            r.best_energy,
            r.min_energy,
            r.reached,
        ))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results_file(path: impl AsRef<Path>, results: &[TrialResult]) -> Result<()> {
    write_results(File::create(path)?, results)
}

pub fn read_results_file(path: impl AsRef<Path>) -> Result<Vec<TrialResult>> {
    read_results(File::open(path)?)
}

pub fn write_report_file(path: impl AsRef<Path>, report: &ExperimentReport) -> Result<()> {
    write_report(File::create(path)?, report)
}

pub fn read_report_file(path: impl AsRef<Path>) -> Result<ExperimentReport> {
    read_report(File::open(path)?)
}

pub fn write_sweep_file(path: impl AsRef<Path>, sweep: &SweepResult) -> Result<()> {
    write_sweep(File::create(path)?, sweep)
}
