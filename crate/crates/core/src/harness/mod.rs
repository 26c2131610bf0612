//! End-to-end pipeline, comparison experiment, metrics, scaling sweep and
//! CSV serialization.

pub mod experiment;
pub mod io;
pub mod method;
pub mod report;
pub mod trial;

pub use experiment::{
    run_experiment, scaling_sweep, sort_results, ExperimentOptions, ExperimentOutput, SweepResult,
    SweepRow, REACH_TOL,
};
pub use method::{parse_methods, Engine, Method, MethodSpec, Scale, DEFAULT_TRIALS};
pub use report::{
    audit, feasibility_rate, mean_optimality_gap, optimality_rate, AuditReport, ExperimentReport,
    ReportRow,
};
pub use trial::{format_bits, run_trial, trial_seed, ProblemContext, SolveConfig, TrialResult};
