use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::method::{Method, MethodSpec, Scale};
use super::report::ExperimentReport;
use super::trial::{run_trial, trial_seed, ProblemContext, SolveConfig, TrialResult};
use crate::engines::{run_varqite, QiteConfig};
use crate::error::{Error, Result};
use crate::instances::MkpInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    /// When false `runtime_ms` is written as 0 so reruns give identical bytes.
    pub record_runtime: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self { record_runtime: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    /// Sorted by instance id, method (canonical order) and trial.
    pub results: Vec<TrialResult>,
}

fn method_rank(name: &str) -> usize {
    Method::ALL
        .iter()
        .position(|m| m.name() == name)
        .unwrap_or(Method::ALL.len())
}

pub fn sort_results(results: &mut [TrialResult]) {
    results.sort_by(|a, b| {
        (&a.instance_id, method_rank(&a.method), &a.method, a.trial)
            .cmp(&(&b.instance_id, method_rank(&b.method), &b.method, b.trial))
    });
}

/// Runs every (instance, method, trial) concurrently and aggregates.
pub fn run_experiment(
    suite: &[MkpInstance],
    methods: &[MethodSpec],
    cfg: &SolveConfig,
    global_seed: u64,
    opts: ExperimentOptions,
) -> Result<ExperimentOutput> {
    if suite.is_empty() {
        return Err(Error::Empty("instance suite"));
    }
    if methods.is_empty() {
        return Err(Error::Empty("method list"));
    }
    let mut ids = BTreeSet::new();
    for inst in suite {
        if !ids.insert(inst.id.as_str()) {
            return Err(Error::InvalidArgument(format!("duplicate instance id {}", inst.id)));
        }
    }
    let mut names = BTreeSet::new();
    for spec in methods {
        spec.validate()?;
        if !names.insert(spec.method) {
            return Err(Error::InvalidArgument(format!("method {} listed twice", spec.method)));
        }
    }
    let contexts = suite
        .par_iter()
        .map(|inst| ProblemContext::new(inst, cfg.penalties))
        .collect::<Result<Vec<_>>>()?;

    let work: Vec<(&ProblemContext, &MethodSpec, usize)> = contexts
        .iter()
        .flat_map(|ctx| {
            methods
                .iter()
                .flat_map(move |spec| (0..spec.trials).map(move |t| (ctx, spec, t)))
        })
        .collect();
    let mut results = work
        .par_iter()
        .map(|&(ctx, spec, trial)| {
            let seed = trial_seed(global_seed, &ctx.instance.id, spec.method, trial);
            let mut r = run_trial(ctx, spec, cfg, trial, seed)?;
            if !opts.record_runtime {
                r.runtime_ms = 0;
            }
            log::info!(
                "{} {} trial {}: feasible={} optimal={} gap={:?}",
                r.instance_id, r.method, r.trial, r.feasible, r.optimal, r.opt_gap
            );
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    sort_results(&mut results);
    Ok(ExperimentOutput {
        report: ExperimentReport::from_results(&results)?,
        results,
    })
}

/// Relative tolerance for counting a sweep run as having reached the minimum.
pub const REACH_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: f64,
    pub n_steps: usize,
    pub tau: f64,
    /// Lowest unscaled Max-Cut energy along the trace.
    pub best_energy: f64,
    /// Exhaustive minimum of the Max-Cut Hamiltonian.
    pub min_energy: f64,
    pub reached: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub instance_id: String,
    pub min_energy: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Smallest step count at which the run for `d` reached the minimum.
    pub fn first_reaching(&self, d: f64) -> Option<usize> {
        self.rows
            .iter()
            .filter(|r| r.d == d && r.reached)
            .map(|r| r.n_steps)
            .min()
    }
}

/// qite-ihva over a `(d, N_tau)` grid at fixed `tau`, one seeded run per cell.
pub fn scaling_sweep(
    instance: &MkpInstance,
    d_values: &[f64],
    n_steps_values: &[usize],
    tau: f64,
    cfg: &SolveConfig,
    seed: u64,
) -> Result<SweepResult> {
    if d_values.is_empty() || n_steps_values.is_empty() {
        return Err(Error::Empty("sweep grid"));
    }
    let ctx = ProblemContext::new(instance, cfg.penalties)?;
    let spec = MethodSpec {
        d: Scale::Fixed(1.0),
        ..MethodSpec::new(Method::QiteIhva)
    };
    let ansatz = ctx.ansatz(&spec)?;
    let (min_energy, _) = ctx.maxcut.ground_state()?;
    let run_seed = trial_seed(seed, &instance.id, Method::QiteIhva, 0);
    let grid: Vec<(f64, usize)> = d_values
        .iter()
        .flat_map(|&d| n_steps_values.iter().map(move |&n| (d, n)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(d, n_steps)| {
            let qcfg = QiteConfig {
                tau,
                n_steps,
                d,
                seed: run_seed,
                ..cfg.qite.clone()
            };
            let out = run_varqite(&ansatz, &ctx.maxcut, &qcfg)?;
            let best = out.best_energy;
            Ok(SweepRow {
                d,
                n_steps,
                tau,
                best_energy: best,
                min_energy,
                reached: best - min_energy <= REACH_TOL * min_energy.abs().max(1.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        instance_id: instance.id.clone(),
        min_energy,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::generate_instance;

    fn quick_cfg() -> SolveConfig {
        SolveConfig {
            qite: QiteConfig { n_steps: 40, ..QiteConfig::default() },
            ..SolveConfig::default()
        }
    }

    #[test]
    fn experiment_is_sorted_and_deterministic() {
        let suite = vec![generate_instance(2, 1, 2).unwrap(), generate_instance(1, 1, 2).unwrap()];
        let methods: Vec<_> = [Method::Hea, Method::QiteIhva]
            .into_iter()
            .map(|m| MethodSpec::new(m).with_trials(2))
            .collect();
        let opts = ExperimentOptions { record_runtime: false };
        let a = run_experiment(&suite, &methods, &quick_cfg(), 9, opts).unwrap();
        assert_eq!(a.results.len(), 8);
        assert_eq!(a.results[0].method, "qite-ihva");
        assert!(a.results[0].instance_id < a.results[4].instance_id);
        assert_eq!(a, run_experiment(&suite, &methods, &quick_cfg(), 9, opts).unwrap());
        assert_eq!(a.report, ExperimentReport::from_results(&a.results).unwrap());
    }

    #[test]
    fn experiment_rejects_bad_input() {
        let inst = generate_instance(2, 1, 2).unwrap();
        let hea = vec![MethodSpec::new(Method::Hea)];
        let opts = ExperimentOptions::default();
        assert!(run_experiment(&[], &hea, &quick_cfg(), 0, opts).is_err());
        assert!(run_experiment(&[inst.clone()], &[], &quick_cfg(), 0, opts).is_err());
        assert!(run_experiment(&[inst.clone(), inst.clone()], &hea, &quick_cfg(), 0, opts).is_err());
        let twice = vec![MethodSpec::new(Method::Hea), MethodSpec::new(Method::Hea)];
        assert!(run_experiment(&[inst], &twice, &quick_cfg(), 0, opts).is_err());
    }

    #[test]
    fn sweep_grid_shape() {
        let inst = generate_instance(4, 1, 2).unwrap();
        let s = scaling_sweep(&inst, &[1.0, 10.0], &[10, 20], 10.0, &quick_cfg(), 0).unwrap();
        assert_eq!(s.rows.len(), 4);
        assert_eq!((s.rows[1].d, s.rows[1].n_steps), (1.0, 20));
        assert!(s.rows.iter().all(|r| r.best_energy >= s.min_energy - 1e-9));
        assert!(scaling_sweep(&inst, &[], &[10], 10.0, &quick_cfg(), 0).is_err());
    }
}
