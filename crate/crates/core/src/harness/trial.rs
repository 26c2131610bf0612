use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::method::{Engine, Method, MethodSpec, Scale};
use crate::ansatz::{build_hea, build_ihva, build_maqaoa, AnsatzSpec};
use crate::encoding::{
    assignment_from_bits, build_unbalanced_qubo, decode_maxcut_index, maxcut_hamiltonian,
    qubo_to_ising, qubo_to_maxcut, spectral_norm, IsingHamiltonian, PenaltyConfig, Qubo,
    WeightedGraph,
};
use crate::engines::{run_varqite, run_vqe, QiteConfig, VqeConfig};
use crate::error::Result;
use crate::instances::{brute_force_optimum, evaluate, MkpInstance};
use crate::simulator::state::argmax_index;
use crate::simulator::{most_frequent, run, sample, StateVector};

/// Engine settings shared by every trial of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub penalties: PenaltyConfig,
    /// `tau`, `n_steps`, `ridge` and `init` apply to VarQITE methods; `d` and
    /// `seed` are set per method and trial.
    pub qite: QiteConfig,
    /// Limits for VQE methods; `seed` is set per trial.
    pub vqe: VqeConfig,
    /// Finite-shot read-out instead of the exact argmax.
    pub shots: Option<u64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            penalties: PenaltyConfig::default(),
            qite: QiteConfig::default(),
            vqe: VqeConfig::default(),
            shots: None,
        }
    }
}

/// Everything derived from one instance that the trials share.
#[derive(Debug, Clone)]
pub struct ProblemContext {
    pub instance: MkpInstance,
    pub qubo: Qubo,
    /// Direct QUBO Ising Hamiltonian (ma-QAOA, HEA).
    pub ising: IsingHamiltonian,
    pub graph: WeightedGraph,
    /// Max-Cut Hamiltonian of `graph` (iHVA methods).
    pub maxcut: IsingHamiltonian,
    pub maxcut_norm: f64,
    /// Brute-force MKP optimum value.
    pub mkp_optimum: u64,
    /// Minimum of the QUBO without its constant term.
    pub qubo_optimum: f64,
}

impl ProblemContext {
    pub fn new(instance: &MkpInstance, penalties: PenaltyConfig) -> Result<Self> {
        let qubo = build_unbalanced_qubo(instance, penalties)?;
        let (qubo_min, _) = qubo.brute_force_min()?;
        let graph = qubo_to_maxcut(&qubo)?;
        let maxcut = maxcut_hamiltonian(&graph);
        Ok(Self {
            instance: instance.clone(),
            ising: qubo_to_ising(&qubo)?,
            maxcut_norm: spectral_norm(&maxcut)?,
            maxcut,
            graph,
            mkp_optimum: brute_force_optimum(instance)?.0.objective,
            qubo_optimum: qubo_min - qubo.offset,
            qubo,
        })
    }

    /// The Hamiltonian a method evolves or minimizes.
    pub fn hamiltonian(&self, method: Method) -> &IsingHamiltonian {
        if method.uses_maxcut() {
            &self.maxcut
        } else {
            &self.ising
        }
    }

    pub fn ansatz(&self, spec: &MethodSpec) -> Result<AnsatzSpec> {
        match spec.method {
            Method::QiteIhvaRescaled | Method::QiteIhva | Method::Ihva => build_ihva(&self.graph, spec.reps),
            Method::MaQaoa => build_maqaoa(&self.ising, spec.reps),
            Method::Hea => build_hea(self.ising.n_qubits, spec.reps),
        }
    }

    pub fn scale(&self, spec: &MethodSpec) -> f64 {
        match spec.d {
            Scale::SpectralNorm => self.maxcut_norm,
            Scale::Fixed(d) => d,
        }
    }
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub instance_id: String,
    pub method: String,
    pub trial: usize,
    pub seed: u64,
    /// Decoded QUBO variables `x_0 x_1 ...` in index order (row-major over
    /// knapsack, item).
    pub bitstring: String,
    pub mkp_objective: u64,
    pub feasible: bool,
    pub optimal: bool,
    /// QUBO value of the decoded string without the constant term.
    pub qubo_objective: f64,
    /// `1 - C / C_opt` on constant-free QUBO values; empty when `C_opt = 0`.
    pub opt_gap: Option<f64>,
    /// `1 - value / optimum` on MKP values; empty when the optimum is 0.
    pub opt_gap_mkp: Option<f64>,
    pub final_energy: f64,
    pub steps: u64,
    pub runtime_ms: u64,
}

/// Deterministic per-trial seed: the first 8 bytes (little endian) of
/// `sha256(global_seed || instance_id || method || trial)`, fields separated
/// by a zero byte.
pub fn trial_seed(global_seed: u64, instance_id: &str, method: Method, trial: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(global_seed.to_le_bytes());
    h.update([0]);
    h.update(instance_id.as_bytes());
    h.update([0]);
    h.update(method.name().as_bytes());
    h.update([0]);
    h.update((trial as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

struct EngineRun {
    theta: Vec<f64>,
    final_energy: f64,
    steps: u64,
    failed: bool,
}

fn run_engine(
    ctx: &ProblemContext,
    spec: &MethodSpec,
    ansatz: &AnsatzSpec,
    cfg: &SolveConfig,
    seed: u64,
) -> Result<EngineRun> {
    let h = ctx.hamiltonian(spec.method);
    Ok(match spec.method.engine() {
        Engine::VarQite => {
            let qcfg = QiteConfig {
                d: ctx.scale(spec),
                seed,
                ..cfg.qite.clone()
            };
            let out = run_varqite(ansatz, h, &qcfg)?;
            if let Some(d) = &out.diagnostic {
                log::warn!("{} {}: {d}", ctx.instance.id, spec.method);
            }
            EngineRun {
                theta: out.theta,
                final_energy: out.final_energy,
                steps: out.steps as u64,
                failed: out.diagnostic.is_some(),
            }
        }
        Engine::Vqe => {
            let vcfg = VqeConfig {
                seed,
                ..cfg.vqe.clone()
            };
            let out = run_vqe(ansatz, h, &vcfg)?;
            // line-search breakdowns still leave a usable point
            if let Some(d) = &out.diagnostic {
                log::debug!("{} {}: {d}", ctx.instance.id, spec.method);
            }
            EngineRun {
                theta: out.theta,
                failed: !out.energy.is_finite(),
                final_energy: out.energy,
                steps: out.iterations,
            }
        }
    })
}

fn read_out(state: &StateVector, shots: Option<u64>, seed: u64) -> Result<usize> {
    Ok(match shots {
        None => argmax_index(state.amplitudes().iter().map(Complex64::norm_sqr)),
        Some(shots) => {
            let counts = sample(state, shots, seed ^ 0x5348_4f54_5321)?;
            most_frequent(&counts).map_or(0, |b| b.index)
        }
    })
}

/// encode, build the ansatz, run the engine, read out, decode and score.
pub fn run_trial(
    ctx: &ProblemContext,
    spec: &MethodSpec,
    cfg: &SolveConfig,
    trial: usize,
    seed: u64,
) -> Result<TrialResult> {
    spec.validate()?;
    let start = Instant::now();
    let ansatz = ctx.ansatz(spec)?;
    let run_out = run_engine(ctx, spec, &ansatz, cfg, seed)?;
    let state = run(&ansatz.circuit, &run_out.theta)?;
    let index = read_out(&state, cfg.shots, seed)?;
    let bits = if spec.method.uses_maxcut() {
        decode_maxcut_index(&ctx.graph, index)
    } else {
        (0..ctx.qubo.n_vars).map(|k| index >> k & 1 == 1).collect()
    };
    let assignment = assignment_from_bits(&ctx.instance, &bits)?;
    let eval = evaluate(&ctx.instance, &assignment)?;
    let feasible = eval.feasible && !run_out.failed;
    let optimal = feasible && eval.objective == ctx.mkp_optimum;
    let qubo_objective = ctx.qubo.value_without_offset(&bits);
    let opt_gap = if ctx.qubo_optimum == 0.0 {
        log::warn!("{}: QUBO optimum is 0, gap excluded", ctx.instance.id);
        None
    } else {
        Some(1.0 - qubo_objective / ctx.qubo_optimum)
    };
    let opt_gap_mkp =
        (ctx.mkp_optimum > 0).then(|| 1.0 - eval.objective as f64 / ctx.mkp_optimum as f64);
    Ok(TrialResult {
        instance_id: ctx.instance.id.clone(),
        method: spec.method.name().to_string(),
        trial,
        seed,
        bitstring: format_bits(&bits),
        mkp_objective: eval.objective,
        feasible,
        optimal,
        qubo_objective,
        opt_gap,
        opt_gap_mkp,
        final_energy: run_out.final_energy,
        steps: run_out.steps,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}
