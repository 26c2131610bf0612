use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mv::{euler_step, mv_with_diagonal, solve_update};
use crate::ansatz::AnsatzSpec;
use crate::encoding::{rescale, IsingHamiltonian};
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InitKind {
    /// Independent uniform draws over `[-pi, pi)`.
    #[default]
    RandomUniform,
    Zeros,
}

pub fn initial_theta(init: InitKind, n_params: usize, seed: u64) -> Vec<f64> {
    match init {
        InitKind::Zeros => vec![0.0; n_params],
        InitKind::RandomUniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n_params)
                .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QiteConfig {
    pub tau: f64,
    pub n_steps: usize,
    /// The Hamiltonian is divided by `d` before evolving.
    pub d: f64,
    pub ridge: f64,
    pub seed: u64,
    pub init: InitKind,
}

impl Default for QiteConfig {
    fn default() -> Self {
        Self {
            tau: 10.0,
            n_steps: 500,
            d: 1.0,
            ridge: 1e-8,
            seed: 0,
            init: InitKind::RandomUniform,
        }
    }
}

impl QiteConfig {
    pub fn delta_tau(&self) -> f64 {
        self.tau / self.n_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if self.n_steps == 0 {
            return bad("n_steps must be at least 1".into());
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return bad(format!("d must be positive, got {}", self.d));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return bad(format!("ridge must be >= 0, got {}", self.ridge));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub tau: f64,
    pub theta: Vec<f64>,
    /// Expectation of the unscaled Hamiltonian.
    pub energy: f64,
    /// `energy / E_min`; for a Max-Cut Hamiltonian this is attained cut over
    /// optimal cut. `None` when `E_min >= 0`.
    pub approx_ratio: Option<f64>,
    pub best_energy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QiteTrace {
    pub rows: Vec<TraceRow>,
}

impl QiteTrace {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "tau", "energy", "approx_ratio", "best_energy"])?;
        for r in &self.rows {
            w.write_record([
                r.step.to_string(),
                r.tau.to_string(),
                r.energy.to_string(),
                r.approx_ratio.map_or_else(String::new, |a| a.to_string()),
                r.best_energy.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QiteOutcome {
    pub theta: Vec<f64>,
    pub best_theta: Vec<f64>,
    pub final_energy: f64,
    pub best_energy: f64,
    /// Euler steps taken; less than `n_steps` only when `diagnostic` is set.
    pub steps: usize,
    pub trace: QiteTrace,
    pub diagnostic: Option<String>,
}

pub fn run_varqite(ansatz: &AnsatzSpec, h: &IsingHamiltonian, cfg: &QiteConfig) -> Result<QiteOutcome> {
    let theta0 = initial_theta(cfg.init, ansatz.n_params(), cfg.seed);
    run_varqite_from(ansatz, h, cfg, theta0)
}

pub fn run_varqite_from(
    ansatz: &AnsatzSpec,
    h: &IsingHamiltonian,
    cfg: &QiteConfig,
    theta0: Vec<f64>,
) -> Result<QiteOutcome> {
    cfg.validate()?;
    let circuit = &ansatz.circuit;
    circuit.validate()?;
    check_len("hamiltonian qubits", circuit.n_qubits, h.n_qubits)?;
    check_len("initial parameters", circuit.n_params, theta0.len())?;
    let scaled = rescale(h, cfg.d)?;
    let diagonal = scaled.diagonal();
    let (e_min, _) = h.ground_state()?;
    let dt = cfg.delta_tau();

    let mut theta = theta0;
    let mut best = (f64::INFINITY, theta.clone());
    let mut trace = QiteTrace::default();
    let mut diagnostic = None;
    let mut steps = 0;
    loop {
        let sys = mv_with_diagonal(circuit, &theta, &diagonal);
        let energy = sys.energy * cfg.d;
        if !energy.is_finite() {
            diagnostic = Some(format!("non-finite energy at step {steps}"));
            break;
        }
        if energy < best.0 {
            best = (energy, theta.clone());
        }
        trace.rows.push(TraceRow {
            step: steps,
            tau: steps as f64 * dt,
            theta: theta.clone(),
            energy,
            approx_ratio: (e_min < 0.0).then(|| energy / e_min),
            best_energy: best.0,
        });
        if steps == cfg.n_steps {
            break;
        }
        let next = solve_update(&sys, cfg.ridge).and_then(|dot| euler_step(&theta, &dot, dt));
        match next {
            Ok(t) if t.iter().all(|x| x.is_finite()) => theta = t,
            Ok(_) => {
                diagnostic = Some(format!("non-finite parameters after step {}", steps + 1));
                break;
            }
            Err(e) => {
                diagnostic = Some(format!("update failed at step {steps}: {e}"));
                break;
            }
        }
        steps += 1;
    }
    let final_energy = trace.rows.last().map_or(f64::NAN, |r| r.energy);
    Ok(QiteOutcome {
        theta,
        best_theta: best.1,
        final_energy,
        best_energy: best.0,
        steps,
        trace,
        diagnostic,
    })
}
