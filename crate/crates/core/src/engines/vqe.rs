use std::cell::RefCell;
use std::sync::{Arc, Mutex};

use argmin::core::observers::{Observe, ObserverMode};
use argmin::core::{CostFunction, Executor, Gradient, State, KV};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::qite::{initial_theta, InitKind};
use crate::ansatz::AnsatzSpec;
use crate::encoding::{spectral_norm, IsingHamiltonian};
use crate::error::{check_len, Error, Result};
use crate::simulator::circuit::{energy_and_gradient, simulate};
use crate::simulator::ParamCircuit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeConfig {
    pub maxiter: u64,
    /// Relative energy-change tolerance.
    pub ftol: f64,
    /// Gradient-norm tolerance.
    pub gtol: f64,
    /// L-BFGS history length.
    pub memory: usize,
    pub seed: u64,
    pub init: InitKind,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self {
            maxiter: 15_000,
            ftol: 2.220446049250313e-15,
            gtol: 1e-5,
            memory: 10,
            seed: 0,
            init: InitKind::RandomUniform,
        }
    }
}

impl VqeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.maxiter == 0 || self.memory == 0 || !(self.ftol > 0.0) || !(self.gtol > 0.0) {
            return Err(Error::InvalidArgument(
                "maxiter, memory, ftol and gtol must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeOutcome {
    pub theta: Vec<f64>,
    pub energy: f64,
    pub initial_energy: f64,
    pub iterations: u64,
    pub evaluations: u64,
    /// Energy after each iteration.
    pub trace: Vec<f64>,
    pub diagnostic: Option<String>,
}

/// `E(theta)` with its adjoint gradient; the last point is cached because the
/// line search asks for cost and gradient separately.
struct Objective<'a> {
    circuit: &'a ParamCircuit,
    diagonal: Vec<f64>,
    cache: RefCell<Option<(Vec<f64>, f64, Vec<f64>)>>,
    evaluations: RefCell<u64>,
}

impl Objective<'_> {
    fn eval(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        if let Some((t, e, g)) = self.cache.borrow().as_ref() {
            if t.as_slice() == theta {
                return (*e, g.clone());
            }
        }
        *self.evaluations.borrow_mut() += 1;
        let (e, g) = if self.circuit.is_real() {
            energy_and_gradient::<f64>(self.circuit, theta, &self.diagonal)
        } else {
            energy_and_gradient::<Complex64>(self.circuit, theta, &self.diagonal)
        };
        *self.cache.borrow_mut() = Some((theta.to_vec(), e, g.clone()));
        (e, g)
    }

    fn energy(&self, theta: &[f64]) -> f64 {
        let psi = if self.circuit.is_real() {
            simulate::<f64>(self.circuit, theta).iter().map(|a| a * a).collect::<Vec<_>>()
        } else {
            simulate::<Complex64>(self.circuit, theta).iter().map(|a| a.norm_sqr()).collect()
        };
        psi.iter().zip(&self.diagonal).map(|(p, e)| p * e).sum()
    }
}

impl CostFunction for &Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, theta: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let (e, _) = self.eval(theta);
        if e.is_finite() {
            Ok(e)
        } else {
            Err(argmin::core::Error::msg("non-finite energy"))
        }
    }
}

impl Gradient for &Objective<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, theta: &Self::Param) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        Ok(self.eval(theta).1)
    }
}

struct CostLog(Arc<Mutex<Vec<f64>>>);

impl<I: State<Float = f64>> Observe<I> for CostLog {
    fn observe_iter(&mut self, state: &I, _kv: &KV) -> std::result::Result<(), argmin::core::Error> {
        self.0.lock().expect("cost log lock").push(state.get_cost());
        Ok(())
    }
}

/// Energy and exact gradient `dE/dtheta_k` of the VQE objective.
pub fn vqe_gradient(circuit: &ParamCircuit, theta: &[f64], h: &IsingHamiltonian) -> Result<(f64, Vec<f64>)> {
    circuit.validate()?;
    check_len("parameter vector", circuit.n_params, theta.len())?;
    check_len("hamiltonian qubits", circuit.n_qubits, h.n_qubits)?;
    let diagonal = h.diagonal();
    Ok(if circuit.is_real() {
        energy_and_gradient::<f64>(circuit, theta, &diagonal)
    } else {
        energy_and_gradient::<Complex64>(circuit, theta, &diagonal)
    })
}

/// Minimizes the diagonal-Hamiltonian energy with L-BFGS on exact gradients.
pub fn run_vqe(ansatz: &AnsatzSpec, h: &IsingHamiltonian, cfg: &VqeConfig) -> Result<VqeOutcome> {
    let theta0 = initial_theta(cfg.init, ansatz.n_params(), cfg.seed);
    run_vqe_from(ansatz, h, cfg, theta0)
}

pub fn run_vqe_from(
    ansatz: &AnsatzSpec,
    h: &IsingHamiltonian,
    cfg: &VqeConfig,
    theta0: Vec<f64>,
) -> Result<VqeOutcome> {
    cfg.validate()?;
    let circuit = &ansatz.circuit;
    circuit.validate()?;
    check_len("hamiltonian qubits", circuit.n_qubits, h.n_qubits)?;
    check_len("initial parameters", circuit.n_params, theta0.len())?;
    let objective = Objective {
        circuit,
        diagonal: h.diagonal(),
        cache: RefCell::new(None),
        evaluations: RefCell::new(0),
    };
    let initial_energy = objective.energy(&theta0);
    if !initial_energy.is_finite() || circuit.n_params == 0 {
        let diagnostic = (!initial_energy.is_finite()).then(|| "non-finite initial energy".to_string());
        return Ok(VqeOutcome {
            theta: theta0,
            energy: initial_energy,
            initial_energy,
            iterations: 0,
            evaluations: 1,
            trace: Vec::new(),
            diagnostic,
        });
    }

    // absolute cost tolerance standing in for ftol * max(|E|, 1)
    let tol_cost = cfg.ftol * spectral_norm(h)?.max(1.0);
    let solver = LBFGS::new(MoreThuenteLineSearch::new(), cfg.memory)
        .with_tolerance_grad(cfg.gtol)
        .and_then(|s| s.with_tolerance_cost(tol_cost))
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let log = Arc::new(Mutex::new(Vec::new()));
    let result = Executor::new(&objective, solver)
        .configure(|state| state.param(theta0.clone()).max_iters(cfg.maxiter))
        .add_observer(CostLog(log.clone()), ObserverMode::Always)
        .timer(false)
        .run();
    let trace = log.lock().expect("cost log lock").clone();
    let evaluations = *objective.evaluations.borrow();
    Ok(match result {
        Ok(res) => {
            let state = res.state();
            let theta = state.get_best_param().cloned().unwrap_or(theta0);
            let energy = objective.energy(&theta);
            VqeOutcome {
                theta,
                energy,
                initial_energy,
                iterations: state.get_iter(),
                evaluations,
                trace,
                diagnostic: None,
            }
        }
        Err(e) => {
            // keep the best point seen before the failure
            let (theta, energy) = match objective.cache.borrow().as_ref() {
                Some((t, e, _)) if e.is_finite() && *e <= initial_energy => (t.clone(), *e),
                _ => (theta0, initial_energy),
            };
            VqeOutcome {
                theta,
                energy,
                initial_energy,
                iterations: trace.len() as u64,
                evaluations,
                trace,
                diagnostic: Some(format!("optimizer stopped: {e}")),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_hea, AnsatzKind, Provenance};
    use crate::simulator::{GateKind, InitialState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ry_ansatz() -> AnsatzSpec {
        let mut c = ParamCircuit::new(1, InitialState::AllZero);
        c.push_rotation(GateKind::RY, vec![0]);
        AnsatzSpec {
            kind: AnsatzKind::Hea,
            reps: 1,
            circuit: c,
            provenance: Provenance::Qubits(1),
        }
    }

    fn pauli_z() -> IsingHamiltonian {
        let mut h = IsingHamiltonian::zero(1);
        h.fields[0] = 1.0;
        h
    }

    #[test]
    fn single_qubit_converges() {
        let out = run_vqe_from(&ry_ansatz(), &pauli_z(), &VqeConfig::default(), vec![0.3]).unwrap();
        assert!(out.diagnostic.is_none(), "{:?}", out.diagnostic);
        assert!((out.energy + 1.0).abs() < 1e-8, "{}", out.energy);
    }

    #[test]
    fn optimal_start_stays() {
        let pi = std::f64::consts::PI;
        let out = run_vqe_from(&ry_ansatz(), &pauli_z(), &VqeConfig::default(), vec![pi]).unwrap();
        assert!(out.iterations <= 1);
        assert!((out.theta[0] - pi).abs() < 1e-12);
        assert_eq!(out.energy, -1.0);
    }

    #[test]
    fn hea_never_ends_above_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut h = IsingHamiltonian::zero(3);
        for k in 0..3 {
            h.fields[k] = rng.gen_range(-1.0..1.0);
            for l in k + 1..3 {
                h.add_coupling(k, l, rng.gen_range(-1.0..1.0));
            }
        }
        let (e_min, _) = h.ground_state().unwrap();
        let ansatz = build_hea(3, 1).unwrap();
        let mut best = f64::INFINITY;
        for seed in 0..5 {
            let cfg = VqeConfig { seed, ..VqeConfig::default() };
            let out = run_vqe(&ansatz, &h, &cfg).unwrap();
            assert!(out.energy <= out.initial_energy + 1e-12);
            assert!(out.energy >= e_min - 1e-9);
            best = best.min(out.energy);
        }
        assert!(best - e_min < 1e-6 || best > e_min);
    }

    #[test]
    fn config_errors() {
        let cfg = VqeConfig { maxiter: 0, ..VqeConfig::default() };
        assert!(run_vqe(&ry_ansatz(), &pauli_z(), &cfg).is_err());
        assert!(run_vqe(&ry_ansatz(), &IsingHamiltonian::zero(2), &VqeConfig::default()).is_err());
    }
}
