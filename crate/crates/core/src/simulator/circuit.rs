use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::amplitude::Amplitude;
use super::gates::{apply_gate, apply_generator, GateKind, GateSpec};
use super::state::StateVector;
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialState {
    /// `|0...0>`
    AllZero,
    /// `|+...+>`
    Uniform,
}

/// An ordered gate list over `n_qubits` with `n_params` parameter slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamCircuit {
    pub n_qubits: usize,
    pub gates: Vec<GateSpec>,
    pub n_params: usize,
    pub initial: InitialState,
}

impl ParamCircuit {
    pub fn new(n_qubits: usize, initial: InitialState) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            n_params: 0,
            initial,
        }
    }

    pub fn push_fixed(&mut self, kind: GateKind, targets: Vec<usize>) {
        self.gates.push(GateSpec::fixed(kind, targets));
    }

    /// Appends a rotation with a fresh parameter slot and returns the slot.
    pub fn push_rotation(&mut self, kind: GateKind, targets: Vec<usize>) -> usize {
        let slot = self.n_params;
        self.n_params += 1;
        self.gates.push(GateSpec::rotation(kind, targets, slot));
        slot
    }

    pub fn validate(&self) -> Result<()> {
        let mut used = vec![false; self.n_params];
        for g in &self.gates {
            g.validate(self.n_qubits, self.n_params)?;
            if let Some(slot) = g.param_slot {
                if std::mem::replace(&mut used[slot], true) {
                    return Err(Error::InvalidArgument(format!(
                        "parameter slot {slot} is referenced by more than one gate"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Real initial state and real gates: amplitudes stay real throughout.
    pub fn is_real(&self) -> bool {
        self.gates.iter().all(|g| g.kind.is_real())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        check_len("parameter vector", self.n_params, theta.len())
    }

    fn angle(gate: &GateSpec, theta: &[f64]) -> f64 {
        gate.param_slot.map_or(0.0, |s| theta[s])
    }

    /// One `kind targets slot` line per gate.
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ParamCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gates {
            let targets: Vec<String> = g.targets.iter().map(usize::to_string).collect();
            let slot = g.param_slot.map_or_else(|| "-".to_string(), |s| s.to_string());
            writeln!(f, "{}, {}, {}", g.kind, targets.join(" "), slot)?;
        }
        Ok(())
    }
}

fn init_lane<T: Amplitude>(data: &mut [T], width: usize, initial: InitialState) {
    let dim = data.len() / width;
    match initial {
        InitialState::AllZero => data[0] = T::from_real(1.0),
        InitialState::Uniform => {
            let a = T::from_real((dim as f64).sqrt().recip());
            data.iter_mut().step_by(width).for_each(|x| *x = a);
        }
    }
}

/// Final state of the circuit as a single lane.
pub(crate) fn simulate<T: Amplitude>(circuit: &ParamCircuit, theta: &[f64]) -> Vec<T> {
    let mut data = vec![T::default(); circuit.dim()];
    init_lane(&mut data, 1, circuit.initial);
    for g in &circuit.gates {
        apply_gate(&mut data, 1, 1, g, ParamCircuit::angle(g, theta));
    }
    data
}

/// The state and all parameter derivatives, propagated together.
///
/// `data` is row-major `dim x width` with `width = n_params + 1`: lane 0 is
/// `|psi>`, lane `l >= 1` is `d|psi>/d theta_{slot_of_lane[l - 1]}`. Lanes
/// are ordered by gate position; a lane is born right after its gate as
/// `(-i G / 2)` times the running state and then follows the remaining gates.
pub(crate) struct Tangents<T> {
    pub data: Vec<T>,
    pub width: usize,
    pub slot_of_lane: Vec<usize>,
}

pub(crate) fn tangents<T: Amplitude>(circuit: &ParamCircuit, theta: &[f64]) -> Tangents<T> {
    let width = circuit.n_params + 1;
    let mut data = vec![T::default(); circuit.dim() * width];
    init_lane(&mut data, width, circuit.initial);
    let mut active = 1;
    let mut slot_of_lane = Vec::with_capacity(circuit.n_params);
    for g in &circuit.gates {
        apply_gate(&mut data, width, active, g, ParamCircuit::angle(g, theta));
        if let Some(slot) = g.param_slot {
            apply_generator(&mut data, width, g, 0, active);
            slot_of_lane.push(slot);
            active += 1;
        }
    }
    // unused slots keep zero lanes
    for slot in 0..circuit.n_params {
        if !slot_of_lane.contains(&slot) {
            slot_of_lane.push(slot);
        }
    }
    Tangents {
        data,
        width,
        slot_of_lane,
    }
}

fn inverse(gate: &GateSpec, theta: f64) -> (GateSpec, f64) {
    let mut inv = gate.clone();
    inv.kind = match gate.kind {
        GateKind::SqrtX => GateKind::SqrtXdg,
        GateKind::SqrtXdg => GateKind::SqrtX,
        k => k,
    };
    (inv, -theta)
}

/// Energy `<psi|H|psi>` and its gradient `2 Re <d_k psi|H|psi>` by a single
/// adjoint sweep, for a diagonal `H` given by its basis energies.
pub(crate) fn energy_and_gradient<T: Amplitude>(
    circuit: &ParamCircuit,
    theta: &[f64],
    diagonal: &[f64],
) -> (f64, Vec<f64>) {
    let psi = simulate::<T>(circuit, theta);
    let energy = psi.iter().zip(diagonal).map(|(a, e)| a.norm_sqr() * e).sum();
    // lanes: 0 = state before the current gate, 1 = U_{>g}^dag H psi, 2 = scratch
    let width = 3;
    let mut data = vec![T::default(); psi.len() * width];
    for (z, (a, e)) in psi.iter().zip(diagonal).enumerate() {
        data[z * width] = *a;
        data[z * width + 1] = *a * *e;
    }
    let mut grad = vec![0.0; circuit.n_params];
    for g in circuit.gates.iter().rev() {
        let angle = ParamCircuit::angle(g, theta);
        if let Some(slot) = g.param_slot {
            apply_generator(&mut data, width, g, 0, 2);
            grad[slot] = 2.0
                * data
                    .chunks_exact(width)
                    .map(|row| row[2].re_inner(row[1]))
                    .sum::<f64>();
        }
        let (inv, inv_angle) = inverse(g, angle);
        apply_gate(&mut data, width, 2, &inv, inv_angle);
    }
    (energy, grad)
}

fn to_state<T: Amplitude>(n_qubits: usize, lane: impl Iterator<Item = T>) -> StateVector {
    StateVector::from_amplitudes(lane.map(Amplitude::to_complex).collect())
        .expect("register size is a power of two")
        .with_qubits(n_qubits)
}

impl StateVector {
    fn with_qubits(self, n_qubits: usize) -> Self {
        debug_assert_eq!(self.n_qubits(), n_qubits);
        self
    }
}

/// `U(theta) |psi_0>`.
pub fn run(circuit: &ParamCircuit, theta: &[f64]) -> Result<StateVector> {
    circuit.validate()?;
    circuit.check_theta(theta)?;
    Ok(if circuit.is_real() {
        to_state(circuit.n_qubits, simulate::<f64>(circuit, theta).into_iter())
    } else {
        to_state(circuit.n_qubits, simulate::<Complex64>(circuit, theta).into_iter())
    })
}

/// `d|psi(theta)>/d theta_k` for every slot `k`, unnormalized, in slot order.
pub fn derivative_states(circuit: &ParamCircuit, theta: &[f64]) -> Result<Vec<StateVector>> {
    circuit.validate()?;
    circuit.check_theta(theta)?;
    fn extract<T: Amplitude>(circuit: &ParamCircuit, t: Tangents<T>) -> Vec<StateVector> {
        let mut out = vec![None; circuit.n_params];
        for (lane, &slot) in t.slot_of_lane.iter().enumerate() {
            let column = t.data.iter().skip(lane + 1).step_by(t.width).copied();
            out[slot] = Some(to_state(circuit.n_qubits, column));
        }
        out.into_iter().map(|s| s.expect("every slot has a lane")).collect()
    }
    Ok(if circuit.is_real() {
        extract(circuit, tangents::<f64>(circuit, theta))
    } else {
        extract(circuit, tangents::<Complex64>(circuit, theta))
    })
}
