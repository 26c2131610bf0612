//! Exact state-vector simulation of parameterized circuits.

pub(crate) mod amplitude;
pub mod circuit;
pub mod gates;
pub mod state;

pub use circuit::{derivative_states, run, InitialState, ParamCircuit};
pub use gates::{distance_up_to_phase, gate_matrix, matmul, GateKind, GateSpec};
pub use state::{
    argmax_bitstring, expectation, expectation_with_diagonal, most_frequent, sample, Bitstring,
    StateVector,
};
