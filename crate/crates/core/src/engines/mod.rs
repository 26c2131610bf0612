//! VarQITE with McLachlan updates and Euler steps, and an L-BFGS VQE baseline.

pub mod mv;
pub mod qite;
pub mod vqe;

pub use mv::{compute_mv, euler_step, solve_update, MvSystem};
pub use qite::{
    initial_theta, run_varqite, run_varqite_from, InitKind, QiteConfig, QiteOutcome, QiteTrace,
    TraceRow,
};
pub use vqe::{run_vqe, run_vqe_from, vqe_gradient, VqeConfig, VqeOutcome};
