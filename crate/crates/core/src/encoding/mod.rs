//! Knapsack to QUBO to Ising / Max-Cut encodings and their decoders.

pub mod ising;
pub mod maxcut;
pub mod qubo;

pub use ising::{qubo_to_ising, rescale, spectral_norm, IsingHamiltonian};
pub use maxcut::{
    decode_maxcut_index, decode_maxcut_solution, maxcut_hamiltonian, qubo_to_maxcut, Edge,
    SpinAssignment, WeightedGraph,
};
pub use qubo::{assignment_from_bits, build_unbalanced_qubo, PenaltyConfig, Qubo};

/// Largest variable or qubit count for exhaustive enumeration.
pub const ENUMERATION_LIMIT: usize = 24;

#[cfg(test)]
pub(crate) mod test_support {
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    use super::Qubo;

    pub fn random_qubo(rng: &mut ChaCha8Rng, n: usize) -> Qubo {
        let mut q = Qubo::zero(n);
        q.offset = rng.gen_range(-5.0..5.0);
        for k in 0..n {
            q.linear[k] = rng.gen_range(-10.0..10.0);
            for l in k + 1..n {
                if rng.gen_bool(0.6) {
                    q.add_term(k, l, rng.gen_range(-10.0..10.0));
                }
            }
        }
        q
    }
}
