use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encoding::IsingHamiltonian;
use crate::error::{check_len, Error, Result};

/// `2^n` amplitudes; qubit 0 is the least significant bit of the index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::default(); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self {
            n_qubits,
            amplitudes,
        }
    }

    pub fn uniform(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Self {
            n_qubits,
            amplitudes: vec![a; dim],
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// A computational basis label over `n_qubits`. Displays with qubit
/// `n - 1` first, so qubit 0 is the rightmost character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    pub index: usize,
    pub n_qubits: usize,
}

impl Bitstring {
    /// Bit of each qubit, qubit 0 first.
    pub fn bits(&self) -> Vec<bool> {
        (0..self.n_qubits).map(|q| self.index >> q & 1 == 1).collect()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.n_qubits).rev() {
            f.write_str(if self.index >> q & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// `<psi|H|psi>` for a diagonal Hamiltonian.
pub fn expectation(state: &StateVector, h: &IsingHamiltonian) -> Result<f64> {
    check_len("hamiltonian qubits", state.n_qubits, h.n_qubits)?;
    Ok(expectation_with_diagonal(state, &h.diagonal()))
}

pub fn expectation_with_diagonal(state: &StateVector, diagonal: &[f64]) -> f64 {
    state
        .amplitudes
        .iter()
        .zip(diagonal)
        .map(|(a, e)| a.norm_sqr() * e)
        .sum()
}

/// Index of the largest probability; the first (smallest index) wins ties.
pub(crate) fn argmax_index(probabilities: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (idx, p) in probabilities.into_iter().enumerate() {
        if p > best.1 {
            best = (idx, p);
        }
    }
    best.0
}

pub fn argmax_bitstring(state: &StateVector) -> Bitstring {
    Bitstring {
        index: argmax_index(state.amplitudes.iter().map(|a| a.norm_sqr())),
        n_qubits: state.n_qubits,
    }
}

/// Seeded multinomial draw of `shots` measurements in the computational basis.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> Result<BTreeMap<Bitstring, u64>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let dist = WeightedIndex::new(state.probabilities())
        .map_err(|e| Error::InvalidArgument(format!("cannot sample state: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let index = dist.sample(&mut rng);
        *counts
            .entry(Bitstring {
                index,
                n_qubits: state.n_qubits,
            })
            .or_insert(0) += 1;
    }
    Ok(counts)
}

/// Most frequent outcome of a histogram; ties go to the smallest index.
pub fn most_frequent(counts: &BTreeMap<Bitstring, u64>) -> Option<Bitstring> {
    let mut best: Option<(Bitstring, u64)> = None;
    for (&b, &c) in counts {
        if best.map_or(true, |(_, bc)| c > bc) {
            best = Some((b, c));
        }
    }
    best.map(|(b, _)| b)
}
