use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::encoding::qubo::Qubo;
use crate::encoding::ENUMERATION_LIMIT;
use crate::error::{Error, Result};

/// Diagonal Ising operator `offset + sum_k h_k Z_k + sum_{k<l} J_kl Z_k Z_l`.
///
/// Basis index bit `k` set means qubit `k` is `|1>`, i.e. `z_k = -1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingHamiltonian {
    pub n_qubits: usize,
    pub fields: Vec<f64>,
    pub couplings: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
    /// Accumulated divisor from [`rescale`]; energies of the original
    /// operator are `scale * energy`.
    pub scale: f64,
}

impl IsingHamiltonian {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            fields: vec![0.0; n_qubits],
            couplings: BTreeMap::new(),
            offset: 0.0,
            scale: 1.0,
        }
    }

    pub fn add_coupling(&mut self, k: usize, l: usize, j: f64) {
        assert_ne!(k, l, "ZZ coupling needs two distinct qubits");
        let key = if k < l { (k, l) } else { (l, k) };
        *self.couplings.entry(key).or_insert(0.0) += j;
    }

    pub fn nonzero_fields(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.fields
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, h)| h != 0.0)
    }

    pub fn nonzero_couplings(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.couplings
            .iter()
            .map(|(&k, &j)| (k, j))
            .filter(|&(_, j)| j != 0.0)
    }

    /// Energy of computational basis state `index`.
    pub fn energy(&self, index: usize) -> f64 {
        let z = |q: usize| if index >> q & 1 == 1 { -1.0 } else { 1.0 };
        let mut e = self.offset;
        for (q, &h) in self.fields.iter().enumerate() {
            e += h * z(q);
        }
        for (&(k, l), &j) in &self.couplings {
            e += j * z(k) * z(l);
        }
        e
    }

    /// Energies of all `2^n` basis states.
    pub fn diagonal(&self) -> Vec<f64> {
        let dim = 1usize << self.n_qubits;
        let mut diag = vec![self.offset; dim];
        for (q, h) in self.nonzero_fields() {
            for (idx, e) in diag.iter_mut().enumerate() {
                *e += if idx >> q & 1 == 1 { -h } else { h };
            }
        }
        for ((k, l), j) in self.nonzero_couplings() {
            for (idx, e) in diag.iter_mut().enumerate() {
                *e += if (idx >> k ^ idx >> l) & 1 == 1 { -j } else { j };
            }
        }
        diag
    }

    pub fn energy_of_spins(&self, spins: &[i8]) -> f64 {
        let index = spins
            .iter()
            .enumerate()
            .fold(0usize, |acc, (q, &s)| if s < 0 { acc | 1 << q } else { acc });
        self.energy(index)
    }

    /// Exhaustive ground energy and the lowest-index basis state attaining it.
    pub fn ground_state(&self) -> Result<(f64, usize)> {
        self.guard()?;
        let diag = self.diagonal();
        let mut best = (f64::INFINITY, 0);
        for (idx, &e) in diag.iter().enumerate() {
            if e < best.0 {
                best = (e, idx);
            }
        }
        Ok(best)
    }

    fn guard(&self) -> Result<()> {
        if self.n_qubits > ENUMERATION_LIMIT {
            Err(Error::TooLarge {
                size: self.n_qubits,
                limit: ENUMERATION_LIMIT,
            })
        } else {
            Ok(())
        }
    }
}

/// Substitutes `x_k = (1 - z_k) / 2`, so `x = 0` maps to `z = +1` (qubit `|0>`).
pub fn qubo_to_ising(q: &Qubo) -> Result<IsingHamiltonian> {
    q.validate()?;
    let mut h = IsingHamiltonian::zero(q.n_vars);
    h.offset = q.offset;
    for (k, &l) in q.linear.iter().enumerate() {
        h.offset += l / 2.0;
        h.fields[k] -= l / 2.0;
    }
    for (&(k, l), &c) in &q.quadratic {
        h.offset += c / 4.0;
        h.fields[k] -= c / 4.0;
        h.fields[l] -= c / 4.0;
        h.add_coupling(k, l, c / 4.0);
    }
    Ok(h)
}

/// Largest absolute eigenvalue; the operator is diagonal, so this is the
/// largest absolute basis-state energy.
pub fn spectral_norm(h: &IsingHamiltonian) -> Result<f64> {
    h.guard()?;
    Ok(h.diagonal().iter().fold(0.0, |acc: f64, e| acc.max(e.abs())))
}

/// Divides every coefficient by `d`, recording the divisor so the original
/// energies stay recoverable.
pub fn rescale(h: &IsingHamiltonian, d: f64) -> Result<IsingHamiltonian> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive and finite, got {d}"
        )));
    }
    let mut out = h.clone();
    out.fields.iter_mut().for_each(|f| *f /= d);
    out.couplings.values_mut().for_each(|j| *j /= d);
    out.offset /= d;
    out.scale *= d;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::qubo::bits_of;
    use crate::encoding::test_support::random_qubo;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn index_of_bits(x: &[bool]) -> usize {
        x.iter()
            .enumerate()
            .fold(0, |acc, (k, &b)| if b { acc | 1 << k } else { acc })
    }

    #[test]
    fn zero_qubo_gives_zero_hamiltonian() {
        let h = qubo_to_ising(&Qubo::zero(3)).unwrap();
        assert_eq!(h, IsingHamiltonian::zero(3));
    }

    #[test]
    fn single_linear_term() {
        let mut q = Qubo::zero(1);
        q.linear[0] = 3.0;
        let h = qubo_to_ising(&q).unwrap();
        assert_eq!(h.fields, vec![-1.5]);
        assert_eq!(h.offset, 1.5);
    }

    #[test]
    fn exhaustive_energy_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=10 {
            let q = random_qubo(&mut rng, n);
            let h = qubo_to_ising(&q).unwrap();
            let diag = h.diagonal();
            for mask in 0..(1u64 << n) {
                let x = bits_of(mask, n);
                let idx = index_of_bits(&x);
                assert!((q.value(&x) - h.energy(idx)).abs() < 1e-12);
                assert!((diag[idx] - h.energy(idx)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectral_norm_examples() {
        let mut z = IsingHamiltonian::zero(1);
        z.fields[0] = 1.0;
        assert_eq!(spectral_norm(&z).unwrap(), 1.0);

        let mut h = IsingHamiltonian::zero(2);
        h.add_coupling(0, 1, 2.0);
        h.fields[0] = 1.0;
        assert_eq!(spectral_norm(&h).unwrap(), 3.0);
        let scaled = rescale(&h, 4.0).unwrap();
        assert_eq!(spectral_norm(&scaled).unwrap(), 0.75);
    }

    #[test]
    fn spectral_norm_guard() {
        let h = IsingHamiltonian::zero(25);
        assert!(matches!(spectral_norm(&h), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn rescale_examples() {
        let mut h = IsingHamiltonian::zero(2);
        h.add_coupling(0, 1, 2.0);
        h.fields[1] = -0.5;
        h.offset = 3.0;
        assert_eq!(rescale(&h, 1.0).unwrap(), h);
        let r = rescale(&h, 10.0).unwrap();
        assert_eq!(r.couplings[&(0, 1)], 0.2);
        assert_eq!(r.scale, 10.0);
        assert!(rescale(&h, 0.0).is_err());
        assert!(rescale(&h, -1.0).is_err());

        let norm = spectral_norm(&h).unwrap();
        let unit = rescale(&h, norm).unwrap();
        assert!(unit.diagonal().iter().all(|e| e.abs() <= 1.0 + 1e-15));
        let (e_min, _) = h.ground_state().unwrap();
        let (e_min_scaled, _) = unit.ground_state().unwrap();
        assert!((e_min_scaled * unit.scale - e_min).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn roundtrip_holds_for_random_qubos(seed in 0u64..1000, n in 1usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = random_qubo(&mut rng, n);
            let h = qubo_to_ising(&q).unwrap();
            for mask in 0..(1u64 << n) {
                let x = bits_of(mask, n);
                proptest::prop_assert!((q.value(&x) - h.energy(mask as usize)).abs() < 1e-12);
            }
        }
    }
}
