use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::instances::{MkpAssignment, MkpInstance};

/// Multipliers of the linear and quadratic penalty terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            lambda1: 10.0,
            lambda2: 10.0,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.lambda1) && ok(self.lambda2) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "penalty multipliers must be positive, got {self:?}"
            )))
        }
    }
}

/// `offset + sum_k linear[k] x_k + sum_{k<l} quadratic[(k,l)] x_k x_l` over `x in {0,1}^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qubo {
    pub n_vars: usize,
    #[serde(with = "triples")]
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub linear: Vec<f64>,
    pub offset: f64,
}

impl Qubo {
    pub fn zero(n_vars: usize) -> Self {
        Self {
            n_vars,
            quadratic: BTreeMap::new(),
            linear: vec![0.0; n_vars],
            offset: 0.0,
        }
    }

    /// Adds `coeff * x_k * x_l`; `k == l` folds into the linear term.
    pub fn add_term(&mut self, k: usize, l: usize, coeff: f64) {
        match k.cmp(&l) {
            std::cmp::Ordering::Equal => self.linear[k] += coeff,
            std::cmp::Ordering::Less => *self.quadratic.entry((k, l)).or_insert(0.0) += coeff,
            std::cmp::Ordering::Greater => *self.quadratic.entry((l, k)).or_insert(0.0) += coeff,
        }
    }

    /// Adds `-lambda1 * h + lambda2 * h^2` for the affine form
    /// `h(x) = constant + sum_k a_k x_k`.
    fn add_unbalanced_penalty(&mut self, constant: f64, terms: &[(usize, f64)], p: PenaltyConfig) {
        self.offset += -p.lambda1 * constant + p.lambda2 * constant * constant;
        for (idx, &(k, a)) in terms.iter().enumerate() {
            self.linear[k] += -p.lambda1 * a + p.lambda2 * (2.0 * constant * a + a * a);
            for &(l, b) in &terms[idx + 1..] {
                self.add_term(k, l, 2.0 * p.lambda2 * a * b);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_len("qubo linear terms", self.n_vars, self.linear.len())?;
        for (&(k, l), &q) in &self.quadratic {
            if k >= l || l >= self.n_vars {
                return Err(Error::InvalidArgument(format!(
                    "quadratic key ({k},{l}) must satisfy k < l < {}",
                    self.n_vars
                )));
            }
            if !q.is_finite() {
                return Err(Error::NonFinite(format!("quadratic coefficient ({k},{l})")));
            }
        }
        if !self.offset.is_finite() || self.linear.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite("qubo coefficient".into()));
        }
        Ok(())
    }

    /// QUBO value including the constant offset.
    pub fn value(&self, x: &[bool]) -> f64 {
        self.offset + self.value_without_offset(x)
    }

    /// QUBO value of the variable-dependent part only (zero at `x = 0`).
    pub fn value_without_offset(&self, x: &[bool]) -> f64 {
        let mut total = 0.0;
        for (k, &l) in self.linear.iter().enumerate() {
            if x[k] {
                total += l;
            }
        }
        for (&(k, l), &q) in &self.quadratic {
            if x[k] && x[l] {
                total += q;
            }
        }
        total
    }

    /// Exhaustive minimizer; ties go to the smallest integer encoding
    /// (variable 0 = least significant bit).
    pub fn brute_force_min(&self) -> Result<(f64, Vec<bool>)> {
        if self.n_vars > crate::encoding::ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                size: self.n_vars,
                limit: crate::encoding::ENUMERATION_LIMIT,
            });
        }
        let mut best = (f64::INFINITY, 0u64);
        for mask in 0u64..(1 << self.n_vars) {
            let x = bits_of(mask, self.n_vars);
            let v = self.value(&x);
            if v < best.0 {
                best = (v, mask);
            }
        }
        Ok((best.0, bits_of(best.1, self.n_vars)))
    }
}

pub(crate) fn bits_of(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|b| mask >> b & 1 == 1).collect()
}

/// Unbalanced-penalty QUBO for an MKP instance.
///
/// Minimizes `-sum v_j x_ij - lambda1 [sum h1 + sum h2] + lambda2 [sum h1^2 + sum h2^2]`
/// with `h1_i = W_i - sum_j w_j x_ij` and `h2_j = 1 - sum_i x_ij`. Variable
/// `(i, j)` sits at index `i * n + j`.
pub fn build_unbalanced_qubo(instance: &MkpInstance, penalties: PenaltyConfig) -> Result<Qubo> {
    instance.validate()?;
    penalties.validate()?;
    let (m, n) = (instance.m, instance.n);
    let mut q = Qubo::zero(m * n);
    for i in 0..m {
        for j in 0..n {
            q.linear[instance.var_index(i, j)] -= instance.values[j] as f64;
        }
    }
    for i in 0..m {
        let terms: Vec<_> = (0..n)
            .map(|j| (instance.var_index(i, j), -(instance.weights[j] as f64)))
            .collect();
        q.add_unbalanced_penalty(instance.capacities[i] as f64, &terms, penalties);
    }
    for j in 0..n {
        let terms: Vec<_> = (0..m).map(|i| (instance.var_index(i, j), -1.0)).collect();
        q.add_unbalanced_penalty(1.0, &terms, penalties);
    }
    q.quadratic.retain(|_, c| *c != 0.0);
    Ok(q)
}

/// Maps a QUBO bit-string back onto the knapsack placement matrix.
pub fn assignment_from_bits(instance: &MkpInstance, bits: &[bool]) -> Result<MkpAssignment> {
    MkpAssignment::from_bits(instance.m, instance.n, bits)
}

mod triples {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(usize, usize), f64>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let v: Vec<(usize, usize, f64)> = map.iter().map(|(&(k, l), &q)| (k, l, q)).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(usize, usize), f64>, D::Error> {
        let v: Vec<(usize, usize, f64)> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|(k, l, q)| ((k, l), q)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::generate_instance_with;
    use crate::instances::GeneratorConfig;

    /// Direct evaluation of the penalized objective, independent of the expansion.
    fn direct(inst: &MkpInstance, p: PenaltyConfig, x: &[bool]) -> f64 {
        let cell = |i: usize, j: usize| if x[i * inst.n + j] { 1.0 } else { 0.0 };
        let mut total = 0.0;
        for i in 0..inst.m {
            for j in 0..inst.n {
                total -= inst.values[j] as f64 * cell(i, j);
            }
        }
        for i in 0..inst.m {
            let h = inst.capacities[i] as f64
                - (0..inst.n)
                    .map(|j| inst.weights[j] as f64 * cell(i, j))
                    .sum::<f64>();
            total += -p.lambda1 * h + p.lambda2 * h * h;
        }
        for j in 0..inst.n {
            let h = 1.0 - (0..inst.m).map(|i| cell(i, j)).sum::<f64>();
            total += -p.lambda1 * h + p.lambda2 * h * h;
        }
        total
    }

    #[test]
    fn single_cell_values() {
        let inst = MkpInstance::new("t", vec![2], vec![1], vec![1]).unwrap();
        let q = build_unbalanced_qubo(&inst, PenaltyConfig::default()).unwrap();
        assert_eq!(q.value(&[false]), 20.0);
        assert_eq!(q.value(&[true]), -1.0);
    }

    #[test]
    fn all_zero_value_matches_closed_form() {
        let p = PenaltyConfig {
            lambda1: 3.0,
            lambda2: 7.0,
        };
        for seed in 0..20 {
            let inst = generate_instance_with(seed, 3, 4, &GeneratorConfig {
                weight: (1, 10),
                value: (1, 10),
                capacity: (5, 15),
            })
            .unwrap();
            let q = build_unbalanced_qubo(&inst, p).unwrap();
            let sum_w: f64 = inst.capacities.iter().map(|&w| w as f64).sum();
            let sum_w2: f64 = inst.capacities.iter().map(|&w| (w * w) as f64).sum();
            let n = inst.n as f64;
            let expected = -p.lambda1 * (sum_w + n) + p.lambda2 * (sum_w2 + n);
            assert_eq!(q.value(&vec![false; 12]), expected);
        }
    }

    #[test]
    fn exhaustive_match_with_direct_objective() {
        for seed in 0..10 {
            let inst = generate_instance_with(seed, 2, 3, &GeneratorConfig {
                weight: (1, 10),
                value: (1, 10),
                capacity: (5, 15),
            })
            .unwrap();
            let p = PenaltyConfig::default();
            let q = build_unbalanced_qubo(&inst, p).unwrap();
            q.validate().unwrap();
            for mask in 0..64u64 {
                let x = bits_of(mask, 6);
                assert_eq!(q.value(&x), direct(&inst, p, &x), "seed {seed} mask {mask}");
            }
        }
    }

    #[test]
    fn rejects_bad_penalties() {
        let inst = MkpInstance::new("t", vec![2], vec![1], vec![1]).unwrap();
        let p = PenaltyConfig {
            lambda1: 0.0,
            lambda2: 1.0,
        };
        assert!(build_unbalanced_qubo(&inst, p).is_err());
    }

    #[test]
    fn json_shape() {
        let mut q = Qubo::zero(2);
        q.add_term(1, 0, 2.5);
        q.linear[0] = -1.0;
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(
            s,
            r#"{"n_vars":2,"quadratic":[[0,1,2.5]],"linear":[-1.0,0.0],"offset":0.0}"#
        );
        let back: Qubo = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
    }
}
