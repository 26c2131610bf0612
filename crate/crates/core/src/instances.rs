//! Multiple knapsack instances, assignment evaluation, the exhaustive optimum
//! oracle and the seeded instance generator.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Largest `m * n` the exhaustive oracle accepts.
pub const ENUMERATION_LIMIT: usize = 24;

/// Knapsack capacities plus item values and weights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MkpInstance {
    pub id: String,
    pub m: usize,
    pub n: usize,
    pub capacities: Vec<u64>,
    pub values: Vec<u64>,
    pub weights: Vec<u64>,
}

impl MkpInstance {
    pub fn new(
        id: impl Into<String>,
        capacities: Vec<u64>,
        values: Vec<u64>,
        weights: Vec<u64>,
    ) -> Result<Self> {
        let inst = Self {
            id: id.into(),
            m: capacities.len(),
            n: values.len(),
            capacities,
            values,
            weights,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidInstance(format!(
                "{}: need at least one knapsack and one item",
                self.id
            )));
        }
        check_len("capacities", self.m, self.capacities.len())?;
        check_len("values", self.n, self.values.len())?;
        check_len("weights", self.n, self.weights.len())?;
        let all_positive = self
            .capacities
            .iter()
            .chain(&self.values)
            .chain(&self.weights)
            .all(|&x| x > 0);
        if !all_positive {
            return Err(Error::InvalidInstance(format!(
                "{}: capacities, values and weights must be positive",
                self.id
            )));
        }
        Ok(())
    }

    /// Number of binary decision variables, one per (knapsack, item) cell.
    pub fn n_vars(&self) -> usize {
        self.m * self.n
    }

    /// Row-major variable index of cell (knapsack `i`, item `j`).
    pub fn var_index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let inst: Self = serde_json::from_str(&text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn write_json_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

/// Reads instances from a directory of `*.json` files (sorted by file name),
/// a single `.json` file, or a JSON-lines bundle (`.jsonl`).
pub fn load_instances(path: impl AsRef<Path>) -> Result<Vec<MkpInstance>> {
    let path = path.as_ref();
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .is_some_and(|ext| ext == "json" || ext == "jsonl")
            })
            .collect();
        files.sort();
        let mut out = Vec::new();
        for f in files {
            out.extend(load_instances(&f)?);
        }
        Ok(out)
    } else if path.extension().is_some_and(|ext| ext == "jsonl") {
        let reader = BufReader::new(fs::File::open(path)?);
        let mut out = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let inst: MkpInstance = serde_json::from_str(&line)?;
            inst.validate()?;
            out.push(inst);
        }
        Ok(out)
    } else {
        Ok(vec![MkpInstance::from_json_file(path)?])
    }
}

pub fn write_jsonl(path: impl AsRef<Path>, instances: &[MkpInstance]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    for inst in instances {
        serde_json::to_writer(&mut file, inst)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

/// An `m x n` 0/1 placement matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MkpAssignment {
    m: usize,
    n: usize,
    cells: Vec<bool>,
}

impl MkpAssignment {
    pub fn empty(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            cells: vec![false; m * n],
        }
    }

    /// Builds an assignment from a row-major bit vector (the QUBO variable order).
    pub fn from_bits(m: usize, n: usize, bits: &[bool]) -> Result<Self> {
        check_len("assignment bits", m * n, bits.len())?;
        Ok(Self {
            m,
            n,
            cells: bits.to_vec(),
        })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut cells = Vec::with_capacity(m * n);
        for row in rows {
            check_len("assignment row", n, row.len())?;
            cells.extend(row.iter().map(|&b| b != 0));
        }
        Ok(Self { m, n, cells })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.cells[i * self.n + j] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.cells
    }

    pub fn item_count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for MkpAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.cells.chunks(self.n.max(1)).enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for &b in row {
                f.write_str(if b { "1" } else { "0" })?;
            }
        }
        Ok(())
    }
}

/// A violated constraint, identified by its knapsack or item index (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    Capacity(usize),
    Item(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MkpEvaluation {
    pub objective: u64,
    pub feasible: bool,
    pub violated: Vec<Violation>,
}

pub fn evaluate(instance: &MkpInstance, assignment: &MkpAssignment) -> Result<MkpEvaluation> {
    check_len("assignment rows", instance.m, assignment.m)?;
    check_len("assignment columns", instance.n, assignment.n)?;
    let mut objective = 0;
    let mut violated = Vec::new();
    for i in 0..instance.m {
        let mut load = 0;
        for j in 0..instance.n {
            if assignment.get(i, j) {
                objective += instance.values[j];
                load += instance.weights[j];
            }
        }
        if load > instance.capacities[i] {
            violated.push(Violation::Capacity(i));
        }
    }
    for j in 0..instance.n {
        let uses = (0..instance.m).filter(|&i| assignment.get(i, j)).count();
        if uses > 1 {
            violated.push(Violation::Item(j));
        }
    }
    Ok(MkpEvaluation {
        objective,
        feasible: violated.is_empty(),
        violated,
    })
}

/// Exhaustive optimum over all `(m+1)^n` placements (each item in one
/// knapsack or unplaced). Ties go to the lexicographically smallest
/// row-major assignment.
pub fn brute_force_optimum(instance: &MkpInstance) -> Result<(MkpEvaluation, MkpAssignment)> {
    instance.validate()?;
    let (m, n) = (instance.m, instance.n);
    if m * n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            size: m * n,
            limit: ENUMERATION_LIMIT,
        });
    }
    // placement[j] in 0..=m, where m means "not placed"
    let mut placement = vec![m; n];
    let mut load = vec![0u64; m];
    let mut best: Option<(u64, MkpAssignment)> = None;
    loop {
        load.iter_mut().for_each(|l| *l = 0);
        let mut value = 0;
        for (j, &p) in placement.iter().enumerate() {
            if p < m {
                load[p] += instance.weights[j];
                value += instance.values[j];
            }
        }
        let fits = load.iter().zip(&instance.capacities).all(|(l, c)| l <= c);
        if fits {
            let improves = match &best {
                None => true,
                Some((v, a)) => {
                    value > *v || (value == *v && placement_assignment(m, n, &placement) < *a)
                }
            };
            if improves {
                best = Some((value, placement_assignment(m, n, &placement)));
            }
        }
        // odometer increment over base m+1
        let mut k = 0;
        loop {
            if k == n {
                let (_, assignment) = best.expect("the empty placement is always feasible");
                let eval = evaluate(instance, &assignment)?;
                return Ok((eval, assignment));
            }
            placement[k] = if placement[k] == m { 0 } else { placement[k] + 1 };
            if placement[k] != m {
                break;
            }
            k += 1;
        }
    }
}

fn placement_assignment(m: usize, n: usize, placement: &[usize]) -> MkpAssignment {
    let mut a = MkpAssignment::empty(m, n);
    for (j, &p) in placement.iter().enumerate() {
        if p < m {
            a.set(p, j, true);
        }
    }
    a
}

/// Sampling ranges for the instance generator (inclusive bounds).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub weight: (u64, u64),
    pub value: (u64, u64),
    pub capacity: (u64, u64),
}

impl Default for GeneratorConfig {
    /// Small weights and capacities keep the unbalanced penalty's minimizer
    /// feasible: with unit multipliers of 10, every unit of slack beyond one
    /// costs more than any item value.
    fn default() -> Self {
        Self {
            weight: (1, 3),
            value: (1, 10),
            capacity: (1, 3),
        }
    }
}

pub const MAX_KNAPSACKS: usize = 3;
pub const MAX_ITEMS: usize = 4;

pub fn generate_instance(seed: u64, m: usize, n: usize) -> Result<MkpInstance> {
    generate_instance_with(seed, m, n, &GeneratorConfig::default())
}

/// Seeded instance draw; redraws until the optimum packs at least one item.
pub fn generate_instance_with(
    seed: u64,
    m: usize,
    n: usize,
    cfg: &GeneratorConfig,
) -> Result<MkpInstance> {
    if !(1..=MAX_KNAPSACKS).contains(&m) || !(1..=MAX_ITEMS).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "generator supports 1..={MAX_KNAPSACKS} knapsacks and 1..={MAX_ITEMS} items, got {m}x{n}"
        )));
    }
    for (name, (lo, hi)) in [
        ("weight", cfg.weight),
        ("value", cfg.value),
        ("capacity", cfg.capacity),
    ] {
        if lo == 0 || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "{name} range {lo}..={hi} must be positive and non-empty"
            )));
        }
    }
    if cfg.weight.0 > cfg.capacity.1 {
        return Err(Error::InvalidArgument(
            "no item can ever fit: minimum weight exceeds maximum capacity".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = format!("mkp-{m}x{n}-{seed}");
    loop {
        let weights = (0..n)
            .map(|_| rng.gen_range(cfg.weight.0..=cfg.weight.1))
            .collect();
        let values = (0..n)
            .map(|_| rng.gen_range(cfg.value.0..=cfg.value.1))
            .collect();
        let capacities = (0..m)
            .map(|_| rng.gen_range(cfg.capacity.0..=cfg.capacity.1))
            .collect();
        let inst = MkpInstance::new(id.clone(), capacities, values, weights)?;
        if brute_force_optimum(&inst)?.0.objective > 0 {
            return Ok(inst);
        }
    }
}

/// Shapes with 9 to 12 QUBO variables within the generator limits.
pub const SUITE_SHAPES: [(usize, usize); 2] = [(3, 3), (3, 4)];

/// `count` instances; instance `k` has shape `shapes[k % len]` and seed
/// `seed + k`.
pub fn generate_suite(count: usize, seed: u64, shapes: &[(usize, usize)]) -> Result<Vec<MkpInstance>> {
    if shapes.is_empty() {
        return Err(Error::Empty("shape list"));
    }
    (0..count)
        .map(|k| {
            let (m, n) = shapes[k % shapes.len()];
            generate_instance(seed.wrapping_add(k as u64), m, n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> MkpInstance {
        MkpInstance::new("tiny", vec![2], vec![1], vec![1]).unwrap()
    }

    fn pair() -> MkpInstance {
        MkpInstance::new("pair", vec![3], vec![3, 1], vec![2, 2]).unwrap()
    }

    /// Independent oracle: all 2^(mn) bit matrices.
    fn exhaustive_bits(inst: &MkpInstance) -> (u64, MkpAssignment) {
        let k = inst.n_vars();
        let mut best: Option<(u64, MkpAssignment)> = None;
        for mask in 0u32..(1 << k) {
            let bits: Vec<bool> = (0..k).map(|b| mask >> b & 1 == 1).collect();
            let a = MkpAssignment::from_bits(inst.m, inst.n, &bits).unwrap();
            let e = evaluate(inst, &a).unwrap();
            if !e.feasible {
                continue;
            }
            let better = match &best {
                None => true,
                Some((v, b)) => e.objective > *v || (e.objective == *v && a < *b),
            };
            if better {
                best = Some((e.objective, a));
            }
        }
        best.unwrap()
    }

    #[test]
    fn empty_assignment_is_feasible() {
        let e = evaluate(&pair(), &MkpAssignment::empty(1, 2)).unwrap();
        assert_eq!(e.objective, 0);
        assert!(e.feasible);
    }

    #[test]
    fn single_item_fits() {
        let a = MkpAssignment::from_rows(&[vec![1]]).unwrap();
        let e = evaluate(&tiny(), &a).unwrap();
        assert_eq!(e.objective, 1);
        assert!(e.feasible);
    }

    #[test]
    fn overweight_knapsack_is_flagged() {
        let a = MkpAssignment::from_rows(&[vec![1, 1]]).unwrap();
        let e = evaluate(&pair(), &a).unwrap();
        assert_eq!(e.objective, 4);
        assert!(!e.feasible);
        assert_eq!(e.violated, vec![Violation::Capacity(0)]);
    }

    #[test]
    fn item_in_two_knapsacks_is_flagged() {
        let inst = MkpInstance::new("two", vec![5, 5], vec![2], vec![1]).unwrap();
        let a = MkpAssignment::from_rows(&[vec![1], vec![1]]).unwrap();
        let e = evaluate(&inst, &a).unwrap();
        assert_eq!(e.violated, vec![Violation::Item(0)]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(matches!(
            evaluate(&pair(), &MkpAssignment::empty(2, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invalid_instances_are_rejected() {
        assert!(MkpInstance::new("z", vec![0], vec![1], vec![1]).is_err());
        assert!(MkpInstance::new("e", vec![], vec![1], vec![1]).is_err());
        assert!(MkpInstance::new("l", vec![1], vec![1, 2], vec![1]).is_err());
    }

    #[test]
    fn oracle_small_cases() {
        let (e, a) = brute_force_optimum(&tiny()).unwrap();
        assert_eq!(e.objective, 1);
        assert_eq!(a, MkpAssignment::from_rows(&[vec![1]]).unwrap());

        let (e, a) = brute_force_optimum(&pair()).unwrap();
        assert_eq!(e.objective, 3);
        assert_eq!(a, MkpAssignment::from_rows(&[vec![1, 0]]).unwrap());

        let heavy = MkpInstance::new("heavy", vec![2, 3], vec![5, 5], vec![4, 9]).unwrap();
        let (e, a) = brute_force_optimum(&heavy).unwrap();
        assert_eq!(e.objective, 0);
        assert_eq!(a.item_count(), 0);
    }

    #[test]
    fn oracle_size_guard() {
        let inst = MkpInstance::new("big", vec![1; 5], vec![1; 5], vec![1; 5]).unwrap();
        assert!(matches!(
            brute_force_optimum(&inst),
            Err(Error::TooLarge { size: 25, .. })
        ));
    }

    #[test]
    fn placement_and_bitmatrix_enumerations_agree() {
        for seed in 0..40 {
            let m = 1 + (seed as usize % 3);
            let n = 1 + (seed as usize / 3 % 4);
            let inst = generate_instance_with(
                seed,
                m,
                n,
                &GeneratorConfig {
                    weight: (1, 10),
                    value: (1, 10),
                    capacity: (5, 15),
                },
            )
            .unwrap();
            let (e, a) = brute_force_optimum(&inst).unwrap();
            let (v, b) = exhaustive_bits(&inst);
            assert_eq!(e.objective, v, "{inst:?}");
            assert_eq!(a, b, "{inst:?}");
        }
    }

    #[test]
    fn generator_is_deterministic_and_nontrivial() {
        let a = generate_instance(17, 3, 4).unwrap();
        let b = generate_instance(17, 3, 4).unwrap();
        assert_eq!(a, b);
        for seed in 0..100 {
            let inst = generate_instance(1000 + seed, 3, 4).unwrap();
            assert!(brute_force_optimum(&inst).unwrap().0.objective > 0);
        }
    }

    #[test]
    fn generator_bounds() {
        assert!(generate_instance(1, 4, 1).is_err());
        assert!(generate_instance(1, 1, 5).is_err());
        assert!(generate_instance(1, 0, 1).is_err());
    }

    #[test]
    fn distinct_seeds_give_distinct_ids() {
        let ids: std::collections::HashSet<_> = (0..68)
            .map(|s| generate_instance(s, 3, 3).unwrap().id)
            .collect();
        assert_eq!(ids.len(), 68);
    }

    #[test]
    fn suite_alternates_shapes() {
        let suite = generate_suite(5, 40, &SUITE_SHAPES).unwrap();
        let shapes: Vec<_> = suite.iter().map(|i| (i.m, i.n)).collect();
        assert_eq!(shapes, vec![(3, 3), (3, 4), (3, 3), (3, 4), (3, 3)]);
        assert_eq!(suite[1], generate_instance(41, 3, 4).unwrap());
        assert!(generate_suite(1, 0, &[]).is_err());
    }

    #[test]
    fn jsonl_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("suite.jsonl");
        let suite = vec![tiny(), pair()];
        write_jsonl(&path, &suite).unwrap();
        assert_eq!(load_instances(&path).unwrap(), suite);
        let json = serde_json::to_string(&tiny()).unwrap();
        assert_eq!(
            json,
            r#"{"id":"tiny","m":1,"n":1,"capacities":[2],"values":[1],"weights":[1]}"#
        );
    }

    proptest::proptest! {
        #[test]
        fn objective_is_bounded(seed in 0u64..500, mask in 0u32..4096) {
            let inst = generate_instance(seed, 3, 4).unwrap();
            let bits: Vec<bool> = (0..12).map(|b| mask >> b & 1 == 1).collect();
            let a = MkpAssignment::from_bits(3, 4, &bits).unwrap();
            let e = evaluate(&inst, &a).unwrap();
            let bound = 3 * inst.values.iter().sum::<u64>();
            proptest::prop_assert!(e.objective <= bound);
            proptest::prop_assert_eq!(e.feasible, e.violated.is_empty());
            let (best, _) = brute_force_optimum(&inst).unwrap();
            if e.feasible {
                proptest::prop_assert!(e.objective <= best.objective);
            }
        }
    }
}
