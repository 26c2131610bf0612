//! Circuit builders: iHVA over a Max-Cut graph, multi-angle QAOA over an
//! Ising Hamiltonian, and a hardware-efficient RY/CX ansatz.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::encoding::{IsingHamiltonian, WeightedGraph};
use crate::error::{Error, Result};
use crate::simulator::{GateKind, InitialState, ParamCircuit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnsatzKind {
    IHva,
    MaQaoa,
    Hea,
}

impl AnsatzKind {
    pub fn name(self) -> &'static str {
        match self {
            AnsatzKind::IHva => "ihva",
            AnsatzKind::MaQaoa => "ma-qaoa",
            AnsatzKind::Hea => "hea",
        }
    }
}

/// What an ansatz was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Graph(WeightedGraph),
    Hamiltonian(IsingHamiltonian),
    Qubits(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub reps: usize,
    pub circuit: ParamCircuit,
    pub provenance: Provenance,
}

impl AnsatzSpec {
    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.circuit.n_params
    }
}

pub const DEFAULT_REPS: usize = 1;

/// When the iHVA switches between `RZY` and `RYZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Alternation {
    /// `RZY` on odd reps, `RYZ` on even reps.
    #[default]
    PerRep,
    /// Switch on every spanning-forest pass, counted across reps.
    PerPass,
}

fn check_reps(p: usize) -> Result<()> {
    if p == 0 {
        Err(Error::InvalidArgument("ansatz needs at least one repetition".into()))
    } else {
        Ok(())
    }
}

/// Splits the edge set into successive BFS spanning forests.
///
/// Each pass roots a tree at the smallest unvisited vertex of every
/// component, visits neighbors in ascending order and emits `(parent, child)`
/// in discovery order; the emitted edges are removed before the next pass.
pub fn bfs_forest_passes(graph: &WeightedGraph) -> Vec<Vec<(usize, usize)>> {
    let n = graph.n_vertices();
    let mut remaining: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for e in graph.edges() {
        remaining[e.u].insert(e.v);
        remaining[e.v].insert(e.u);
    }
    let mut passes = Vec::new();
    while remaining.iter().any(|nb| !nb.is_empty()) {
        let mut visited = vec![false; n];
        let mut pass = Vec::new();
        for root in 0..n {
            if visited[root] {
                continue;
            }
            visited[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                for &v in &remaining[u] {
                    if !visited[v] {
                        visited[v] = true;
                        pass.push((u, v));
                        queue.push_back(v);
                    }
                }
            }
        }
        for &(u, v) in &pass {
            remaining[u].remove(&v);
            remaining[v].remove(&u);
        }
        passes.push(pass);
    }
    passes
}

pub fn build_ihva(graph: &WeightedGraph, p: usize) -> Result<AnsatzSpec> {
    build_ihva_with(graph, p, Alternation::PerRep)
}

pub fn build_ihva_with(graph: &WeightedGraph, p: usize, alternation: Alternation) -> Result<AnsatzSpec> {
    check_reps(p)?;
    let passes = bfs_forest_passes(graph);
    let mut circuit = ParamCircuit::new(graph.n_vertices(), InitialState::Uniform);
    let mut pass_counter = 0;
    for rep in 1..=p {
        for pass in &passes {
            pass_counter += 1;
            let odd = match alternation {
                Alternation::PerRep => rep % 2 == 1,
                Alternation::PerPass => pass_counter % 2 == 1,
            };
            let kind = if odd { GateKind::RZY } else { GateKind::RYZ };
            for &(parent, child) in pass {
                circuit.push_rotation(kind, vec![parent, child]);
            }
        }
    }
    Ok(AnsatzSpec {
        kind: AnsatzKind::IHva,
        reps: p,
        circuit,
        provenance: Provenance::Graph(graph.clone()),
    })
}

pub fn build_maqaoa(h: &IsingHamiltonian, p: usize) -> Result<AnsatzSpec> {
    check_reps(p)?;
    let mut circuit = ParamCircuit::new(h.n_qubits, InitialState::Uniform);
    for _ in 0..p {
        for ((k, l), _) in h.nonzero_couplings() {
            circuit.push_rotation(GateKind::RZZ, vec![k, l]);
        }
        for (k, _) in h.nonzero_fields() {
            circuit.push_rotation(GateKind::RZ, vec![k]);
        }
        for q in 0..h.n_qubits {
            circuit.push_rotation(GateKind::RX, vec![q]);
        }
    }
    Ok(AnsatzSpec {
        kind: AnsatzKind::MaQaoa,
        reps: p,
        circuit,
        provenance: Provenance::Hamiltonian(h.clone()),
    })
}

pub fn build_hea(n_qubits: usize, p: usize) -> Result<AnsatzSpec> {
    check_reps(p)?;
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("ansatz needs at least one qubit".into()));
    }
    let mut circuit = ParamCircuit::new(n_qubits, InitialState::AllZero);
    let ry_layer = |c: &mut ParamCircuit| {
        for q in 0..n_qubits {
            c.push_rotation(GateKind::RY, vec![q]);
        }
    };
    for _ in 0..p {
        ry_layer(&mut circuit);
        for q in 1..n_qubits {
            circuit.push_fixed(GateKind::CX, vec![q - 1, q]);
        }
    }
    ry_layer(&mut circuit);
    Ok(AnsatzSpec {
        kind: AnsatzKind::Hea,
        reps: p,
        circuit,
        provenance: Provenance::Qubits(n_qubits),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{run, StateVector};
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> WeightedGraph {
        WeightedGraph::new(n, edges.iter().map(|&(u, v)| (u, v, 1.0))).unwrap()
    }

    fn gate_list(spec: &AnsatzSpec) -> Vec<(GateKind, Vec<usize>)> {
        spec.circuit
            .gates
            .iter()
            .map(|g| (g.kind, g.targets.clone()))
            .collect()
    }

    #[test]
    fn triangle_passes() {
        let k3 = graph(3, &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(bfs_forest_passes(&k3), vec![vec![(0, 1), (0, 2)], vec![(1, 2)]]);
        let spec = build_ihva(&k3, 1).unwrap();
        assert_eq!(spec.n_params(), 3);
        assert_eq!(
            gate_list(&spec),
            vec![
                (GateKind::RZY, vec![0, 1]),
                (GateKind::RZY, vec![0, 2]),
                (GateKind::RZY, vec![1, 2]),
            ]
        );
    }

    #[test]
    fn ihva_alternates_across_reps() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        let spec = build_ihva(&path, 2).unwrap();
        assert_eq!(spec.n_params(), 4);
        let kinds: Vec<GateKind> = spec.circuit.gates.iter().map(|g| g.kind).collect();
        assert_eq!(kinds, vec![GateKind::RZY, GateKind::RZY, GateKind::RYZ, GateKind::RYZ]);

        let k3 = graph(3, &[(0, 1), (0, 2), (1, 2)]);
        let per_pass = build_ihva_with(&k3, 1, Alternation::PerPass).unwrap();
        let kinds: Vec<GateKind> = per_pass.circuit.gates.iter().map(|g| g.kind).collect();
        assert_eq!(kinds, vec![GateKind::RZY, GateKind::RZY, GateKind::RYZ]);
    }

    #[test]
    fn ihva_forests_cover_components() {
        // two components; the second is rooted at its smallest vertex
        let g = graph(5, &[(3, 4), (2, 4), (0, 1)]);
        assert_eq!(bfs_forest_passes(&g), vec![vec![(0, 1), (2, 4), (4, 3)]]);
    }

    #[test]
    fn edgeless_graph_gives_empty_circuit() {
        let spec = build_ihva(&graph(4, &[]), 1).unwrap();
        assert_eq!(spec.n_params(), 0);
        assert!(spec.circuit.gates.is_empty());
        assert!(build_ihva(&graph(2, &[(0, 1)]), 0).is_err());
    }

    #[test]
    fn maqaoa_counts() {
        let mut h = IsingHamiltonian::zero(3);
        h.add_coupling(0, 1, 1.0);
        h.add_coupling(0, 2, 1.0);
        h.add_coupling(1, 2, 1.0);
        assert_eq!(build_maqaoa(&h, 1).unwrap().n_params(), 6);
        assert_eq!(build_maqaoa(&h, 2).unwrap().n_params(), 12);
        assert_eq!(build_maqaoa(&IsingHamiltonian::zero(4), 1).unwrap().n_params(), 4);
        h.fields[1] = 0.5;
        let spec = build_maqaoa(&h, 1).unwrap();
        assert_eq!(spec.n_params(), 7);
        assert_eq!(spec.circuit.gates[3].kind, GateKind::RZ);
        assert!(build_maqaoa(&h, 0).is_err());
    }

    #[test]
    fn hea_counts() {
        let one = build_hea(1, 1).unwrap();
        assert_eq!(one.n_params(), 2);
        assert!(one.circuit.gates.iter().all(|g| g.kind == GateKind::RY));
        let three = build_hea(3, 1).unwrap();
        assert_eq!(three.n_params(), 6);
        assert_eq!(three.circuit.gates.iter().filter(|g| g.kind == GateKind::CX).count(), 2);
        assert_eq!(build_hea(3, 2).unwrap().n_params(), 9);
        assert!(build_hea(0, 1).is_err());
        assert!(three.circuit.is_real());
    }

    #[test]
    fn dump_format() {
        let spec = build_hea(2, 1).unwrap();
        assert_eq!(
            spec.circuit.dump(),
            "ry, 0, 0\nry, 1, 1\ncx, 0 1, -\nry, 0, 2\nry, 1, 3\n"
        );
    }

    fn arb_graph() -> impl Strategy<Value = WeightedGraph> {
        (1usize..8).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            let m = pairs.len();
            (Just(n), Just(pairs), proptest::collection::vec(any::<bool>(), m))
        })
        .prop_map(|(n, pairs, keep)| {
            let edges = pairs
                .into_iter()
                .zip(keep)
                .filter(|(_, k)| *k)
                .map(|((u, v), _)| (u, v, 1.0));
            WeightedGraph::new(n, edges).unwrap()
        })
    }

    proptest! {
        #[test]
        fn ihva_consumes_every_edge_once(g in arb_graph(), p in 1usize..4) {
            let passes = bfs_forest_passes(&g);
            let mut seen: Vec<(usize, usize)> = passes
                .iter()
                .flatten()
                .map(|&(u, v)| (u.min(v), u.max(v)))
                .collect();
            seen.sort_unstable();
            let mut edges: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
            edges.sort_unstable();
            prop_assert_eq!(seen, edges);
            let spec = build_ihva(&g, p).unwrap();
            prop_assert_eq!(spec.n_params(), p * g.edges().len());
            prop_assert!(spec.circuit.validate().is_ok());
            prop_assert_eq!(build_ihva(&g, p).unwrap(), spec.clone());

            let zero = run(&spec.circuit, &vec![0.0; spec.n_params()]).unwrap();
            let uniform = StateVector::uniform(g.n_vertices());
            for (a, b) in zero.amplitudes().iter().zip(uniform.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn forests_are_acyclic(g in arb_graph()) {
            for pass in bfs_forest_passes(&g) {
                let mut child_seen = vec![false; g.n_vertices()];
                for (_, c) in pass {
                    prop_assert!(!child_seen[c]);
                    child_seen[c] = true;
                }
            }
        }

        #[test]
        fn hea_and_maqaoa_counts(n in 1usize..7, p in 1usize..4, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut h = IsingHamiltonian::zero(n);
            for k in 0..n {
                if rng.gen_bool(0.5) { h.fields[k] = rng.gen_range(-1.0..1.0); }
                for l in k + 1..n {
                    if rng.gen_bool(0.5) { h.add_coupling(k, l, rng.gen_range(-1.0..1.0)); }
                }
            }
            let per_layer = h.nonzero_couplings().count() + h.nonzero_fields().count() + n;
            prop_assert_eq!(build_maqaoa(&h, p).unwrap().n_params(), p * per_layer);
            prop_assert_eq!(build_hea(n, p).unwrap().n_params(), (p + 1) * n);
            let hea = build_hea(n, p).unwrap();
            let s = run(&hea.circuit, &vec![0.0; hea.n_params()]).unwrap();
            prop_assert!((s.amplitudes()[0].re - 1.0).abs() < 1e-12);
        }
    }
}
