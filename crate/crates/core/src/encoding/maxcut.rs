use serde::{Deserialize, Serialize};

use crate::encoding::ising::IsingHamiltonian;
use crate::encoding::qubo::Qubo;
use crate::error::{check_len, Error, Result};

/// Sign applied to the auxiliary edges `(0, k)` produced by the reduction.
///
/// With `x_k = [s_0 != s_k]` and `y_kl = [s_k != s_l]`, every product obeys
/// `x_k x_l = (x_k + x_l - y_kl) / 2`, so
/// `qubo(x) = offset - (sum_k a_k y_0k + sum_{k<l} q_kl y_kl) / 2` with
/// `a_k = -(2 l_k + sum_j q_kj)`. The inner edge weights `q_kj + q_jk` keep
/// their sign while the auxiliary weights `sum_j q_kj + q_jk` (with
/// `q_kk = l_k`) flip, giving `qubo(x) = offset - cut(s) / 2`: minimizing the
/// QUBO is a maximum cut.
pub const AUX_EDGE_SIGN: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Undirected weighted graph with edges stored as `u < v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct WeightedGraph {
    n_vertices: usize,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl TryFrom<GraphJson> for WeightedGraph {
    type Error = Error;

    fn try_from(g: GraphJson) -> Result<Self> {
        WeightedGraph::new(g.n, g.edges)
    }
}

impl From<WeightedGraph> for GraphJson {
    fn from(g: WeightedGraph) -> Self {
        GraphJson {
            n: g.n_vertices,
            edges: g.edges.iter().map(|e| (e.u, e.v, e.weight)).collect(),
        }
    }
}

impl WeightedGraph {
    /// Builds a graph, normalizing each edge to `u < v`.
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on vertex {a}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if v >= n_vertices {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u},{v}) references a vertex outside 0..{n_vertices}"
                )));
            }
            if !w.is_finite() {
                return Err(Error::NonFinite(format!("weight of edge ({u},{v})")));
            }
            if out.iter().any(|e: &Edge| e.u == u && e.v == v) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({u},{v})")));
            }
            out.push(Edge { u, v, weight: w });
        }
        Ok(Self {
            n_vertices,
            edges: out,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Total weight of edges whose endpoints carry different spins.
    pub fn cut_value(&self, spins: &[i8]) -> f64 {
        self.edges
            .iter()
            .filter(|e| spins[e.u] != spins[e.v])
            .map(|e| e.weight)
            .sum()
    }

    /// Cut value of a basis index (bit `q` set means vertex `q` is on the `-1` side).
    pub fn cut_of_index(&self, index: usize) -> f64 {
        self.edges
            .iter()
            .filter(|e| (index >> e.u ^ index >> e.v) & 1 == 1)
            .map(|e| e.weight)
            .sum()
    }

    /// Adjacency lists sorted by neighbor index.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        adj.iter_mut().for_each(|a| a.sort_unstable());
        adj
    }
}

/// Spins in `{-1, +1}`; entry 0 is the auxiliary vertex for reduced graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinAssignment(Vec<i8>);

impl SpinAssignment {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(format!("spin value {bad} not in {{-1, +1}}")));
        }
        Ok(Self(spins))
    }

    /// Spins of a computational basis state: `|0>` is `+1`, `|1>` is `-1`.
    pub fn from_index(index: usize, n: usize) -> Self {
        Self((0..n).map(|q| if index >> q & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// QUBO over `n` variables to a Max-Cut graph on `n + 1` vertices. QUBO
/// variable `k` becomes vertex `k + 1`; vertex 0 is auxiliary.
pub fn qubo_to_maxcut(q: &Qubo) -> Result<WeightedGraph> {
    q.validate()?;
    let n = q.n_vars;
    // full matrix with the linear terms on the diagonal
    let mut mat = vec![vec![0.0; n]; n];
    for (k, &l) in q.linear.iter().enumerate() {
        mat[k][k] = l;
    }
    for (&(k, l), &c) in &q.quadratic {
        mat[k][l] = c;
    }
    let mut edges = Vec::new();
    for k in 0..n {
        let w: f64 = (0..n).map(|j| mat[k][j] + mat[j][k]).sum();
        edges.push((0, k + 1, AUX_EDGE_SIGN * w));
    }
    for k in 0..n {
        for j in k + 1..n {
            edges.push((k + 1, j + 1, mat[k][j] + mat[j][k]));
        }
    }
    edges.retain(|&(_, _, w)| w != 0.0);
    WeightedGraph::new(n + 1, edges)
}

/// `x_k = 1` iff the edge between the auxiliary vertex and vertex `k + 1` is cut.
pub fn decode_maxcut_solution(graph: &WeightedGraph, spins: &SpinAssignment) -> Result<Vec<bool>> {
    check_len("spin assignment", graph.n_vertices(), spins.len())?;
    let s = spins.as_slice();
    Ok(s[1..].iter().map(|&sk| sk != s[0]).collect())
}

/// Same decoding from a basis index over the graph's qubits.
pub fn decode_maxcut_index(graph: &WeightedGraph, index: usize) -> Vec<bool> {
    (1..graph.n_vertices())
        .map(|k| (index ^ index >> k) & 1 == 1)
        .collect()
}

/// `H = sum_{(u,v)} w_uv (Z_u Z_v - 1) / 2`, whose basis energies are `-cut`.
pub fn maxcut_hamiltonian(graph: &WeightedGraph) -> IsingHamiltonian {
    let mut h = IsingHamiltonian::zero(graph.n_vertices());
    for e in graph.edges() {
        h.add_coupling(e.u, e.v, e.weight / 2.0);
        h.offset -= e.weight / 2.0;
    }
    h
}
