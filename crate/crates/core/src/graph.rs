//! Kochen-Specker hypergraphs and their FUNC-constrained value assignments.
//!
//! Vertices carry ±1-valued Pauli observables; every hyperedge is a mutually
//! commuting set whose ordered product is `±I`. A value assignment maps every
//! vertex to ±1 and is admissible when, on every hyperedge, the product of the
//! assigned values equals the edge sign.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{edge_product, PauliError, PauliString, Sign};

/// Default upper bound on the number of vertices for exhaustive search.
pub const DEFAULT_VERTEX_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("a graph needs at least two vertices")]
    TooFewVertices,
    #[error("vertex {vertex} ({label}) is not hermitian ±1-valued: {operator}")]
    InvalidObservable {
        vertex: usize,
        label: String,
        operator: PauliString,
    },
    #[error("edge {edge} references unknown vertex {vertex}")]
    UnknownVertex { edge: usize, vertex: usize },
    #[error("edge {edge} has fewer than two vertices")]
    DegenerateEdge { edge: usize },
    #[error("edge {edge}: {source}")]
    InvalidEdge { edge: usize, source: PauliError },
    #[error("vertex {vertex} ({label}) lies on no hyperedge")]
    IsolatedVertex { vertex: usize, label: String },
    #[error("edge index {0} out of range")]
    EdgeIndex(usize),
    #[error("{count} vertices exceed the search cap of {cap}")]
    VertexCap { count: usize, cap: usize },
    #[error("pinned values cover {got} vertices, graph has {expected}")]
    PinLength { got: usize, expected: usize },
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub label: String,
    pub operator: PauliString,
}

impl Vertex {
    pub fn new(label: impl Into<String>, operator: PauliString) -> Self {
        Self {
            label: label.into(),
            operator,
        }
    }
}

/// A validated KS hypergraph. Construct with [`build_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KsGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Vec<usize>>,
    signs: Vec<Sign>,
}

impl KsGraph {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge_signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.vertices[0].operator.num_qubits()
    }

    pub fn edge_operators(&self, edge: usize) -> Vec<PauliString> {
        self.edges[edge]
            .iter()
            .map(|&v| self.vertices[v].operator.clone())
            .collect()
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.label == label)
    }

    pub fn edge_labels(&self, edge: usize) -> Vec<&str> {
        self.edges[edge]
            .iter()
            .map(|&v| self.vertices[v].label.as_str())
            .collect()
    }

    /// Number of hyperedges through each vertex.
    pub fn incidences(&self) -> Vec<usize> {
        let mut counts = vec![0; self.vertices.len()];
        for edge in &self.edges {
            for &v in edge {
                counts[v] += 1;
            }
        }
        counts
    }

    /// Whether `values` satisfies the product constraint on every edge.
    pub fn satisfies_all(&self, values: &[Sign]) -> bool {
        self.edges
            .iter()
            .zip(&self.signs)
            .all(|(edge, &sign)| Sign::product(edge.iter().map(|&v| values[v])) == sign)
    }
}

/// ±1 value for every vertex, indexed like the graph's vertex list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ValueAssignment {
    pub values: Vec<Sign>,
}

/// UNSAT proof by squaring: each vertex lies on an even number of edges, so the
/// product of all edge constraints is identically +1, while the product of the
/// edge signs is −1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCertificate {
    pub incidences: Vec<usize>,
    pub sign_product: Sign,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremVerdict {
    pub satisfiable: bool,
    pub witnesses: Vec<ValueAssignment>,
    pub certificate: Option<ParityCertificate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_vertices: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_vertices: DEFAULT_VERTEX_CAP,
        }
    }
}

/// All maximal cliques (size ≥ 2) of the pairwise commutation graph, each
/// sorted, listed in lexicographic order.
pub fn derive_hyperedges(operators: &[PauliString]) -> Result<Vec<Vec<usize>>, PauliError> {
    let n = operators.len();
    let mut adjacency = vec![vec![false; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let c = operators[a].commutes(&operators[b])?;
            adjacency[a][b] = c;
            adjacency[b][a] = c;
        }
    }
    let mut cliques = Vec::new();
    bron_kerbosch(
        &adjacency,
        &mut Vec::new(),
        (0..n).collect(),
        BTreeSet::new(),
        &mut cliques,
    );
    let mut cliques: Vec<Vec<usize>> = cliques.into_iter().filter(|c| c.len() >= 2).collect();
    for c in &mut cliques {
        c.sort_unstable();
    }
    cliques.sort();
    Ok(cliques)
}

fn bron_kerbosch(
    adj: &[Vec<bool>],
    current: &mut Vec<usize>,
    mut candidates: BTreeSet<usize>,
    mut excluded: BTreeSet<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if candidates.is_empty() {
        if excluded.is_empty() {
            out.push(current.clone());
        }
        return;
    }
    let pivot = *candidates
        .iter()
        .chain(&excluded)
        .max_by_key(|&&u| candidates.iter().filter(|&&v| adj[u][v]).count())
        .expect("candidates non-empty");
    let todo: Vec<usize> = candidates.iter().copied().filter(|&v| !adj[pivot][v]).collect();
    for v in todo {
        let next_candidates = candidates.iter().copied().filter(|&u| adj[v][u]).collect();
        let next_excluded = excluded.iter().copied().filter(|&u| adj[v][u]).collect();
        current.push(v);
        bron_kerbosch(adj, current, next_candidates, next_excluded, out);
        current.pop();
        candidates.remove(&v);
        excluded.insert(v);
    }
}

/// Validates vertices and hyperedges and computes the edge signs. When
/// `hyperedges` is `None`, [`derive_hyperedges`] supplies them.
pub fn build_graph(vertices: Vec<Vertex>, hyperedges: Option<Vec<Vec<usize>>>) -> Result<KsGraph, GraphError> {
    if vertices.len() < 2 {
        return Err(GraphError::TooFewVertices);
    }
    let n_qubits = vertices[0].operator.num_qubits();
    for (k, v) in vertices.iter().enumerate() {
        if v.operator.num_qubits() != n_qubits {
            return Err(PauliError::LengthMismatch {
                left: n_qubits,
                right: v.operator.num_qubits(),
            }
            .into());
        }
        if !v.operator.is_hermitian() || v.operator.is_identity_word() {
            return Err(GraphError::InvalidObservable {
                vertex: k,
                label: v.label.clone(),
                operator: v.operator.clone(),
            });
        }
    }
    let edges = match hyperedges {
        Some(edges) => edges,
        None => {
            let ops: Vec<PauliString> = vertices.iter().map(|v| v.operator.clone()).collect();
            derive_hyperedges(&ops)?
        }
    };
    let mut normalized = Vec::with_capacity(edges.len());
    let mut signs = Vec::with_capacity(edges.len());
    for (e, edge) in edges.into_iter().enumerate() {
        let members: BTreeSet<usize> = edge.iter().copied().collect();
        if members.len() < 2 {
            return Err(GraphError::DegenerateEdge { edge: e });
        }
        if let Some(&bad) = members.iter().find(|&&v| v >= vertices.len()) {
            return Err(GraphError::UnknownVertex { edge: e, vertex: bad });
        }
        let members: Vec<usize> = members.into_iter().collect();
        let ops: Vec<PauliString> = members.iter().map(|&v| vertices[v].operator.clone()).collect();
        let sign = edge_product(&ops).map_err(|source| GraphError::InvalidEdge { edge: e, source })?;
        normalized.push(members);
        signs.push(sign);
    }
    let graph = KsGraph {
        vertices,
        edges: normalized,
        signs,
    };
    if let Some(v) = graph.incidences().iter().position(|&c| c == 0) {
        return Err(GraphError::IsolatedVertex {
            vertex: v,
            label: graph.vertices[v].label.clone(),
        });
    }
    Ok(graph)
}

/// Every ±1 tuple on the edge whose product equals the edge sign, in
/// lexicographic order with +1 before −1.
pub fn admissible_tuples(graph: &KsGraph, edge: usize) -> Result<Vec<Vec<Sign>>, GraphError> {
    let members = graph.edges.get(edge).ok_or(GraphError::EdgeIndex(edge))?;
    let sign = graph.signs[edge];
    Ok(all_sign_tuples(members.len())
        .into_iter()
        .filter(|t| Sign::product(t.iter().copied()) == sign)
        .collect())
}

/// All of `{+1, −1}^k` in lexicographic order.
pub fn all_sign_tuples(k: usize) -> Vec<Vec<Sign>> {
    (0..1usize << k)
        .map(|bits| {
            (0..k)
                .map(|pos| {
                    if bits >> (k - 1 - pos) & 1 == 0 {
                        Sign::Plus
                    } else {
                        Sign::Minus
                    }
                })
                .collect()
        })
        .collect()
}

/// Exhaustive search for FUNC-respecting value assignments.
pub fn search_assignments(graph: &KsGraph, config: &SearchConfig) -> Result<TheoremVerdict, GraphError> {
    search_assignments_pinned(graph, &vec![None; graph.num_vertices()], config)
}

/// Like [`search_assignments`], with some vertices fixed in advance.
///
/// Depth-first over vertices in index order, +1 before −1; an edge is checked
/// as soon as its last vertex is assigned.
pub fn search_assignments_pinned(
    graph: &KsGraph,
    pins: &[Option<Sign>],
    config: &SearchConfig,
) -> Result<TheoremVerdict, GraphError> {
    let n = graph.num_vertices();
    if n > config.max_vertices {
        return Err(GraphError::VertexCap {
            count: n,
            cap: config.max_vertices,
        });
    }
    if pins.len() != n {
        return Err(GraphError::PinLength {
            got: pins.len(),
            expected: n,
        });
    }
    // edges grouped by their highest vertex, where they become decidable
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, edge) in graph.edges.iter().enumerate() {
        closing[*edge.iter().max().expect("non-empty edge")].push(e);
    }
    let mut values = vec![Sign::Plus; n];
    let mut witnesses = Vec::new();
    dfs(graph, pins, &closing, 0, &mut values, &mut witnesses);
    let certificate = parity_certificate(graph);
    debug_assert!(certificate.is_none() || witnesses.is_empty() || pins.iter().any(Option::is_some));
    Ok(TheoremVerdict {
        satisfiable: !witnesses.is_empty(),
        witnesses,
        certificate,
    })
}

fn dfs(
    graph: &KsGraph,
    pins: &[Option<Sign>],
    closing: &[Vec<usize>],
    vertex: usize,
    values: &mut Vec<Sign>,
    out: &mut Vec<ValueAssignment>,
) {
    if vertex == values.len() {
        out.push(ValueAssignment { values: values.clone() });
        return;
    }
    let choices: &[Sign] = match &pins[vertex] {
        Some(s) => std::slice::from_ref(s),
        None => &Sign::BOTH,
    };
    for &s in choices {
        values[vertex] = s;
        let consistent = closing[vertex].iter().all(|&e| {
            Sign::product(graph.edges[e].iter().map(|&v| values[v])) == graph.signs[e]
        });
        if consistent {
            dfs(graph, pins, closing, vertex + 1, values, out);
        }
    }
}

/// Returns the squaring certificate when every vertex has even incidence and
/// the product of all edge signs is −1.
pub fn parity_certificate(graph: &KsGraph) -> Option<ParityCertificate> {
    let incidences = graph.incidences();
    let sign_product = Sign::product(graph.signs.iter().copied());
    (incidences.iter().all(|c| c % 2 == 0) && sign_product == Sign::Minus).then_some(ParityCertificate {
        incidences,
        sign_product,
    })
}
