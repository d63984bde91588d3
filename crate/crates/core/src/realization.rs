//! Realizations of a KS graph by labelled measurements, the argument-type
//! classification, the uniqueness lemma, and the eigenstate argument for
//! graphs with a single non-comeasurable hyperedge.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{admissible_tuples, GraphError, KsGraph};
use crate::ontology::{search_ncvd_pinned, ModelError, DEFAULT_BASIC_CAP};
use crate::operational::{from_quantum, Joint, TheoryError, TABLE_TOLERANCE};
use crate::pauli::{format_tuple, PauliString, Sign};
use crate::quantum::{common_eigenbasis, projector_state, DensityOperator, QuantumError};

/// Function tag used when a vertex is read off a measurement directly.
pub const IDENTITY_TAG: &str = "id";
/// Largest measurement pool the lemma sweep accepts.
pub const MAX_SWEEP_POOL: usize = 12;
/// Largest graph the lemma sweep accepts.
pub const MAX_SWEEP_VERTICES: usize = 12;
/// One in this many antecedent-satisfying sweep realizations is re-checked
/// through the general [`lemma_check`].
const CROSS_CHECK_STRIDE: u64 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RealizationError {
    #[error("vertex {0} has no associated measurement")]
    EmptyAssociation(usize),
    #[error("empty measurement label")]
    EmptyLabel,
    #[error("comeasurable set mentions unknown measurement {0:?}")]
    UnknownMeasurement(String),
    #[error("realization covers {got} vertices, graph has {expected}")]
    Size { got: usize, expected: usize },
    #[error("no hyperedge {0}")]
    EdgeIndex(usize),
    #[error("argument needs a type II realization, this one is type {0}")]
    NotTypeII(ArgumentKind),
    #[error("tuple has {got} entries, hyperedge has {expected}")]
    TupleLength { got: usize, expected: usize },
    #[error("tuple {0} is not an admissible outcome of the hyperedge")]
    NotAdmissible(String),
    #[error("no common eigenvector with eigenvalues {0}")]
    NoEigenvector(String),
    #[error("measurement {measurement} is not deterministic in the eigenstate (deviation {deviation})")]
    NotDeterministic { measurement: String, deviation: f64 },
    #[error("measurement {0} realizes several vertices; pinning needs single-vertex measurements")]
    MultiVertexMeasurement(String),
    #[error("{what} = {got} exceeds the bound {cap}")]
    Bound { what: &'static str, got: usize, cap: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Which sets of measurements can be performed together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comeasurability {
    /// Generators of the family; every nonempty subset of a generator and
    /// every single measurement is comeasurable.
    Family(BTreeSet<BTreeSet<String>>),
    /// Comeasurable exactly when all realized operators commute.
    Commuting,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    assoc: Vec<BTreeSet<String>>,
    function_tags: BTreeMap<(usize, String), String>,
    comeasurable: Comeasurability,
}

impl Realization {
    /// Missing function tags default to [`IDENTITY_TAG`].
    pub fn new(
        assoc: Vec<BTreeSet<String>>,
        mut function_tags: BTreeMap<(usize, String), String>,
        comeasurable: Comeasurability,
    ) -> Result<Self, RealizationError> {
        for (v, set) in assoc.iter().enumerate() {
            if set.is_empty() {
                return Err(RealizationError::EmptyAssociation(v));
            }
            if set.iter().any(String::is_empty) {
                return Err(RealizationError::EmptyLabel);
            }
            for m in set {
                function_tags
                    .entry((v, m.clone()))
                    .or_insert_with(|| IDENTITY_TAG.to_string());
            }
        }
        let known: BTreeSet<&String> = assoc.iter().flatten().collect();
        if let Some(((_, m), _)) = function_tags.iter().find(|((v, m), _)| *v >= assoc.len() || !assoc[*v].contains(m)) {
            return Err(RealizationError::UnknownMeasurement(m.clone()));
        }
        if let Comeasurability::Family(generators) = &comeasurable {
            if let Some(m) = generators.iter().flatten().find(|m| !known.contains(m)) {
                return Err(RealizationError::UnknownMeasurement(m.clone()));
            }
        }
        Ok(Self {
            assoc,
            function_tags,
            comeasurable,
        })
    }

    /// Associations given as label lists, with a family generated by `generators`.
    pub fn from_lists(assoc: &[Vec<&str>], generators: &[Vec<&str>]) -> Result<Self, RealizationError> {
        Self::new(
            assoc.iter().map(|s| s.iter().map(|m| m.to_string()).collect()).collect(),
            BTreeMap::new(),
            Comeasurability::Family(
                generators
                    .iter()
                    .map(|g| g.iter().map(|m| m.to_string()).collect())
                    .collect(),
            ),
        )
    }

    /// One measurement per vertex, labelled `labels[v]`.
    pub fn unique_from_labels(labels: Vec<String>, generators: &[Vec<&str>]) -> Result<Self, RealizationError> {
        let lists: Vec<Vec<&str>> = labels.iter().map(|l| vec![l.as_str()]).collect();
        Self::from_lists(&lists, generators)
    }

    pub fn num_vertices(&self) -> usize {
        self.assoc.len()
    }

    pub fn associations(&self) -> &[BTreeSet<String>] {
        &self.assoc
    }

    pub fn function_tags(&self) -> &BTreeMap<(usize, String), String> {
        &self.function_tags
    }

    pub fn function_tag(&self, vertex: usize, measurement: &str) -> Option<&str> {
        self.function_tags
            .get(&(vertex, measurement.to_string()))
            .map(String::as_str)
    }

    pub fn comeasurability(&self) -> &Comeasurability {
        &self.comeasurable
    }

    /// Labels in order of first appearance along the vertex list.
    pub fn measurement_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for set in &self.assoc {
            for m in set {
                if !out.contains(m) {
                    out.push(m.clone());
                }
            }
        }
        out
    }

    /// Vertices whose association contains `measurement`.
    pub fn vertices_of(&self, measurement: &str) -> Vec<usize> {
        (0..self.assoc.len())
            .filter(|&v| self.assoc[v].contains(measurement))
            .collect()
    }

    fn realized_operators<'a>(&self, graph: &'a KsGraph, set: &BTreeSet<String>) -> Vec<&'a PauliString> {
        let vertices: BTreeSet<usize> = set.iter().flat_map(|m| self.vertices_of(m)).collect();
        vertices.into_iter().map(|v| &graph.vertices()[v].operator).collect()
    }

    fn operators_commute(&self, graph: &KsGraph, set: &BTreeSet<String>) -> bool {
        let ops = self.realized_operators(graph, set);
        ops.iter()
            .enumerate()
            .all(|(k, a)| ops[k + 1..].iter().all(|b| a.commutes(b).unwrap_or(false)))
    }

    pub fn is_comeasurable(&self, graph: &KsGraph, set: &BTreeSet<String>) -> bool {
        match &self.comeasurable {
            Comeasurability::Family(generators) => {
                set.len() <= 1 || generators.iter().any(|g| set.is_subset(g))
            }
            Comeasurability::Commuting => self.operators_commute(graph, set),
        }
    }

    /// Generators of the comeasurability family. For [`Comeasurability::Commuting`]
    /// these are the maximal sets of measurements with commuting operators.
    pub fn comeasurable_sets(&self, graph: &KsGraph) -> Vec<BTreeSet<String>> {
        match &self.comeasurable {
            Comeasurability::Family(generators) => generators.iter().cloned().collect(),
            Comeasurability::Commuting => {
                let labels = self.measurement_labels();
                let compatible = |a: usize, b: usize| {
                    self.operators_commute(graph, &BTreeSet::from([labels[a].clone(), labels[b].clone()]))
                };
                let n = labels.len();
                let adjacency: Vec<BTreeSet<usize>> = (0..n)
                    .map(|a| (0..n).filter(|&b| b != a && compatible(a, b)).collect())
                    .collect();
                let mut cliques = Vec::new();
                bron_kerbosch(&adjacency, BTreeSet::new(), (0..n).collect(), BTreeSet::new(), &mut cliques);
                cliques
                    .into_iter()
                    .map(|c| c.into_iter().map(|k| labels[k].clone()).collect())
                    .collect()
            }
        }
    }

    /// Every vertex carries exactly one measurement, and no two vertices share one.
    pub fn is_unique(&self) -> bool {
        self.is_singly_associated() && {
            let labels: BTreeSet<&String> = self.assoc.iter().flatten().collect();
            labels.len() == self.assoc.len()
        }
    }

    /// Every vertex carries exactly one measurement.
    pub fn is_singly_associated(&self) -> bool {
        self.assoc.iter().all(|s| s.len() == 1)
    }
}

fn bron_kerbosch(
    adjacency: &[BTreeSet<usize>],
    r: BTreeSet<usize>,
    mut p: BTreeSet<usize>,
    mut x: BTreeSet<usize>,
    out: &mut Vec<BTreeSet<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        out.push(r);
        return;
    }
    for v in p.clone() {
        let mut r2 = r.clone();
        r2.insert(v);
        let p2 = p.intersection(&adjacency[v]).copied().collect();
        let x2 = x.intersection(&adjacency[v]).copied().collect();
        bron_kerbosch(adjacency, r2, p2, x2, out);
        p.remove(&v);
        x.insert(v);
    }
}

fn check_size(graph: &KsGraph, r: &Realization) -> Result<(), RealizationError> {
    if r.num_vertices() != graph.num_vertices() {
        return Err(RealizationError::Size {
            got: r.num_vertices(),
            expected: graph.num_vertices(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperedgeBased {
    pub holds: bool,
    /// For each hyperedge, a measurement associated with all of its vertices.
    pub covering: Vec<Option<String>>,
}

impl HyperedgeBased {
    /// Hyperedges realized by a single measurement.
    pub fn edges(&self) -> Vec<usize> {
        (0..self.covering.len()).filter(|&e| self.covering[e].is_some()).collect()
    }

    pub fn every_edge(&self) -> bool {
        self.covering.iter().all(Option::is_some)
    }
}

/// Whether at least one hyperedge is realized by a single measurement, i.e.
/// some measurement is associated with all of its vertices.
pub fn is_hyperedge_based(graph: &KsGraph, r: &Realization) -> Result<HyperedgeBased, RealizationError> {
    check_size(graph, r)?;
    let covering: Vec<Option<String>> = graph
        .edges()
        .iter()
        .map(|edge| {
            r.assoc[edge[0]]
                .iter()
                .find(|m| edge.iter().all(|&v| r.assoc[v].contains(*m)))
                .cloned()
        })
        .collect();
    Ok(HyperedgeBased {
        holds: covering.iter().any(Option::is_some),
        covering,
    })
}

/// The distinct measurement sets obtained by picking one associated
/// measurement per vertex of `edge`.
pub fn edge_selections(r: &Realization, edge: &[usize]) -> BTreeSet<BTreeSet<String>> {
    let mut out = BTreeSet::from([BTreeSet::new()]);
    for &v in edge {
        out = out
            .into_iter()
            .flat_map(|partial: BTreeSet<String>| {
                r.assoc[v].iter().map(move |m| {
                    let mut next = partial.clone();
                    next.insert(m.clone());
                    next
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArgumentKind {
    I,
    II,
    III,
}

impl fmt::Display for ArgumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ArgumentKind::I => "I",
            ArgumentKind::II => "II",
            ArgumentKind::III => "III",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentType {
    pub kind: ArgumentKind,
    /// Hyperedges with no comeasurable selection of measurements.
    pub non_comeasurable_edges: Vec<usize>,
    /// Comeasurable hyperedges where only some selections are comeasurable.
    pub choice_edges: Vec<usize>,
}

/// Type I when every hyperedge is represented by a comeasurable set of
/// measurements, type II when exactly one is not, type III otherwise.
pub fn classify_type(graph: &KsGraph, r: &Realization) -> Result<ArgumentType, RealizationError> {
    check_size(graph, r)?;
    let mut non_comeasurable_edges = Vec::new();
    let mut choice_edges = Vec::new();
    for (e, edge) in graph.edges().iter().enumerate() {
        let selections = edge_selections(r, edge);
        let ok = selections.iter().filter(|s| r.is_comeasurable(graph, s)).count();
        if ok == 0 {
            non_comeasurable_edges.push(e);
        } else if ok < selections.len() {
            choice_edges.push(e);
        }
    }
    let kind = match non_comeasurable_edges.len() {
        0 => ArgumentKind::I,
        1 => ArgumentKind::II,
        _ => ArgumentKind::III,
    };
    Ok(ArgumentType {
        kind,
        non_comeasurable_edges,
        choice_edges,
    })
}

/// Whether the realization's comeasurability coincides with operator
/// commutation on every set of measurements.
pub fn comeasurable_iff_commuting(graph: &KsGraph, r: &Realization) -> bool {
    match &r.comeasurable {
        Comeasurability::Commuting => true,
        Comeasurability::Family(_) => {
            let labels = r.measurement_labels();
            if labels.len() > 20 {
                return false;
            }
            (1u64..(1u64 << labels.len())).all(|mask| {
                let set: BTreeSet<String> = labels
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, l)| l.clone())
                    .collect();
                r.is_comeasurable(graph, &set) == r.operators_commute(graph, &set)
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaVerdict {
    /// The hypotheses fail, so the lemma says nothing.
    Vacuous,
    /// Hypotheses hold and the realization is not unique.
    Holds,
    /// Hypotheses hold and the realization is unique.
    CounterexampleCandidate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LemmaWitness {
    /// A vertex on several hyperedges carries several measurements.
    MultiplyAssociated {
        vertex: String,
        measurements: Vec<String>,
        edges: Vec<usize>,
    },
    /// Distinct vertices share a measurement.
    SharedMeasurement { measurement: String, vertices: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub hyperedge_based: bool,
    pub comeasurable_iff_commuting: bool,
    pub every_edge_comeasurable: bool,
    pub unique: bool,
    pub singly_associated: bool,
    pub verdict: LemmaVerdict,
    /// The stronger reading: hypotheses imply some vertex has several measurements.
    pub strong_form_holds: bool,
    pub witness: Option<LemmaWitness>,
}

/// Checks that a hyperedge-based realization in which comeasurability means
/// commutation and every hyperedge is jointly measurable cannot be unique.
pub fn lemma_check(graph: &KsGraph, r: &Realization) -> Result<LemmaCheck, RealizationError> {
    let hyperedge_based = is_hyperedge_based(graph, r)?.holds;
    let iff = comeasurable_iff_commuting(graph, r);
    let every_edge_comeasurable = classify_type(graph, r)?.non_comeasurable_edges.is_empty();
    let antecedent = hyperedge_based && iff && every_edge_comeasurable;
    let unique = r.is_unique();
    let singly_associated = r.is_singly_associated();
    let verdict = match (antecedent, unique) {
        (false, _) => LemmaVerdict::Vacuous,
        (true, false) => LemmaVerdict::Holds,
        (true, true) => LemmaVerdict::CounterexampleCandidate,
    };
    let labels = |vs: Vec<usize>| vs.into_iter().map(|v| graph.vertices()[v].label.clone()).collect();
    let multiply = (0..r.num_vertices()).find(|&v| r.assoc[v].len() > 1).map(|v| LemmaWitness::MultiplyAssociated {
        vertex: graph.vertices()[v].label.clone(),
        measurements: r.assoc[v].iter().cloned().collect(),
        edges: (0..graph.edges().len()).filter(|&e| graph.edges()[e].contains(&v)).collect(),
    });
    let witness = multiply.or_else(|| {
        r.measurement_labels().into_iter().find_map(|m| {
            let vs = r.vertices_of(&m);
            (vs.len() > 1).then(|| LemmaWitness::SharedMeasurement {
                measurement: m,
                vertices: labels(vs),
            })
        })
    });
    Ok(LemmaCheck {
        hyperedge_based,
        comeasurable_iff_commuting: iff,
        every_edge_comeasurable,
        unique,
        singly_associated,
        verdict,
        strong_form_holds: !antecedent || !singly_associated,
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepBounds {
    /// Largest number of measurements in a realization.
    pub pool: usize,
    /// Largest number of measurements associated with one vertex.
    pub max_association: usize,
}

impl Default for SweepBounds {
    fn default() -> Self {
        Self {
            pool: MAX_SWEEP_POOL,
            max_association: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaSweep {
    /// Realizations visited.
    pub enumerated: u64,
    pub hyperedge_based: u64,
    /// Hyperedge-based realizations in which every hyperedge is comeasurable.
    pub antecedent_holds: u64,
    /// Antecedent holds and the realization is unique.
    pub unique: u64,
    /// Antecedent holds and every vertex has a single measurement.
    pub singly_associated: u64,
    /// First few realizations violating either reading, as association lists.
    pub counterexamples: Vec<Vec<Vec<String>>>,
}

/// Enumerates every realization within `bounds` in which each measurement
/// realizes a nonempty set of mutually commuting vertices and
/// comeasurability means commutation, and evaluates the lemma on each.
///
/// Measurements are identified by the vertex set they realize and taken as a
/// multiset, so relabelings are not counted twice. The per-realization
/// predicates work on vertex bitmasks; every singly associated realization
/// and a fixed sample of the others are re-checked through [`lemma_check`].
pub fn enumerate_lemma_sweep(graph: &KsGraph, bounds: SweepBounds) -> Result<LemmaSweep, RealizationError> {
    if bounds.pool > MAX_SWEEP_POOL {
        return Err(RealizationError::Bound {
            what: "pool",
            got: bounds.pool,
            cap: MAX_SWEEP_POOL,
        });
    }
    if graph.num_vertices() > MAX_SWEEP_VERTICES {
        return Err(RealizationError::Bound {
            what: "vertices",
            got: graph.num_vertices(),
            cap: MAX_SWEEP_VERTICES,
        });
    }
    let n = graph.num_vertices();
    let ops: Vec<&PauliString> = graph.vertices().iter().map(|v| &v.operator).collect();
    let commuting: Vec<bool> = (0..1usize << n)
        .map(|mask| {
            (0..n).filter(|a| mask >> a & 1 == 1).all(|a| {
                (a + 1..n)
                    .filter(|b| mask >> b & 1 == 1)
                    .all(|b| ops[a].commutes(ops[b]).unwrap_or(false))
            })
        })
        .collect();
    let cliques: Vec<usize> = (1..1usize << n).filter(|&m| commuting[m]).collect();
    let members: Vec<Vec<usize>> = cliques
        .iter()
        .map(|&c| (0..n).filter(|v| c >> v & 1 == 1).collect())
        .collect();
    let mut last_containing = vec![0; n];
    for (k, &c) in cliques.iter().enumerate() {
        for (v, last) in last_containing.iter_mut().enumerate() {
            if c >> v & 1 == 1 {
                *last = k;
            }
        }
    }
    let edges: Vec<usize> = graph
        .edges()
        .iter()
        .map(|e| e.iter().fold(0, |m, &v| m | 1 << v))
        .collect();
    let mut sweep = Sweep {
        graph,
        bounds,
        commuting: &commuting,
        cliques: &cliques,
        members: &members,
        last_containing: &last_containing,
        edges: &edges,
        chosen: Vec::new(),
        coverage: vec![0; n],
        result: LemmaSweep {
            enumerated: 0,
            hyperedge_based: 0,
            antecedent_holds: 0,
            unique: 0,
            singly_associated: 0,
            counterexamples: Vec::new(),
        },
    };
    sweep.clique(0)?;
    Ok(sweep.result)
}

struct Sweep<'a> {
    graph: &'a KsGraph,
    bounds: SweepBounds,
    commuting: &'a [bool],
    cliques: &'a [usize],
    members: &'a [Vec<usize>],
    last_containing: &'a [usize],
    edges: &'a [usize],
    chosen: Vec<usize>,
    coverage: Vec<usize>,
    result: LemmaSweep,
}

impl Sweep<'_> {
    /// Decides the multiplicity of clique `k`, then moves on.
    fn clique(&mut self, k: usize) -> Result<(), RealizationError> {
        if k == self.cliques.len() {
            return self.finish();
        }
        let mask = self.cliques[k];
        let members = &self.members[k];
        let mut added = 0;
        loop {
            // a vertex whose last clique has passed must be covered
            let covered = (0..self.coverage.len()).all(|v| self.last_containing[v] != k || self.coverage[v] >= 1);
            if covered {
                self.clique(k + 1)?;
            }
            if self.chosen.len() == self.bounds.pool
                || members.iter().any(|&v| self.coverage[v] >= self.bounds.max_association)
            {
                break;
            }
            for &v in members {
                self.coverage[v] += 1;
            }
            self.chosen.push(mask);
            added += 1;
        }
        for _ in 0..added {
            self.chosen.pop();
        }
        for &v in members {
            self.coverage[v] -= added;
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<(), RealizationError> {
        self.result.enumerated += 1;
        let hyperedge_based = self
            .edges
            .iter()
            .any(|&e| self.chosen.iter().any(|&c| c & e == e));
        if !hyperedge_based {
            return Ok(());
        }
        self.result.hyperedge_based += 1;
        let every_edge_comeasurable = self.edges.iter().all(|&e| self.edge_comeasurable(e));
        let singly_associated = self.coverage.iter().all(|&c| c == 1);
        if !every_edge_comeasurable && !singly_associated {
            return Ok(());
        }
        let unique = singly_associated && self.chosen.iter().all(|c| c.count_ones() == 1);
        if every_edge_comeasurable {
            self.result.antecedent_holds += 1;
            self.result.unique += u64::from(unique);
            self.result.singly_associated += u64::from(singly_associated);
        }
        let sampled = every_edge_comeasurable && self.result.antecedent_holds % CROSS_CHECK_STRIDE == 1;
        if !(singly_associated || sampled) {
            return Ok(());
        }
        let n = self.coverage.len();
        let mut assoc = vec![BTreeSet::new(); n];
        for (slot, &c) in self.chosen.iter().enumerate() {
            for (v, set) in assoc.iter_mut().enumerate() {
                if c >> v & 1 == 1 {
                    set.insert(format!("m{slot}"));
                }
            }
        }
        let r = Realization::new(assoc, BTreeMap::new(), Comeasurability::Commuting)?;
        let check = lemma_check(self.graph, &r)?;
        assert!(check.hyperedge_based);
        assert_eq!(check.every_edge_comeasurable, every_edge_comeasurable);
        assert_eq!((check.unique, check.singly_associated), (unique, singly_associated));
        let violates = check.verdict == LemmaVerdict::CounterexampleCandidate || !check.strong_form_holds;
        if violates && self.result.counterexamples.len() < 10 {
            self.result
                .counterexamples
                .push(r.assoc.iter().map(|s| s.iter().cloned().collect()).collect());
        }
        Ok(())
    }

    /// Some choice of one measurement per vertex of the edge realizes only
    /// commuting operators.
    fn edge_comeasurable(&self, edge: usize) -> bool {
        let mut unions = vec![0usize];
        for v in (0..self.coverage.len()).filter(|v| edge >> v & 1 == 1) {
            unions = unions
                .iter()
                .flat_map(|&u| self.chosen.iter().filter(move |&&c| c >> v & 1 == 1).map(move |&c| u | c))
                .collect();
            unions.sort_unstable();
            unions.dedup();
        }
        unions.iter().any(|&u| self.commuting[u])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenstateCheck {
    pub preparation: String,
    /// Largest distance of a pinned measurement's outcome probability from 0 or 1.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Type2Report {
    pub edge: usize,
    pub edge_vertices: Vec<String>,
    pub eigenvalues: Vec<Sign>,
    /// Sign-flipped control run: the pinned values violate the hyperedge's product rule.
    pub control: bool,
    pub pinned: BTreeMap<String, Sign>,
    pub eigenstate: Option<EigenstateCheck>,
    pub satisfiable: bool,
    pub witness_count: usize,
    pub witness: Option<BTreeMap<String, Sign>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Type2Options {
    /// Flip the last pinned value and skip the eigenstate check.
    pub flip_sign: bool,
    pub cap: Option<usize>,
}

/// The eigenstate argument for a type II realization.
///
/// The non-comeasurable hyperedge's operators still commute, so they share an
/// eigenvector for each admissible tuple. In that eigenstate every measurement
/// on the hyperedge is deterministic; pinning those values, an NCVD model
/// would still have to respect the support of every other (comeasurable)
/// hyperedge, which the exhaustive search rules out.
pub fn run_type2_argument(
    graph: &KsGraph,
    r: &Realization,
    tuple: &[Sign],
    options: Type2Options,
) -> Result<Type2Report, RealizationError> {
    let kind = classify_type(graph, r)?;
    if kind.kind != ArgumentKind::II {
        return Err(RealizationError::NotTypeII(kind.kind));
    }
    let e = kind.non_comeasurable_edges[0];
    let edge = &graph.edges()[e];
    if tuple.len() != edge.len() {
        return Err(RealizationError::TupleLength {
            got: tuple.len(),
            expected: edge.len(),
        });
    }
    if !admissible_tuples(graph, e)?.iter().any(|t| t == tuple) {
        return Err(RealizationError::NotAdmissible(format_tuple(tuple)));
    }
    let ops = graph.edge_operators(e);
    let psi = common_eigenbasis(&ops)?
        .into_iter()
        .find(|c| c.eigenvalues == tuple)
        .ok_or_else(|| RealizationError::NoEigenvector(format_tuple(tuple)))?;
    let dim = 1usize << graph.num_qubits();
    let states = vec![
        ("eigenstate".to_string(), projector_state(&psi.vector)?),
        ("maximally-mixed".to_string(), DensityOperator::maximally_mixed(dim)),
    ];
    let theory = from_quantum(graph, &states, r)?;
    let setup = theory.setup();

    let mut pinned_values = tuple.to_vec();
    if options.flip_sign {
        let last = pinned_values.len() - 1;
        pinned_values[last] = pinned_values[last].flip();
    }
    let mut pins = vec![None; setup.basics().len()];
    let mut pinned = BTreeMap::new();
    let mut max_deviation: f64 = 0.0;
    for (pos, &v) in edge.iter().enumerate() {
        for m in &r.assoc[v] {
            if r.vertices_of(m).len() != 1 {
                return Err(RealizationError::MultiVertexMeasurement(m.clone()));
            }
            let b = setup.basic_index(m).expect("measurement of the realization");
            let value = pinned_values[pos];
            pins[b] = Some(if value == Sign::Plus { 0 } else { 1 });
            pinned.insert(m.clone(), value);
            if !options.flip_sign {
                let joint = Joint::new(vec![b]);
                let expected = if tuple[pos] == Sign::Plus { 0 } else { 1 };
                let p = theory.marginal(&joint, &[expected], 0)?;
                max_deviation = max_deviation.max(1.0 - p);
                if !theory.eigenstate_preparations(&joint)?.contains(&0) || 1.0 - p > TABLE_TOLERANCE {
                    return Err(RealizationError::NotDeterministic {
                        measurement: m.clone(),
                        deviation: 1.0 - p,
                    });
                }
            }
        }
    }
    let search = search_ncvd_pinned(&theory, &pins, options.cap.unwrap_or(DEFAULT_BASIC_CAP))?;
    let witness = search.witnesses.first().map(|a| {
        a.iter()
            .enumerate()
            .map(|(b, &o)| (setup.basics()[b].label.clone(), if o == 0 { Sign::Plus } else { Sign::Minus }))
            .collect()
    });
    Ok(Type2Report {
        edge: e,
        edge_vertices: graph.edge_labels(e).iter().map(|s| s.to_string()).collect(),
        eigenvalues: tuple.to_vec(),
        control: options.flip_sign,
        pinned,
        eigenstate: (!options.flip_sign).then(|| EigenstateCheck {
            preparation: theory.preparations()[0].clone(),
            max_deviation,
        }),
        satisfiable: search.satisfiable(),
        witness_count: search.witnesses.len(),
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collapse {
    pub realization: Realization,
    /// Label of the measurement now covering the hyperedge.
    pub measurement: String,
    /// Whether a new measurement had to be added.
    pub added: bool,
    /// Vertices of the hyperedge that now carry more than one measurement.
    pub multiply_associated: Vec<usize>,
}

/// Realizes a hyperedge by a single measurement, keeping every existing
/// association. If some measurement already covers the hyperedge, the
/// realization is returned unchanged.
pub fn collapse_edge(graph: &KsGraph, r: &Realization, edge: usize) -> Result<Collapse, RealizationError> {
    check_size(graph, r)?;
    let members = graph.edges().get(edge).ok_or(RealizationError::EdgeIndex(edge))?;
    let multiply = |real: &Realization| members.iter().copied().filter(|&v| real.assoc[v].len() > 1).collect();
    if let Some(Some(m)) = is_hyperedge_based(graph, r)?.covering.get(edge) {
        return Ok(Collapse {
            realization: r.clone(),
            measurement: m.clone(),
            added: false,
            multiply_associated: multiply(r),
        });
    }
    let existing = r.measurement_labels();
    let mut label = format!("edge{edge}");
    let mut k = 2;
    while existing.contains(&label) {
        label = format!("edge{edge}#{k}");
        k += 1;
    }
    let mut assoc = r.assoc.clone();
    let mut tags = r.function_tags.clone();
    for &v in members {
        assoc[v].insert(label.clone());
        tags.insert((v, label.clone()), format!("component:{}", graph.vertices()[v].label));
    }
    let comeasurable = match &r.comeasurable {
        Comeasurability::Family(g) => {
            let mut g = g.clone();
            g.insert(BTreeSet::from([label.clone()]));
            Comeasurability::Family(g)
        }
        Comeasurability::Commuting => Comeasurability::Commuting,
    };
    let realization = Realization::new(assoc, tags, comeasurable)?;
    Ok(Collapse {
        multiply_associated: multiply(&realization),
        realization,
        measurement: label,
        added: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn pm_classifications() {
        let pm = catalog::peres_mermin_graph();
        let full = classify_type(&pm, &catalog::pm_full_realization()).unwrap();
        assert_eq!(full.kind, ArgumentKind::I);
        let spin = classify_type(&pm, &catalog::pm_spin_realization()).unwrap();
        assert_eq!(spin.kind, ArgumentKind::III);
        assert_eq!(spin.non_comeasurable_edges, vec![2, 5]);
        let six = classify_type(&pm, &catalog::pm_six_realization()).unwrap();
        assert_eq!(six.kind, ArgumentKind::I);
        assert_eq!(six.choice_edges.len(), 6);
    }

    #[test]
    fn ghz_standard_is_type_two_on_horizontal_edge() {
        let ghz = catalog::ghz_graph();
        let t = classify_type(&ghz, &catalog::ghz_standard_realization()).unwrap();
        assert_eq!(t.kind, ArgumentKind::II);
        assert_eq!(t.non_comeasurable_edges, vec![4]);
        assert_eq!(
            classify_type(&ghz, &catalog::ghz_full_realization()).unwrap().kind,
            ArgumentKind::I
        );
    }

    #[test]
    fn uniqueness_readings() {
        let pm = catalog::peres_mermin_graph();
        assert!(catalog::pm_full_realization().is_unique());
        let six = catalog::pm_six_realization();
        assert!(!six.is_unique());
        assert!(!six.is_singly_associated());
        let shared = Realization::from_lists(&[vec!["m"], vec!["m"]], &[]).unwrap();
        assert!(shared.is_singly_associated());
        assert!(!shared.is_unique());
        assert!(is_hyperedge_based(&pm, &six).unwrap().holds);
        assert!(!is_hyperedge_based(&pm, &catalog::pm_full_realization()).unwrap().holds);
    }

    #[test]
    fn lemma_on_fixtures() {
        let pm = catalog::peres_mermin_graph();
        let full = lemma_check(&pm, &catalog::pm_full_realization()).unwrap();
        assert_eq!(full.verdict, LemmaVerdict::Vacuous);
        let six = lemma_check(&pm, &catalog::pm_six_realization()).unwrap();
        assert!(six.hyperedge_based);
        assert!(six.every_edge_comeasurable);
        assert_eq!(six.verdict, LemmaVerdict::Holds);
        assert!(six.strong_form_holds);
        assert!(matches!(six.witness, Some(LemmaWitness::MultiplyAssociated { .. })));
    }

    #[test]
    fn sweep_bound_rejected() {
        let pm = catalog::peres_mermin_graph();
        let err = enumerate_lemma_sweep(
            &pm,
            SweepBounds {
                pool: 13,
                max_association: 2,
            },
        );
        assert!(matches!(err, Err(RealizationError::Bound { .. })));
    }

    #[test]
    fn collapse_adds_measurement_and_reports_multiplicity() {
        let pm = catalog::peres_mermin_graph();
        let full = catalog::pm_full_realization();
        let c = collapse_edge(&pm, &full, 0).unwrap();
        assert!(c.added);
        assert_eq!(c.multiply_associated, vec![0, 1, 2]);
        assert!(!c.realization.is_singly_associated());
        let again = collapse_edge(&pm, &c.realization, 0).unwrap();
        assert!(!again.added);
        assert_eq!(again.realization, c.realization);
        assert!(collapse_edge(&pm, &full, 6).is_err());
    }

    #[test]
    fn type2_requires_type_two() {
        let pm = catalog::peres_mermin_graph();
        let err = run_type2_argument(&pm, &catalog::pm_full_realization(), &[Sign::Plus; 3], Type2Options::default());
        assert!(matches!(err, Err(RealizationError::NotTypeII(ArgumentKind::I))));
    }

    #[test]
    fn type2_rejects_inadmissible_tuple() {
        let ghz = catalog::ghz_graph();
        let err = run_type2_argument(
            &ghz,
            &catalog::ghz_standard_realization(),
            &[Sign::Plus; 4],
            Type2Options::default(),
        );
        assert!(matches!(err, Err(RealizationError::NotAdmissible(_))));
    }
}
