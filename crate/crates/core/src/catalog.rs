//! Built-in graphs, realizations, states and toy theories.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::graph::{build_graph, KsGraph, Vertex};
use crate::ontology::OntologicalModel;
use crate::operational::{from_quantum, Joint, Measurement, MeasurementSetup, OperationalTheory};
use crate::quantum::DensityOperator;
use crate::realization::Realization;

fn vertices(pairs: &[(&str, &str)]) -> Vec<Vertex> {
    pairs
        .iter()
        .map(|&(label, op)| Vertex::new(label, op.parse().expect("catalog operator")))
        .collect()
}

pub const PM_LABELS: [&str; 9] = ["a", "b", "c", "d", "e", "f", "g", "h", "i"];

/// The 3×3 square: rows, then columns; the third column multiplies to −I.
pub fn peres_mermin_graph() -> KsGraph {
    let v = vertices(&[
        ("a", "ZI"),
        ("b", "IZ"),
        ("c", "ZZ"),
        ("d", "IX"),
        ("e", "XI"),
        ("f", "XX"),
        ("g", "ZX"),
        ("h", "XZ"),
        ("i", "YY"),
    ]);
    let edges = vec![
        vec![0, 1, 2],
        vec![3, 4, 5],
        vec![6, 7, 8],
        vec![0, 3, 6],
        vec![1, 4, 7],
        vec![2, 5, 8],
    ];
    build_graph(v, Some(edges)).expect("Peres-Mermin square")
}

/// Three-qubit star: four edges through the single-qubit observables, then
/// the horizontal edge of three-qubit observables, which multiplies to −I.
pub fn ghz_graph() -> KsGraph {
    let words = ["YII", "XXX", "YYX", "YXY", "XYY", "IIX", "IIY", "XII", "IYI", "IXI"];
    let v: Vec<(&str, &str)> = words.iter().map(|w| (*w, *w)).collect();
    let idx = |w: &str| words.iter().position(|x| *x == w).unwrap();
    let edge = |ws: [&str; 4]| ws.iter().map(|w| idx(w)).collect::<Vec<_>>();
    let edges = vec![
        edge(["XXX", "XII", "IXI", "IIX"]),
        edge(["YYX", "YII", "IYI", "IIX"]),
        edge(["YXY", "YII", "IXI", "IIY"]),
        edge(["XYY", "XII", "IYI", "IIY"]),
        edge(["XXX", "YYX", "YXY", "XYY"]),
    ];
    build_graph(vertices(&v), Some(edges)).expect("GHZ star")
}

pub fn single_edge_graph() -> KsGraph {
    build_graph(vertices(&[("ZI", "ZI"), ("IZ", "IZ"), ("ZZ", "ZZ")]), None).expect("single edge")
}

/// Each vertex its own measurement; rows and columns comeasurable.
pub fn pm_full_realization() -> Realization {
    Realization::unique_from_labels(
        PM_LABELS.iter().map(|s| s.to_string()).collect(),
        &[
            vec!["a", "b", "c"],
            vec!["d", "e", "f"],
            vec!["g", "h", "i"],
            vec!["a", "d", "g"],
            vec!["b", "e", "h"],
            vec!["c", "f", "i"],
        ],
    )
    .expect("valid realization")
}

/// Each vertex its own measurement; only the first two rows and columns are
/// comeasurable, as with spin measurements on a pair of spin-1/2 particles.
pub fn pm_spin_realization() -> Realization {
    Realization::unique_from_labels(
        PM_LABELS.iter().map(|s| s.to_string()).collect(),
        &[
            vec!["a", "b", "c"],
            vec!["d", "e", "f"],
            vec!["a", "d", "g"],
            vec!["b", "e", "h"],
        ],
    )
    .expect("valid realization")
}

/// Six measurements, one per row and column; each vertex is read off both
/// its row and its column measurement.
pub fn pm_six_realization() -> Realization {
    let assoc: Vec<Vec<&str>> = (0..9)
        .map(|v| vec![["r1", "r2", "r3"][v / 3], ["c1", "c2", "c3"][v % 3]])
        .collect();
    Realization::from_lists(&assoc, &[]).expect("valid realization")
}

/// One measurement per vertex; the four edges through single-qubit
/// observables are comeasurable, the horizontal edge is not.
pub fn ghz_standard_realization() -> Realization {
    let g = ghz_graph();
    let labels: Vec<String> = g.vertices().iter().map(|v| v.label.clone()).collect();
    let edge_sets: Vec<Vec<&str>> = (0..4).map(|e| g.edge_labels(e)).collect();
    Realization::unique_from_labels(labels.clone(), &edge_sets).expect("valid realization")
}

/// Like [`ghz_standard_realization`] with the horizontal edge comeasurable too.
pub fn ghz_full_realization() -> Realization {
    let g = ghz_graph();
    let labels: Vec<String> = g.vertices().iter().map(|v| v.label.clone()).collect();
    let edge_sets: Vec<Vec<&str>> = (0..5).map(|e| g.edge_labels(e)).collect();
    Realization::unique_from_labels(labels.clone(), &edge_sets).expect("valid realization")
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn pm_states() -> Vec<(String, DensityOperator)> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        ("maximally-mixed".into(), DensityOperator::maximally_mixed(4)),
        (
            "zero-zero".into(),
            DensityOperator::from_state_vector(&[c(1.0), c(0.0), c(0.0), c(0.0)]).expect("state"),
        ),
        (
            "plus-zero".into(),
            DensityOperator::from_state_vector(&[c(h), c(0.0), c(h), c(0.0)]).expect("state"),
        ),
    ]
}

pub fn ghz_states() -> Vec<(String, DensityOperator)> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut ghz = vec![c(0.0); 8];
    ghz[0] = c(h);
    ghz[7] = c(h);
    vec![
        ("maximally-mixed".into(), DensityOperator::maximally_mixed(8)),
        ("ghz".into(), DensityOperator::from_state_vector(&ghz).expect("state")),
    ]
}

/// Born-rule theory of the square with rows and columns as joint measurements.
pub fn pm_theory() -> OperationalTheory {
    from_quantum(&peres_mermin_graph(), &pm_states(), &pm_full_realization()).expect("PM theory")
}

pub fn ghz_theory() -> OperationalTheory {
    from_quantum(&ghz_graph(), &ghz_states(), &ghz_standard_realization()).expect("GHZ theory")
}

/// Colour and size of a ball drawn from a box, measured alone or together.
pub fn box_setup() -> MeasurementSetup {
    MeasurementSetup::from_labels(
        vec![
            Measurement::with_outcomes("color", &[("black", 1), ("white", -1)]),
            Measurement::with_outcomes("size", &[("big", 1), ("small", -1)]),
        ],
        &[vec!["color", "size"]],
    )
    .expect("box setup")
}

fn box_preparations() -> Vec<String> {
    vec!["r1".into(), "r2".into()]
}

/// Black balls are big and white balls small.
pub fn box_m1_model() -> OntologicalModel {
    OntologicalModel::deterministic(
        box_setup(),
        box_preparations(),
        vec![("black-big".into(), vec![0, 0]), ("white-small".into(), vec![1, 1])],
        vec![vec![0.3, 0.7], vec![0.8, 0.2]],
    )
    .expect("M1")
}

pub fn box_m1_theory() -> OperationalTheory {
    box_m1_model().induced_theory(false).expect("M1 theory")
}

/// All four kinds of ball, with black-small and white-big equally likely in
/// every preparation, so "black" and "big" are operationally equivalent.
pub fn box_m2_model() -> OntologicalModel {
    OntologicalModel::deterministic(
        box_setup(),
        box_preparations(),
        vec![
            ("black-big".into(), vec![0, 0]),
            ("black-small".into(), vec![0, 1]),
            ("white-big".into(), vec![1, 0]),
            ("white-small".into(), vec![1, 1]),
        ],
        vec![vec![0.4, 0.1, 0.1, 0.4], vec![0.1, 0.3, 0.3, 0.3]],
    )
    .expect("M2")
}

pub fn box_m2_theory() -> OperationalTheory {
    box_m2_model().induced_theory(false).expect("M2 theory")
}

/// Like M1, but measuring colour and size together reports the opposite ball.
pub fn box_m3_model() -> OntologicalModel {
    let joint = Joint::new(vec![0, 1]);
    box_m1_model()
        .with_response(&joint, 0, vec![0.0, 0.0, 0.0, 1.0])
        .and_then(|m| m.with_response(&joint, 1, vec![1.0, 0.0, 0.0, 0.0]))
        .expect("M3")
}

/// Every family member tabulated, so the disturbance is visible.
pub fn box_m3_theory() -> OperationalTheory {
    box_m3_model().induced_theory(true).expect("M3 theory")
}

/// A soldier shoots better when not also walking a tightrope.
pub fn army_theory() -> OperationalTheory {
    let setup = MeasurementSetup::from_labels(
        vec![
            Measurement::with_outcomes("shooting", &[("hit", 1), ("miss", -1)]),
            Measurement::with_outcomes("tightrope", &[("cross", 1), ("fall", -1)]),
        ],
        &[vec!["shooting", "tightrope"]],
    )
    .expect("army setup");
    let both = Joint::new(vec![0, 1]);
    let shooting = Joint::new(vec![0]);
    OperationalTheory::new(
        setup,
        vec!["soldier".into()],
        BTreeMap::from([(both, vec![vec![0.4, 0.2, 0.3, 0.1]]), (shooting, vec![vec![0.9, 0.1]])]),
    )
    .expect("army theory")
}
