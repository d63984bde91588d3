use ks_core::catalog;
use ks_core::graph::admissible_tuples;
use ks_core::operational::from_quantum;
use ks_core::pauli::Sign;
use ks_core::quantum::{common_eigenbasis, is_operational_eigenstate, projector_state};
use ks_core::realization::{
    classify_type, collapse_edge, lemma_check, run_type2_argument, ArgumentKind, LemmaVerdict, Type2Options,
};

#[test]
fn spin_square_is_type_three_on_third_row_and_column() {
    let pm = catalog::peres_mermin_graph();
    let t = classify_type(&pm, &catalog::pm_spin_realization()).unwrap();
    assert_eq!(t.kind, ArgumentKind::III);
    let flagged: Vec<Vec<&str>> = t.non_comeasurable_edges.iter().map(|&e| pm.edge_labels(e)).collect();
    assert_eq!(flagged, vec![vec!["g", "h", "i"], vec!["c", "f", "i"]]);
}

#[test]
fn ghz_is_type_two_on_horizontal_edge() {
    let ghz = catalog::ghz_graph();
    let t = classify_type(&ghz, &catalog::ghz_standard_realization()).unwrap();
    assert_eq!(t.kind, ArgumentKind::II);
    assert_eq!(t.non_comeasurable_edges.len(), 1);
    assert_eq!(ghz.edge_labels(t.non_comeasurable_edges[0]), vec!["XXX", "YYX", "YXY", "XYY"]);
}

#[test]
fn eigenstate_argument_rules_out_ncvd_for_every_tuple() {
    let ghz = catalog::ghz_graph();
    let r = catalog::ghz_standard_realization();
    let tuples = admissible_tuples(&ghz, 4).unwrap();
    assert_eq!(tuples.len(), 8);
    for tuple in tuples {
        assert_eq!(Sign::product(tuple.iter().copied()), Sign::Minus);
        let report = run_type2_argument(&ghz, &r, &tuple, Type2Options::default()).unwrap();
        assert!(!report.satisfiable, "{tuple:?}");
        assert_eq!(report.witness_count, 0);
        assert!(report.eigenstate.unwrap().max_deviation <= 1e-10);
        let control = run_type2_argument(&ghz, &r, &tuple, Type2Options { flip_sign: true, cap: None }).unwrap();
        assert!(control.satisfiable, "control {tuple:?}");
        assert!(control.control);
        let pinned_product = Sign::product(control.pinned.values().copied());
        assert_eq!(pinned_product, Sign::Plus);
    }
}

#[test]
fn horizontal_eigenstates_are_operational_eigenstates() {
    let ghz = catalog::ghz_graph();
    let ops = ghz.edge_operators(4);
    let basis = common_eigenbasis(&ops).unwrap();
    assert_eq!(basis.len(), 8);
    for v in basis {
        let rho = projector_state(&v.vector).unwrap();
        assert!(is_operational_eigenstate(&rho, &ops).unwrap());
        let theory = from_quantum(&ghz, &[("psi".into(), rho)], &catalog::ghz_standard_realization()).unwrap();
        for (k, label) in ghz.edge_labels(4).iter().enumerate() {
            let j = theory.setup().joint(&[label]).unwrap();
            let expected = if v.eigenvalues[k] == Sign::Plus { 0 } else { 1 };
            assert!((theory.marginal(&j, &[expected], 0).unwrap() - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn collapsing_the_horizontal_edge_makes_the_realization_non_unique() {
    let ghz = catalog::ghz_graph();
    let r = catalog::ghz_standard_realization();
    let c = collapse_edge(&ghz, &r, 4).unwrap();
    assert!(c.added);
    assert_eq!(c.multiply_associated.len(), 4);
    assert!(!c.realization.is_unique());
    let tags: std::collections::BTreeSet<&str> = ghz.edges()[4]
        .iter()
        .map(|&v| c.realization.function_tag(v, &c.measurement).unwrap())
        .collect();
    assert_eq!(tags.len(), 4);
    assert_eq!(classify_type(&ghz, &c.realization).unwrap().kind, ArgumentKind::I);
    let lemma = lemma_check(&ghz, &c.realization).unwrap();
    assert!(lemma.hyperedge_based);
    assert_ne!(lemma.verdict, LemmaVerdict::CounterexampleCandidate);
}
