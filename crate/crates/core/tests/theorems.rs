mod common;

use std::time::Instant;

use num_rational::Rational64;

use common::{brute_force_assignments, oracle_matrix, oracle_projection, signs};
use ks_core::catalog;
use ks_core::graph::{admissible_tuples, all_sign_tuples, search_assignments, SearchConfig};
use ks_core::matrix::{ComplexMatrix, GaussRational};
use ks_core::ontology::{min_violation_fraction, search_ncvd, DEFAULT_BASIC_CAP};
use ks_core::operational::from_quantum;
use ks_core::pauli::{edge_product, Sign};
use ks_core::quantum::joint_projection;

#[test]
fn peres_mermin_has_no_value_assignment() {
    let pm = catalog::peres_mermin_graph();
    let start = Instant::now();
    let verdict = search_assignments(&pm, &SearchConfig::default()).unwrap();
    assert!(start.elapsed().as_secs_f64() < 1.0);
    assert!(!verdict.satisfiable);
    assert!(verdict.certificate.is_some());
    assert!(brute_force_assignments(&pm).is_empty());
}

#[test]
fn ghz_has_no_value_assignment() {
    let ghz = catalog::ghz_graph();
    let verdict = search_assignments(&ghz, &SearchConfig::default()).unwrap();
    assert!(!verdict.satisfiable);
    let cert = verdict.certificate.unwrap();
    assert_eq!(cert.incidences, vec![2; 10]);
    assert_eq!(cert.sign_product, Sign::Minus);
    assert!(brute_force_assignments(&ghz).is_empty());
}

#[test]
fn single_edge_search_matches_brute_force() {
    let g = catalog::single_edge_graph();
    let verdict = search_assignments(&g, &SearchConfig::default()).unwrap();
    let found: Vec<Vec<Sign>> = verdict.witnesses.iter().map(|w| w.values.clone()).collect();
    assert_eq!(found, brute_force_assignments(&g));
    assert_eq!(found.len(), 4);
    assert!(verdict.certificate.is_none());
}

#[test]
fn edge_signs_match_matrix_oracle() {
    let pm = catalog::peres_mermin_graph();
    assert_eq!(pm.edge_signs(), signs(&[1, 1, 1, 1, 1, -1]).as_slice());
    let ghz = catalog::ghz_graph();
    assert_eq!(ghz.edge_signs(), signs(&[1, 1, 1, 1, -1]).as_slice());
    for g in [pm, ghz] {
        for e in 0..g.edges().len() {
            let ops = g.edge_operators(e);
            let product = ops
                .iter()
                .fold(ComplexMatrix::identity(1 << g.num_qubits()), |acc, p| &acc * &oracle_matrix(p));
            let expected = ComplexMatrix::identity(product.dim())
                .scale(GaussRational::from_integers(g.edge_signs()[e].value() as i64, 0));
            assert_eq!(product, expected);
            assert_eq!(edge_product(&ops).unwrap(), g.edge_signs()[e]);
        }
    }
}

#[test]
fn joint_projection_vanishes_exactly_off_support() {
    let pm = catalog::peres_mermin_graph();
    for e in 0..pm.edges().len() {
        let ops = pm.edge_operators(e);
        let admissible = admissible_tuples(&pm, e).unwrap();
        assert_eq!(admissible.len(), 4);
        for tuple in all_sign_tuples(3) {
            let oracle = ops
                .iter()
                .zip(&tuple)
                .fold(ComplexMatrix::identity(4), |acc, (p, &s)| &acc * &oracle_projection(p, s));
            let proj = joint_projection(&ops, &tuple).unwrap();
            assert_eq!(proj, oracle);
            assert_eq!(proj.is_zero(), !admissible.contains(&tuple), "edge {e} tuple {tuple:?}");
        }
    }
}

#[test]
fn pm_theory_has_no_ncvd_model() {
    let theory = catalog::pm_theory();
    assert_eq!(theory.setup().basics().len(), 9);
    let result = search_ncvd(&theory, DEFAULT_BASIC_CAP).unwrap();
    assert!(!result.satisfiable());
    let fraction = min_violation_fraction(&theory, DEFAULT_BASIC_CAP).unwrap();
    assert_eq!(fraction.fraction(), Rational64::new(1, 6));
    assert_eq!(fraction.total, 6);
}

#[test]
fn ghz_full_theory_violation_fraction() {
    let theory = from_quantum(&catalog::ghz_graph(), &catalog::ghz_states(), &catalog::ghz_full_realization()).unwrap();
    assert!(!search_ncvd(&theory, DEFAULT_BASIC_CAP).unwrap().satisfiable());
    assert_eq!(
        min_violation_fraction(&theory, DEFAULT_BASIC_CAP).unwrap().fraction(),
        Rational64::new(1, 5)
    );
}

/// Without the horizontal joint the remaining four hyperedges are satisfiable.
#[test]
fn ghz_standard_theory_alone_admits_ncvd_model() {
    let theory = catalog::ghz_theory();
    let result = search_ncvd(&theory, DEFAULT_BASIC_CAP).unwrap();
    assert!(result.satisfiable());
    let model = result.model.unwrap();
    assert!(model.is_value_definite());
    assert!(model.is_noncontextual().holds);
    assert!(model.factorizes().holds);
}
