//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use num_rational::Rational64;

use ks_core::graph::KsGraph;
use ks_core::matrix::{ComplexMatrix, GaussRational};
use ks_core::pauli::{Letter, PauliString, Phase, Sign};
use ks_core::realization::SweepBounds;

fn g(re: i64, im: i64) -> GaussRational {
    GaussRational::from_integers(re, im)
}

/// Pauli matrices written out entry by entry.
pub fn letter_matrix(l: Letter) -> ComplexMatrix {
    let entries = match l {
        Letter::I => vec![g(1, 0), g(0, 0), g(0, 0), g(1, 0)],
        Letter::X => vec![g(0, 0), g(1, 0), g(1, 0), g(0, 0)],
        Letter::Y => vec![g(0, 0), g(0, -1), g(0, 1), g(0, 0)],
        Letter::Z => vec![g(1, 0), g(0, 0), g(0, 0), g(-1, 0)],
    };
    ComplexMatrix::from_rows(2, entries)
}

pub fn phase_scalar(p: Phase) -> GaussRational {
    match p {
        Phase::PlusOne => g(1, 0),
        Phase::PlusI => g(0, 1),
        Phase::MinusOne => g(-1, 0),
        Phase::MinusI => g(0, -1),
    }
}

/// Matrix of a Pauli string built by explicit Kronecker products.
pub fn oracle_matrix(p: &PauliString) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(1);
    for &l in p.letters() {
        m = m.kron(&letter_matrix(l));
    }
    m.scale(phase_scalar(p.phase()))
}

/// `(I + s P) / 2` from the oracle matrix.
pub fn oracle_projection(p: &PauliString, s: Sign) -> ComplexMatrix {
    let m = oracle_matrix(p);
    let id = ComplexMatrix::identity(m.dim());
    let signed = m.scale(g(s.value() as i64, 0));
    (&id + &signed).scale(GaussRational::new(Rational64::new(1, 2), Rational64::from_integer(0)))
}

/// Every ±1 assignment satisfying every edge's product rule, by brute force.
pub fn brute_force_assignments(graph: &KsGraph) -> Vec<Vec<Sign>> {
    let n = graph.num_vertices();
    let mut out = Vec::new();
    for mask in 0u64..(1 << n) {
        let values: Vec<Sign> = (0..n)
            .map(|v| if mask >> (n - 1 - v) & 1 == 0 { Sign::Plus } else { Sign::Minus })
            .collect();
        let ok = graph.edges().iter().zip(graph.edge_signs()).all(|(edge, &s)| {
            let product: i32 = edge.iter().map(|&v| values[v].value()).product();
            product == s.value()
        });
        if ok {
            out.push(values);
        }
    }
    out
}

pub fn signs(values: &[i32]) -> Vec<Sign> {
    values.iter().map(|&v| Sign::from_value(v as i64).unwrap()).collect()
}

/// Counts multisets of commuting vertex sets with bounded coverage and size
/// by dynamic programming over (coverage vector, size), independently of the
/// depth-first enumeration.
pub fn count_realizations(graph: &KsGraph, bounds: SweepBounds) -> u64 {
    let n = graph.num_vertices();
    let ops: Vec<_> = graph.vertices().iter().map(|v| v.operator.clone()).collect();
    let cliques: Vec<Vec<usize>> = (1u32..1 << n)
        .map(|m| (0..n).filter(|v| m >> v & 1 == 1).collect::<Vec<_>>())
        .filter(|s: &Vec<usize>| {
            s.iter()
                .all(|&a| s.iter().all(|&b| ops[a].commutes(&ops[b]).unwrap()))
        })
        .collect();
    let mut states: HashMap<(Vec<usize>, usize), u64> = HashMap::from([((vec![0; n], 0), 1)]);
    for c in &cliques {
        let mut next: HashMap<(Vec<usize>, usize), u64> = HashMap::new();
        for ((cov, size), ways) in &states {
            for k in 0..=bounds.max_association {
                if size + k > bounds.pool {
                    break;
                }
                let mut cov2 = cov.clone();
                for &v in c {
                    cov2[v] += k;
                }
                if cov2.iter().any(|&x| x > bounds.max_association) {
                    break;
                }
                *next.entry((cov2, size + k)).or_default() += ways;
            }
        }
        states = next;
    }
    states
        .iter()
        .filter(|((cov, _), _)| cov.iter().all(|&x| x >= 1))
        .map(|(_, w)| w)
        .sum()
}
