//! Acceptance criteria, one PASS/FAIL line each.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode, Output};
use std::time::Instant;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

use common::{brute_force_assignments, count_realizations, oracle_matrix, oracle_projection, signs};
use ks_core::catalog;
use ks_core::graph::{admissible_tuples, all_sign_tuples, search_assignments, KsGraph, SearchConfig};
use ks_core::matrix::{ComplexMatrix, GaussRational};
use ks_core::ontology::{min_violation_fraction, search_ncvd, DEFAULT_BASIC_CAP};
use ks_core::operational::{from_quantum, OperationalTheory};
use ks_core::pauli::{edge_product, Letter, PauliString, Phase, Sign};
use ks_core::quantum::{joint_projection, DensityOperator};
use ks_core::realization::{
    classify_type, collapse_edge, enumerate_lemma_sweep, run_type2_argument, ArgumentKind, Comeasurability,
    Realization, SweepBounds, Type2Options,
};

fn kscheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kscheck"))
        .args(args)
        .output()
        .expect("kscheck runs")
}

/// Runs with `--json` and returns the verdicts of a successful report.
fn verdicts(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = kscheck(&all);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).expect("JSON report");
    report["verdicts"].clone()
}

fn values_of(mask: u64, n: usize) -> Vec<Sign> {
    (0..n)
        .map(|v| if mask >> v & 1 == 0 { Sign::Plus } else { Sign::Minus })
        .collect()
}

fn violated_edges(graph: &KsGraph, values: &[Sign]) -> usize {
    graph
        .edges()
        .iter()
        .zip(graph.edge_signs())
        .filter(|(edge, &s)| Sign::product(edge.iter().map(|&v| values[v])) != s)
        .count()
}

/// Smallest fraction of hyperedges any ±1 assignment violates.
fn oracle_violation_fraction(graph: &KsGraph) -> Rational64 {
    let n = graph.num_vertices();
    let best = (0..1u64 << n)
        .map(|m| violated_edges(graph, &values_of(m, n)))
        .min()
        .unwrap();
    Rational64::new(best as i64, graph.edges().len() as i64)
}

fn ac1() {
    let pm = catalog::peres_mermin_graph();
    let start = Instant::now();
    let v = verdicts(&["verify", "peres-mermin"]);
    assert!(start.elapsed().as_secs_f64() < 1.0, "took {:?}", start.elapsed());
    assert_eq!(v["result"], "UNSAT");
    assert_eq!(v["assignments_checked"], 512);
    assert_eq!(v["certificate"], "parity");
    assert!(brute_force_assignments(&pm).is_empty());
    let start = Instant::now();
    let verdict = search_assignments(&pm, &SearchConfig::default()).unwrap();
    assert!(start.elapsed().as_secs_f64() < 1.0);
    assert!(!verdict.satisfiable && verdict.certificate.is_some());
}

fn ac2() {
    let ghz = catalog::ghz_graph();
    let v = verdicts(&["verify", "ghz"]);
    assert_eq!(v["result"], "UNSAT");
    assert_eq!(v["assignments_checked"], 1024);
    assert_eq!(v["certificate"], "parity");
    assert!(brute_force_assignments(&ghz).is_empty());
    let cert = search_assignments(&ghz, &SearchConfig::default()).unwrap().certificate.unwrap();
    let mut incidences = vec![0; ghz.num_vertices()];
    for edge in ghz.edges() {
        for &v in edge {
            incidences[v] += 1;
        }
    }
    assert_eq!(cert.incidences, incidences);
    assert!(incidences.iter().all(|k| k % 2 == 0));
    assert_eq!(cert.sign_product, Sign::Minus);
}

fn ac3() {
    let pm = catalog::peres_mermin_graph();
    assert_eq!(pm.edge_signs(), signs(&[1, 1, 1, 1, 1, -1]).as_slice());
    assert_eq!(pm.edge_labels(5), ["c", "f", "i"]);
    let ghz = catalog::ghz_graph();
    assert_eq!(ghz.edge_signs(), signs(&[1, 1, 1, 1, -1]).as_slice());
    assert_eq!(ghz.edge_labels(4), ["XXX", "YYX", "YXY", "XYY"]);
    for g in [pm, ghz] {
        for e in 0..g.edges().len() {
            let ops = g.edge_operators(e);
            let product = ops
                .iter()
                .fold(ComplexMatrix::identity(1 << g.num_qubits()), |acc, p| &acc * &oracle_matrix(p));
            let sign = edge_product(&ops).unwrap();
            let expected =
                ComplexMatrix::identity(product.dim()).scale(GaussRational::from_integers(sign.value() as i64, 0));
            assert_eq!(product, expected, "edge {e}");
            assert_eq!(sign, g.edge_signs()[e]);
        }
    }
}

fn ac4() {
    let pm = catalog::peres_mermin_graph();
    for e in 0..pm.edges().len() {
        let ops = pm.edge_operators(e);
        let admissible = admissible_tuples(&pm, e).unwrap();
        for tuple in all_sign_tuples(3) {
            let oracle = ops
                .iter()
                .zip(&tuple)
                .fold(ComplexMatrix::identity(4), |acc, (p, &s)| &acc * &oracle_projection(p, s));
            let inside = Sign::product(tuple.iter().copied()) == pm.edge_signs()[e];
            assert_eq!(oracle.is_zero(), !inside, "edge {e} {tuple:?}");
            assert_eq!(admissible.contains(&tuple), inside);
            assert_eq!(joint_projection(&ops, &tuple).unwrap(), oracle);
        }
    }
}

/// Counts ±1 assignments to the basic measurements whose restriction to every
/// maximal joint measurement has support in some preparation.
fn oracle_consistent_assignments(theory: &OperationalTheory) -> usize {
    let setup = theory.setup();
    let n = setup.basics().len();
    let joints = setup.maximal();
    (0..1u64 << n)
        .filter(|&m| {
            let outcome: Vec<usize> = (0..n).map(|b| (m >> b & 1) as usize).collect();
            joints.iter().all(|j| {
                let local: Vec<usize> = j.basics().iter().map(|&b| outcome[b]).collect();
                let index = setup.encode(j, &local);
                (0..theory.preparations().len()).any(|r| theory.distribution(j, r).unwrap()[index] > 1e-12)
            })
        })
        .count()
}

fn ac5() {
    let v = verdicts(&["search-model", "peres-mermin"]);
    assert_eq!(v["result"], "UNSAT");
    assert_eq!(v["assignments_checked"], 512);
    assert_eq!(v["witness_count"], 0);
    let theory = catalog::pm_theory();
    assert_eq!(theory.setup().basics().len(), 9);
    assert!(!search_ncvd(&theory, DEFAULT_BASIC_CAP).unwrap().satisfiable());
    assert_eq!(oracle_consistent_assignments(&theory), 0);
}

fn ac6() {
    let pm = catalog::peres_mermin_graph();
    let oracle = oracle_violation_fraction(&pm);
    assert_eq!(oracle, Rational64::new(1, 6));
    assert_eq!(min_violation_fraction(&catalog::pm_theory(), DEFAULT_BASIC_CAP).unwrap().fraction(), oracle);
    assert_eq!(verdicts(&["robustness", "peres-mermin"])["result"], "1/6");
    assert_eq!(verdicts(&["search-model", "peres-mermin"])["min_violation_fraction"], "1/6");
    let ghz = catalog::ghz_graph();
    let ghz_full = from_quantum(&ghz, &catalog::ghz_states(), &catalog::ghz_full_realization()).unwrap();
    let oracle = oracle_violation_fraction(&ghz);
    assert_eq!(min_violation_fraction(&ghz_full, DEFAULT_BASIC_CAP).unwrap().fraction(), oracle);
    assert_eq!(verdicts(&["robustness", "ghz", "--realization", "full"])["result"], oracle.to_string());
}

/// Edges of a unique realization whose vertex labels lie in no declared comeasurable set.
fn oracle_flagged_edges(graph: &KsGraph, r: &Realization) -> Vec<String> {
    let Comeasurability::Family(sets) = r.comeasurability() else {
        panic!("declared family expected");
    };
    (0..graph.edges().len())
        .filter(|&e| {
            let labels = graph.edge_labels(e);
            !sets.iter().any(|s| labels.iter().all(|l| s.contains(*l)))
        })
        .map(|e| format!("{{{}}}", graph.edge_labels(e).join(",")))
        .collect()
}

fn ac7() {
    let pm = catalog::peres_mermin_graph();
    let spin = catalog::pm_spin_realization();
    assert_eq!(oracle_flagged_edges(&pm, &spin), ["{g,h,i}", "{c,f,i}"]);
    let v = verdicts(&["classify", "peres-mermin", "--realization", "spin"]);
    assert_eq!(v["type"], "III");
    assert_eq!(v["non_comeasurable_edges"], serde_json::json!(oracle_flagged_edges(&pm, &spin)));
    assert_eq!(classify_type(&pm, &spin).unwrap().kind, ArgumentKind::III);

    let ghz = catalog::ghz_graph();
    let standard = catalog::ghz_standard_realization();
    assert_eq!(oracle_flagged_edges(&ghz, &standard), ["{XXX,YYX,YXY,XYY}"]);
    let v = verdicts(&["classify", "ghz", "--realization", "standard"]);
    assert_eq!(v["type"], "II");
    assert_eq!(v["non_comeasurable_edges"], serde_json::json!(oracle_flagged_edges(&ghz, &standard)));
    assert_eq!(classify_type(&ghz, &standard).unwrap().kind, ArgumentKind::II);
}

/// Assignments satisfying every edge but `skip` and agreeing with `pinned`.
fn oracle_pinned_count(graph: &KsGraph, skip: usize, pinned: &[(usize, Sign)]) -> usize {
    let n = graph.num_vertices();
    (0..1u64 << n)
        .map(|m| values_of(m, n))
        .filter(|values| pinned.iter().all(|&(v, s)| values[v] == s))
        .filter(|values| {
            graph
                .edges()
                .iter()
                .zip(graph.edge_signs())
                .enumerate()
                .all(|(e, (edge, &s))| e == skip || Sign::product(edge.iter().map(|&v| values[v])) == s)
        })
        .count()
}

fn ac8() {
    let ghz = catalog::ghz_graph();
    let r = catalog::ghz_standard_realization();
    let tuples = admissible_tuples(&ghz, 4).unwrap();
    assert_eq!(tuples.len(), 8);
    for tuple in &tuples {
        let report = run_type2_argument(&ghz, &r, tuple, Type2Options::default()).unwrap();
        let pinned: Vec<(usize, Sign)> = report
            .pinned
            .iter()
            .map(|(l, &s)| (ghz.vertex_index(l).unwrap(), s))
            .collect();
        assert_eq!(oracle_pinned_count(&ghz, 4, &pinned), 0);
        assert!(!report.satisfiable, "{tuple:?}");
        let deviation = report.eigenstate.expect("eigenstate check").max_deviation;
        assert!(deviation <= 1e-10, "{tuple:?}: {deviation}");

        let control = run_type2_argument(&ghz, &r, tuple, Type2Options { flip_sign: true, cap: None }).unwrap();
        let pinned: Vec<(usize, Sign)> = control
            .pinned
            .iter()
            .map(|(l, &s)| (ghz.vertex_index(l).unwrap(), s))
            .collect();
        assert_eq!(Sign::product(pinned.iter().map(|p| p.1)), Sign::Plus);
        let expected = oracle_pinned_count(&ghz, 4, &pinned);
        assert!(expected > 0);
        assert!(control.satisfiable, "control {tuple:?}");
        assert_eq!(control.witness_count, expected);
    }
    assert_eq!(verdicts(&["ghz"])["result"], "UNSAT");
    assert_eq!(verdicts(&["ghz", "--flip-sign"])["result"], "SAT");
    assert_eq!(kscheck(&["ghz", "--tuple", "+1,+1,+1,+1"]).status.code(), Some(6));
}

fn ac9() {
    let pm = catalog::peres_mermin_graph();
    let bounds = SweepBounds::default();
    assert!(bounds.pool <= 12 && bounds.max_association <= 2);
    let sweep = enumerate_lemma_sweep(&pm, bounds).unwrap();
    assert_eq!(sweep.enumerated, count_realizations(&pm, bounds));
    assert!(sweep.antecedent_holds > 0);
    assert_eq!(sweep.unique, 0);
    assert!(sweep.counterexamples.is_empty());
}

fn ac10() {
    let fixtures = [
        ("box-m1", catalog::box_m1_theory(), catalog::box_m1_model(), true, true, true),
        ("box-m2", catalog::box_m2_theory(), catalog::box_m2_model(), true, false, true),
        ("box-m3", catalog::box_m3_theory(), catalog::box_m3_model(), false, true, false),
    ];
    for (name, theory, model, nc, spekkens, nondisturbing) in fixtures {
        for (joint, rows) in theory.tables() {
            for (r, row) in rows.iter().enumerate() {
                let responses = &model.responses()[joint];
                for (k, p) in row.iter().enumerate() {
                    let predicted: f64 = model.prep_distributions()[r]
                        .iter()
                        .zip(responses)
                        .map(|(mu, xi)| mu * xi[k])
                        .sum();
                    assert!((predicted - p).abs() <= 1e-10, "{name}");
                }
            }
        }
        let c = model.classify(Some(&theory)).unwrap();
        assert_eq!(c.recovers, Some(true), "{name}");
        assert_eq!(c.noncontextual, nc, "{name}");
        assert_eq!(c.spekkens, Some(spekkens), "{name}");
        assert_eq!(theory.is_nondisturbing().holds, nondisturbing, "{name}");
        let v = verdicts(&["search-model", name]);
        let m = &v["models"][0];
        assert_eq!(m["noncontextual"], nc, "{name}");
        assert_eq!(m["spekkens"], spekkens, "{name}");
        assert_eq!(m["recovers"], true, "{name}");
        assert_eq!(v["nondisturbing"], nondisturbing, "{name}");
    }
}

fn random_pauli(rng: &mut StdRng, n: usize) -> PauliString {
    let letters = (0..n).map(|_| Letter::ALL[rng.gen_range(0..4)]).collect();
    PauliString::new(Phase::ALL[rng.gen_range(0..4)], letters).unwrap()
}

fn all_paulis(n: usize) -> Vec<PauliString> {
    (0..4usize.pow(n as u32) * 4)
        .map(|k| {
            let letters = (0..n).map(|q| Letter::ALL[k / 4usize.pow(q as u32) % 4]).collect();
            PauliString::new(Phase::ALL[k / 4usize.pow(n as u32)], letters).unwrap()
        })
        .collect()
}

fn check_homomorphism(a: &PauliString, b: &PauliString) {
    let (ma, mb) = (oracle_matrix(a), oracle_matrix(b));
    assert_eq!(oracle_matrix(&a.multiply(b).unwrap()), &ma * &mb, "{a} * {b}");
    assert_eq!(a.to_matrix(), ma);
    assert_eq!(a.commutes(b).unwrap(), ma.commutator_is_zero(&mb), "{a} vs {b}");
}

fn random_state(rng: &mut StdRng, dim: usize) -> DensityOperator {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    DensityOperator::from_state_vector(&v).unwrap()
}

fn ac11() {
    for n in 1..=2 {
        let strings = all_paulis(n);
        assert_eq!(strings.len(), 4usize.pow(n as u32) * 4);
        for a in &strings {
            for b in &strings {
                check_homomorphism(a, b);
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..1000 {
        check_homomorphism(&random_pauli(&mut rng, 3), &random_pauli(&mut rng, 3));
    }

    let pm = catalog::peres_mermin_graph();
    let ghz = catalog::ghz_graph();
    let collapsed = collapse_edge(&pm, &catalog::pm_spin_realization(), 2).unwrap().realization;
    for _ in 0..8 {
        let mut pm_states = catalog::pm_states();
        pm_states.push(("random".into(), random_state(&mut rng, 4)));
        for r in [
            catalog::pm_full_realization(),
            catalog::pm_spin_realization(),
            catalog::pm_six_realization(),
            collapsed.clone(),
        ] {
            assert!(from_quantum(&pm, &pm_states, &r).unwrap().is_nondisturbing().holds);
        }
        let mut ghz_states = catalog::ghz_states();
        ghz_states.push(("random".into(), random_state(&mut rng, 8)));
        for r in [catalog::ghz_standard_realization(), catalog::ghz_full_realization()] {
            assert!(from_quantum(&ghz, &ghz_states, &r).unwrap().is_nondisturbing().holds);
        }
    }

    let mut models = vec![catalog::box_m1_model(), catalog::box_m2_model(), catalog::box_m3_model()];
    for theory in [catalog::box_m1_theory(), catalog::box_m2_theory(), catalog::ghz_theory()] {
        models.extend(search_ncvd(&theory, DEFAULT_BASIC_CAP).unwrap().model);
    }
    assert_eq!(models.len(), 6);
    for m in &models {
        if m.is_value_definite() && m.is_noncontextual().holds {
            assert!(m.factorizes().holds);
        }
    }

    let fixtures = [
        (catalog::box_m1_theory(), catalog::box_m1_model()),
        (catalog::box_m2_theory(), catalog::box_m2_model()),
        (catalog::box_m3_theory(), catalog::box_m3_model()),
    ];
    let mut checked = 0;
    for (theory, model) in fixtures {
        if theory.is_nondisturbing().holds && model.satisfies_spekkens(&theory).unwrap().holds {
            assert!(model.is_noncontextual().holds);
            checked += 1;
        }
    }
    assert_eq!(checked, 1);
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn()); 11] = [
        ("AC1", "Peres-Mermin square has no value assignment", ac1),
        ("AC2", "GHZ star has no value assignment", ac2),
        ("AC3", "edge signs match the matrix oracle exactly", ac3),
        ("AC4", "joint projections vanish exactly off the admissible set", ac4),
        ("AC5", "Peres-Mermin theory has no NCVD model", ac5),
        ("AC6", "minimum violation fraction 1/6, GHZ 1/5", ac6),
        ("AC7", "spin square is type III, GHZ is type II", ac7),
        ("AC8", "GHZ eigenstate argument and sign-flipped controls", ac8),
        ("AC9", "lemma sweep finds no unique hyperedge-based realization", ac9),
        ("AC10", "box models separate noncontextuality from Spekkens' condition", ac10),
        ("AC11", "property suites", ac11),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, what, check) in criteria {
        let start = Instant::now();
        match catch_unwind(AssertUnwindSafe(check)) {
            Ok(()) => println!("{id} PASS {what} ({:.2} s)", start.elapsed().as_secs_f64()),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("{id} FAIL {what}: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
