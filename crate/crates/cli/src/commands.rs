use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use ks_core::graph::{admissible_tuples, search_assignments, KsGraph, SearchConfig, DEFAULT_VERTEX_CAP};
use ks_core::ontology::{min_violation_fraction, search_ncvd, DEFAULT_BASIC_CAP};
use ks_core::operational::OperationalTheory;
use ks_core::pauli::{format_tuple, Sign};
use ks_core::realization::{classify_type, is_hyperedge_based, lemma_check, run_type2_argument, Type2Options};
use ks_core::scenario::{builtin, Scenario, ScenarioFile, BUILTINS};

use crate::error::CliError;
use crate::report::Report;

/// At most this many witnesses are listed in a report.
const WITNESS_LIMIT: usize = 16;

pub struct Input {
    pub name: String,
    pub bytes: Vec<u8>,
    pub scenario: Scenario,
}

/// Reads a scenario file, or a built-in when no file of that name exists.
pub fn load(name: &str) -> Result<Input, CliError> {
    let path = Path::new(name);
    let bytes = if path.is_file() {
        fs::read(path).map_err(|e| CliError::Parse(format!("{name}: {e}")))?
    } else if let Some(file) = builtin(name) {
        file.to_json().into_bytes()
    } else {
        return Err(CliError::BadArgument(format!("{name:?} is neither a file nor a built-in scenario")));
    };
    let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::Parse(format!("{name}: {e}")))?;
    let scenario = ScenarioFile::parse(&text)?.resolve()?;
    Ok(Input {
        name: name.to_string(),
        bytes,
        scenario,
    })
}

fn assignment(graph: &KsGraph, values: &[Sign]) -> Vec<(String, Sign)> {
    graph
        .vertices()
        .iter()
        .zip(values)
        .map(|(v, &s)| (v.label.clone(), s))
        .collect()
}

fn sat(flag: bool) -> &'static str {
    if flag {
        "SAT"
    } else {
        "UNSAT"
    }
}

pub fn verify(input: &Input, cap: Option<usize>) -> Result<Report, CliError> {
    let graph = input.scenario.graph()?;
    let config = SearchConfig {
        max_vertices: cap.unwrap_or(DEFAULT_VERTEX_CAP),
    };
    let verdict = search_assignments(graph, &config)?;
    let mut r = Report::new("verify", Some((&input.name, &input.bytes)));
    r.verdict("result", sat(verdict.satisfiable));
    r.verdict("vertices", graph.num_vertices());
    r.verdict("hyperedges", graph.edges().len());
    r.verdict("assignments_checked", 1u64 << graph.num_vertices());
    r.verdict("witness_count", verdict.witnesses.len());
    r.verdict("edge_signs", format_tuple(graph.edge_signs()));
    r.verdict("certificate", verdict.certificate.as_ref().map(|_| "parity"));
    if let Some(c) = &verdict.certificate {
        r.witness(c);
    }
    for w in verdict.witnesses.iter().take(WITNESS_LIMIT) {
        r.witness(assignment(graph, &w.values));
    }
    Ok(r)
}

pub fn classify(input: &Input, realization: Option<&str>) -> Result<Report, CliError> {
    let graph = input.scenario.graph()?;
    let (name, real) = input.scenario.realization(realization)?;
    let kind = classify_type(graph, real)?;
    let hb = is_hyperedge_based(graph, real)?;
    let lemma = lemma_check(graph, real)?;
    let labels = |edges: &[usize]| -> Vec<String> {
        edges
            .iter()
            .map(|&e| format!("{{{}}}", graph.edge_labels(e).join(",")))
            .collect()
    };
    let mut r = Report::new("classify", Some((&input.name, &input.bytes)));
    r.verdict("realization", name);
    r.verdict("result", format!("type {}", kind.kind));
    r.verdict("type", kind.kind);
    r.verdict("non_comeasurable_edges", labels(&kind.non_comeasurable_edges));
    r.verdict("choice_edges", labels(&kind.choice_edges));
    r.verdict("unique", real.is_unique());
    r.verdict("singly_associated", real.is_singly_associated());
    r.verdict("hyperedge_based", hb.holds);
    r.verdict("hyperedge_based_edges", labels(&hb.edges()));
    r.verdict("lemma", lemma.verdict);
    r.verdict("lemma_strong_form_holds", lemma.strong_form_holds);
    if let Some(w) = &lemma.witness {
        r.witness(w);
    }
    Ok(r)
}

fn theory(input: &Input, realization: Option<&str>) -> Result<OperationalTheory, CliError> {
    Ok(input.scenario.operational_theory(realization)?)
}

#[derive(Serialize)]
struct ModelSummary<'a> {
    model: &'a str,
    value_definite: bool,
    noncontextual: bool,
    factorizes: bool,
    recovers: Option<bool>,
    spekkens: Option<bool>,
}

pub fn search_model(input: &Input, realization: Option<&str>, cap: Option<usize>) -> Result<Report, CliError> {
    let theory = theory(input, realization)?;
    let cap = cap.unwrap_or(DEFAULT_BASIC_CAP);
    let result = search_ncvd(&theory, cap)?;
    let fraction = min_violation_fraction(&theory, cap)?;
    let mut r = Report::new("search-model", Some((&input.name, &input.bytes)));
    r.verdict("result", sat(result.satisfiable()));
    r.verdict("basic_measurements", theory.setup().basics().len());
    r.verdict("assignments_checked", 1u64 << theory.setup().basics().len());
    r.verdict("witness_count", result.witnesses.len());
    r.verdict("min_violation_fraction", fraction.fraction().to_string());
    r.verdict("nondisturbing", theory.is_nondisturbing().holds);
    if let Some(model) = &result.model {
        for lambda in model.ontic_states().iter().take(WITNESS_LIMIT) {
            r.witness(lambda);
        }
    }
    let mut summaries = Vec::new();
    for (name, model) in &input.scenario.models {
        let c = model.classify(Some(&theory)).map_err(CliError::from)?;
        summaries.push(ModelSummary {
            model: name,
            value_definite: c.value_definite,
            noncontextual: c.noncontextual,
            factorizes: c.factorizes,
            recovers: c.recovers,
            spekkens: c.spekkens,
        });
    }
    if !summaries.is_empty() {
        r.verdict("models", summaries);
    }
    Ok(r)
}

pub fn robustness(input: &Input, realization: Option<&str>, cap: Option<usize>) -> Result<Report, CliError> {
    let theory = theory(input, realization)?;
    let fraction = min_violation_fraction(&theory, cap.unwrap_or(DEFAULT_BASIC_CAP))?;
    let setup = theory.setup();
    let mut r = Report::new("robustness", Some((&input.name, &input.bytes)));
    r.verdict("result", fraction.fraction().to_string());
    r.verdict("violated_joints", fraction.violated);
    r.verdict("maximal_joints", fraction.total);
    let best: BTreeMap<String, String> = fraction
        .best_assignment
        .iter()
        .enumerate()
        .map(|(b, &o)| (setup.basics()[b].label.clone(), setup.basics()[b].outcomes[o].label.clone()))
        .collect();
    r.witness(best);
    Ok(r)
}

fn parse_tuple(text: &str) -> Result<Vec<Sign>, CliError> {
    text.trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .map(|t| match t.trim() {
            "+1" | "1" | "+" => Ok(Sign::Plus),
            "-1" | "-" => Ok(Sign::Minus),
            other => Err(CliError::BadArgument(format!("{other:?} is not +1 or -1"))),
        })
        .collect()
}

pub fn ghz(
    input: &Input,
    realization: Option<&str>,
    tuple: Option<&str>,
    flip_sign: bool,
    cap: Option<usize>,
) -> Result<Report, CliError> {
    let graph = input.scenario.graph()?;
    let (name, real) = input.scenario.realization(realization)?;
    let tuple = match tuple {
        Some(t) => parse_tuple(t)?,
        None => {
            let kind = classify_type(graph, real)?;
            let edge = *kind
                .non_comeasurable_edges
                .first()
                .ok_or_else(|| CliError::BadArgument(format!("realization is type {}, not II", kind.kind)))?;
            admissible_tuples(graph, edge)?.remove(0)
        }
    };
    let report = run_type2_argument(graph, real, &tuple, Type2Options { flip_sign, cap })?;
    let mut r = Report::new("ghz", Some((&input.name, &input.bytes)));
    r.verdict("realization", name);
    r.verdict("result", sat(report.satisfiable));
    r.verdict("edge", format!("{{{}}}", report.edge_vertices.join(",")));
    r.verdict("eigenvalues", format_tuple(&report.eigenvalues));
    r.verdict("control", report.control);
    r.verdict(
        "eigenstate_max_deviation",
        report.eigenstate.as_ref().map(|e| e.max_deviation),
    );
    r.verdict("witness_count", report.witness_count);
    r.verdict("pinned", &report.pinned);
    if let Some(w) = &report.witness {
        r.witness(w);
    }
    Ok(r)
}

#[derive(Serialize)]
struct CatalogEntry<'a> {
    name: &'a str,
    note: &'a str,
}

pub fn catalog(name: Option<&str>) -> Result<Report, CliError> {
    let Some(name) = name else {
        let mut r = Report::new("catalog", None);
        r.verdict("entries", BUILTINS.len());
        for (name, note) in BUILTINS {
            r.witness(CatalogEntry { name, note });
        }
        return Ok(r);
    };
    let file = builtin(name).ok_or_else(|| CliError::BadArgument(format!("no built-in scenario {name:?}")))?;
    let json = file.to_json();
    let mut r = Report::new("catalog", Some((name, json.as_bytes())));
    if let Some(d) = &file.description {
        r.verdict("note", d);
    }
    let scenario = file.resolve()?;
    if let Some(g) = &scenario.graph {
        r.verdict("vertices", g.vertices().iter().map(|v| format!("{}={}", v.label, v.operator)).collect::<Vec<_>>());
        r.verdict(
            "hyperedges",
            (0..g.edges().len())
                .map(|e| format!("{{{}}} {}", g.edge_labels(e).join(","), g.edge_signs()[e]))
                .collect::<Vec<_>>(),
        );
    }
    if !scenario.realizations.is_empty() {
        r.verdict("realizations", scenario.realizations.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>());
    }
    if let Some(t) = &scenario.theory {
        r.verdict("measurements", t.setup().basics().iter().map(|m| m.label.as_str()).collect::<Vec<_>>());
        r.verdict("preparations", t.preparations());
    }
    if !scenario.models.is_empty() {
        r.verdict("models", scenario.models.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>());
    }
    r.witness(&file);
    Ok(r)
}
