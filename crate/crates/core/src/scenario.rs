//! JSON scenario files: one document carrying a graph, states, realizations,
//! an operational theory and ontological models, any of which may be absent.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog;
use crate::graph::{build_graph, GraphError, KsGraph, Vertex};
use crate::ontology::{ModelError, OntologicalModel};
use crate::operational::{from_quantum, Joint, Measurement, MeasurementSetup, OperationalTheory, TheoryError};
use crate::quantum::{DensityOperator, QuantumError};
use crate::realization::{Comeasurability, Realization, RealizationError, IDENTITY_TAG};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid graph: {0}")]
    Graph(#[from] GraphError),
    #[error("hyperedge {edge} names unknown vertex {label:?}")]
    UnknownVertex { edge: usize, label: String },
    #[error("{block}: {message}")]
    Invalid { block: &'static str, message: String },
    #[error("scenario has no {0} block")]
    Missing(&'static str),
    #[error("no realization named {0:?}")]
    UnknownRealization(String),
}

impl ScenarioError {
    fn invalid(block: &'static str, e: impl ToString) -> Self {
        ScenarioError::Invalid {
            block,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertices: Vec<Vertex>,
    /// Vertex labels per hyperedge; derived from commutation when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperedges: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<StateSpec>,
    /// The first entry is the default realization.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub realizations: Vec<RealizationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tables: Option<TheorySpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<ModelSpec>,
}

/// Complex numbers are `[re, im]` pairs. Exactly one of `vector` and
/// `density` (rows of a row-major matrix) is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComeasurableSpec {
    /// `"commuting"`: comeasurable exactly when the operators commute.
    Rule(String),
    /// Generators of the comeasurability family.
    Sets(Vec<Vec<String>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizationSpec {
    pub name: String,
    /// Measurement labels per vertex label.
    pub associations: BTreeMap<String, Vec<String>>,
    /// Non-identity function tags: vertex label → measurement → tag.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub function_tags: BTreeMap<String, BTreeMap<String, String>>,
    pub comeasurable: ComeasurableSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub joint: Vec<String>,
    /// One distribution per preparation, outcome tuples in lexicographic order.
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheorySpec {
    pub measurements: Vec<Measurement>,
    pub comeasurable: Vec<Vec<String>>,
    pub preparations: Vec<String>,
    pub tables: Vec<TableSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnticSpec {
    pub label: String,
    /// Outcome label per measurement; fixes every response not overridden.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseSpec {
    pub joint: Vec<String>,
    pub ontic_state: String,
    pub row: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    pub ontic_states: Vec<OnticSpec>,
    /// One distribution over ontic states per preparation of the tables block.
    pub preparation_distributions: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub responses: Vec<ResponseSpec>,
}

/// A scenario file resolved into library objects.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub graph: Option<KsGraph>,
    pub states: Vec<(String, DensityOperator)>,
    pub realizations: Vec<(String, Realization)>,
    pub theory: Option<OperationalTheory>,
    pub models: Vec<(String, OntologicalModel)>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn resolve(&self) -> Result<Scenario, ScenarioError> {
        let graph = if self.vertices.is_empty() {
            if self.hyperedges.is_some() {
                return Err(ScenarioError::Missing("vertices"));
            }
            None
        } else {
            Some(self.resolve_graph()?)
        };
        let states = self
            .states
            .iter()
            .map(|s| Ok((s.label.clone(), resolve_state(s)?)))
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        let realizations = if self.realizations.is_empty() {
            Vec::new()
        } else {
            let g = graph.as_ref().ok_or(ScenarioError::Missing("vertices"))?;
            self.realizations
                .iter()
                .map(|r| Ok((r.name.clone(), resolve_realization(g, r)?)))
                .collect::<Result<Vec<_>, ScenarioError>>()?
        };
        let theory = self.tables.as_ref().map(resolve_theory).transpose()?;
        let models = if self.models.is_empty() {
            Vec::new()
        } else {
            let t = theory.as_ref().ok_or(ScenarioError::Missing("tables"))?;
            self.models
                .iter()
                .map(|m| Ok((m.name.clone(), resolve_model(t, m)?)))
                .collect::<Result<Vec<_>, ScenarioError>>()?
        };
        Ok(Scenario {
            name: self.name.clone(),
            description: self.description.clone(),
            graph,
            states,
            realizations,
            theory,
            models,
        })
    }

    fn resolve_graph(&self) -> Result<KsGraph, ScenarioError> {
        let edges = match &self.hyperedges {
            None => None,
            Some(list) => Some(
                list.iter()
                    .enumerate()
                    .map(|(e, labels)| {
                        labels
                            .iter()
                            .map(|l| {
                                self.vertices
                                    .iter()
                                    .position(|v| &v.label == l)
                                    .ok_or_else(|| ScenarioError::UnknownVertex {
                                        edge: e,
                                        label: l.clone(),
                                    })
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        Ok(build_graph(self.vertices.clone(), edges)?)
    }

    /// Writes library objects back into file form.
    pub fn from_parts(
        name: &str,
        description: Option<&str>,
        graph: Option<&KsGraph>,
        states: &[(String, DensityOperator)],
        realizations: &[(String, Realization)],
        theory: Option<&OperationalTheory>,
        models: &[(String, OntologicalModel)],
    ) -> Self {
        Self {
            name: name.to_string(),
            description: description.map(str::to_string),
            vertices: graph.map(|g| g.vertices().to_vec()).unwrap_or_default(),
            hyperedges: graph.map(|g| {
                (0..g.edges().len())
                    .map(|e| g.edge_labels(e).iter().map(|s| s.to_string()).collect())
                    .collect()
            }),
            states: states
                .iter()
                .map(|(label, rho)| StateSpec {
                    label: label.clone(),
                    vector: None,
                    density: Some(
                        (0..rho.dim())
                            .map(|r| (0..rho.dim()).map(|c| [rho.matrix()[(r, c)].re, rho.matrix()[(r, c)].im]).collect())
                            .collect(),
                    ),
                })
                .collect(),
            realizations: realizations
                .iter()
                .map(|(n, r)| realization_spec(graph.expect("realizations need a graph"), n, r))
                .collect(),
            tables: theory.map(theory_spec),
            models: models.iter().map(|(n, m)| model_spec(n, m)).collect(),
        }
    }
}

impl Scenario {
    pub fn graph(&self) -> Result<&KsGraph, ScenarioError> {
        self.graph.as_ref().ok_or(ScenarioError::Missing("vertices"))
    }

    /// Named realization, or the first one when `name` is `None`.
    pub fn realization(&self, name: Option<&str>) -> Result<&(String, Realization), ScenarioError> {
        match name {
            None => self.realizations.first().ok_or(ScenarioError::Missing("realizations")),
            Some(n) => {
                if self.realizations.is_empty() {
                    return Err(ScenarioError::Missing("realizations"));
                }
                self.realizations
                    .iter()
                    .find(|(l, _)| l == n)
                    .ok_or_else(|| ScenarioError::UnknownRealization(n.to_string()))
            }
        }
    }

    /// The tables block if present, else the Born-rule theory of the chosen
    /// realization over the scenario's states (the maximally mixed state when
    /// none are given).
    pub fn operational_theory(&self, realization: Option<&str>) -> Result<OperationalTheory, ScenarioError> {
        if let Some(t) = &self.theory {
            return Ok(t.clone());
        }
        let graph = self.graph.as_ref().ok_or(ScenarioError::Missing("tables"))?;
        let (_, r) = self.realization(realization)?;
        let states = if self.states.is_empty() {
            vec![(
                "maximally-mixed".to_string(),
                DensityOperator::maximally_mixed(1 << graph.num_qubits()),
            )]
        } else {
            self.states.clone()
        };
        from_quantum(graph, &states, r).map_err(|e| ScenarioError::invalid("realizations", e))
    }
}

fn resolve_state(s: &StateSpec) -> Result<DensityOperator, ScenarioError> {
    let c = |z: &[f64; 2]| Complex64::new(z[0], z[1]);
    let result: Result<DensityOperator, QuantumError> = match (&s.vector, &s.density) {
        (Some(v), None) => DensityOperator::from_state_vector(&v.iter().map(c).collect::<Vec<_>>()),
        (None, Some(rows)) => {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                Err(QuantumError::NotSquare)
            } else {
                DensityOperator::new(DMatrix::from_fn(n, n, |i, j| c(&rows[i][j])))
            }
        }
        _ => {
            return Err(ScenarioError::invalid(
                "states",
                format!("state {:?} needs exactly one of vector and density", s.label),
            ))
        }
    };
    result.map_err(|e| ScenarioError::invalid("states", format!("{}: {e}", s.label)))
}

fn resolve_realization(graph: &KsGraph, spec: &RealizationSpec) -> Result<Realization, ScenarioError> {
    let invalid = |m: String| ScenarioError::invalid("realizations", format!("{}: {m}", spec.name));
    let vertex = |label: &str| {
        graph
            .vertex_index(label)
            .ok_or_else(|| invalid(format!("unknown vertex {label:?}")))
    };
    let mut assoc = vec![BTreeSet::new(); graph.num_vertices()];
    for (label, ms) in &spec.associations {
        assoc[vertex(label)?] = ms.iter().cloned().collect();
    }
    let mut tags = BTreeMap::new();
    for (label, per) in &spec.function_tags {
        let v = vertex(label)?;
        for (m, tag) in per {
            tags.insert((v, m.clone()), tag.clone());
        }
    }
    let comeasurable = match &spec.comeasurable {
        ComeasurableSpec::Rule(r) if r == "commuting" => Comeasurability::Commuting,
        ComeasurableSpec::Rule(r) => return Err(invalid(format!("unknown comeasurability rule {r:?}"))),
        ComeasurableSpec::Sets(sets) => {
            Comeasurability::Family(sets.iter().map(|s| s.iter().cloned().collect()).collect())
        }
    };
    Realization::new(assoc, tags, comeasurable).map_err(|e: RealizationError| invalid(e.to_string()))
}

fn resolve_theory(spec: &TheorySpec) -> Result<OperationalTheory, ScenarioError> {
    let invalid = |e: TheoryError| ScenarioError::invalid("tables", e);
    let generators: Vec<Vec<&str>> = spec
        .comeasurable
        .iter()
        .map(|g| g.iter().map(String::as_str).collect())
        .collect();
    let setup = MeasurementSetup::from_labels(spec.measurements.clone(), &generators).map_err(invalid)?;
    let mut tables = BTreeMap::new();
    for t in &spec.tables {
        let labels: Vec<&str> = t.joint.iter().map(String::as_str).collect();
        let joint = setup.joint(&labels).map_err(invalid)?;
        if tables.insert(joint, t.rows.clone()).is_some() {
            return Err(ScenarioError::invalid("tables", format!("duplicate table for {:?}", t.joint)));
        }
    }
    OperationalTheory::new(setup, spec.preparations.clone(), tables).map_err(invalid)
}

fn resolve_model(theory: &OperationalTheory, spec: &ModelSpec) -> Result<OntologicalModel, ScenarioError> {
    let invalid = |m: String| ScenarioError::invalid("models", format!("{}: {m}", spec.name));
    let setup = theory.setup();
    let n_states = spec.ontic_states.len();
    let mut rows: BTreeMap<Joint, Vec<Option<Vec<f64>>>> =
        setup.family().iter().map(|j| (j.clone(), vec![None; n_states])).collect();
    for (lambda, o) in spec.ontic_states.iter().enumerate() {
        let Some(assignment) = &o.assignment else { continue };
        let mut values = vec![0; setup.basics().len()];
        for (b, m) in setup.basics().iter().enumerate() {
            let label = assignment
                .get(&m.label)
                .ok_or_else(|| invalid(format!("{} assigns nothing to {}", o.label, m.label)))?;
            values[b] = m
                .outcomes
                .iter()
                .position(|x| &x.label == label)
                .ok_or_else(|| invalid(format!("{} is not an outcome of {}", label, m.label)))?;
        }
        if let Some(extra) = assignment.keys().find(|k| setup.basic_index(k).is_none()) {
            return Err(invalid(format!("unknown measurement {extra:?}")));
        }
        for (joint, per) in rows.iter_mut() {
            let mut row = vec![0.0; setup.outcome_count(joint)];
            row[setup.restrict(joint, &values)] = 1.0;
            per[lambda] = Some(row);
        }
    }
    for r in &spec.responses {
        let labels: Vec<&str> = r.joint.iter().map(String::as_str).collect();
        let joint = setup.joint(&labels).map_err(|e| invalid(e.to_string()))?;
        let lambda = spec
            .ontic_states
            .iter()
            .position(|o| o.label == r.ontic_state)
            .ok_or_else(|| invalid(format!("unknown ontic state {:?}", r.ontic_state)))?;
        rows.get_mut(&joint).expect("family member")[lambda] = Some(r.row.clone());
    }
    let mut responses = BTreeMap::new();
    for (joint, per) in rows {
        let filled = per
            .into_iter()
            .enumerate()
            .map(|(lambda, row)| {
                row.ok_or_else(|| {
                    invalid(format!(
                        "no response for {} at {}",
                        setup.name(&joint),
                        spec.ontic_states[lambda].label
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        responses.insert(joint, filled);
    }
    OntologicalModel::new(
        setup.clone(),
        theory.preparations().to_vec(),
        spec.ontic_states.iter().map(|o| o.label.clone()).collect(),
        spec.preparation_distributions.clone(),
        responses,
    )
    .map_err(|e: ModelError| invalid(e.to_string()))
}

fn joint_labels(setup: &MeasurementSetup, joint: &Joint) -> Vec<String> {
    joint
        .basics()
        .iter()
        .map(|&b| setup.basics()[b].label.clone())
        .collect()
}

fn realization_spec(graph: &KsGraph, name: &str, r: &Realization) -> RealizationSpec {
    let label = |v: usize| graph.vertices()[v].label.clone();
    let mut function_tags: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for ((v, m), tag) in r.function_tags() {
        if tag != IDENTITY_TAG {
            function_tags.entry(label(*v)).or_default().insert(m.clone(), tag.clone());
        }
    }
    RealizationSpec {
        name: name.to_string(),
        associations: r
            .associations()
            .iter()
            .enumerate()
            .map(|(v, s)| (label(v), s.iter().cloned().collect()))
            .collect(),
        function_tags,
        comeasurable: match r.comeasurability() {
            Comeasurability::Commuting => ComeasurableSpec::Rule("commuting".into()),
            Comeasurability::Family(g) => {
                ComeasurableSpec::Sets(g.iter().map(|s| s.iter().cloned().collect()).collect())
            }
        },
    }
}

fn theory_spec(t: &OperationalTheory) -> TheorySpec {
    let setup = t.setup();
    TheorySpec {
        measurements: setup.basics().to_vec(),
        comeasurable: setup
            .maximal()
            .iter()
            .filter(|j| j.len() > 1)
            .map(|j| joint_labels(setup, j))
            .collect(),
        preparations: t.preparations().to_vec(),
        tables: t
            .tables()
            .iter()
            .map(|(j, rows)| TableSpec {
                joint: joint_labels(setup, j),
                rows: rows.clone(),
            })
            .collect(),
    }
}

/// Ontic states whose single-measurement responses are deterministic are
/// written as assignments; only responses differing from the assignment's
/// prediction are listed explicitly.
fn model_spec(name: &str, m: &OntologicalModel) -> ModelSpec {
    let setup = m.setup();
    let mut ontic_states = Vec::new();
    let mut responses = Vec::new();
    for (lambda, label) in m.ontic_states().iter().enumerate() {
        let values: Option<Vec<usize>> = (0..setup.basics().len())
            .map(|b| {
                let row = &m.responses()[&Joint::new(vec![b])][lambda];
                row.iter().position(|&p| p == 1.0)
            })
            .collect();
        ontic_states.push(OnticSpec {
            label: label.clone(),
            assignment: values.as_ref().map(|vals| {
                vals.iter()
                    .enumerate()
                    .map(|(b, &o)| {
                        let basic = &setup.basics()[b];
                        (basic.label.clone(), basic.outcomes[o].label.clone())
                    })
                    .collect()
            }),
        });
        for (joint, rows) in m.responses() {
            let implied = values.as_ref().map(|vals| {
                let mut row = vec![0.0; setup.outcome_count(joint)];
                row[setup.restrict(joint, vals)] = 1.0;
                row
            });
            if implied.as_ref() != Some(&rows[lambda]) {
                responses.push(ResponseSpec {
                    joint: joint_labels(setup, joint),
                    ontic_state: label.clone(),
                    row: rows[lambda].clone(),
                });
            }
        }
    }
    ModelSpec {
        name: name.to_string(),
        ontic_states,
        preparation_distributions: m.prep_distributions().to_vec(),
        responses,
    }
}

/// Built-in scenario names with a one-line note on each.
pub const BUILTINS: [(&str, &str); 7] = [
    (
        "peres-mermin",
        "Peres-Mermin square: nine two-qubit Pauli observables, rows and columns as hyperedges, third column multiplies to -I",
    ),
    (
        "ghz",
        "GHZ star: ten three-qubit Pauli observables, five hyperedges of four, the horizontal one multiplies to -I",
    ),
    ("single-edge", "One hyperedge {ZI, IZ, ZZ} with product +I; value assignments exist"),
    (
        "box-m1",
        "Balls in a box, black ones big and white ones small; noncontextual and Spekkens-noncontextual",
    ),
    (
        "box-m2",
        "Balls in a box with all four kinds; noncontextual but violates Spekkens' condition",
    ),
    (
        "box-m3",
        "Balls in a box whose joint colour-size measurement reports the opposite ball; contextual and disturbing",
    ),
    ("army", "Shooting and tightrope walking; a disturbing operational theory"),
];

pub fn builtin(name: &str) -> Option<ScenarioFile> {
    let note = BUILTINS.iter().find(|(n, _)| *n == name)?.1;
    let file = match name {
        "peres-mermin" => ScenarioFile::from_parts(
            name,
            Some(note),
            Some(&catalog::peres_mermin_graph()),
            &catalog::pm_states(),
            &[
                ("full".into(), catalog::pm_full_realization()),
                ("spin".into(), catalog::pm_spin_realization()),
                ("six".into(), catalog::pm_six_realization()),
            ],
            None,
            &[],
        ),
        "ghz" => ScenarioFile::from_parts(
            name,
            Some(note),
            Some(&catalog::ghz_graph()),
            &catalog::ghz_states(),
            &[
                ("standard".into(), catalog::ghz_standard_realization()),
                ("full".into(), catalog::ghz_full_realization()),
            ],
            None,
            &[],
        ),
        "single-edge" => {
            let g = catalog::single_edge_graph();
            let labels: Vec<String> = g.vertices().iter().map(|v| v.label.clone()).collect();
            let r = Realization::unique_from_labels(labels, &[g.edge_labels(0)]).expect("single-edge realization");
            ScenarioFile::from_parts(name, Some(note), Some(&g), &[], &[("unique".into(), r)], None, &[])
        }
        "box-m1" => box_file(name, note, catalog::box_m1_theory(), catalog::box_m1_model()),
        "box-m2" => box_file(name, note, catalog::box_m2_theory(), catalog::box_m2_model()),
        "box-m3" => box_file(name, note, catalog::box_m3_theory(), catalog::box_m3_model()),
        "army" => ScenarioFile::from_parts(name, Some(note), None, &[], &[], Some(&catalog::army_theory()), &[]),
        _ => return None,
    };
    Some(file)
}

fn box_file(name: &str, note: &str, theory: OperationalTheory, model: OntologicalModel) -> ScenarioFile {
    let model_name = name.trim_start_matches("box-").to_uppercase();
    ScenarioFile::from_parts(name, Some(note), None, &[], &[], Some(&theory), &[(model_name, model)])
}
