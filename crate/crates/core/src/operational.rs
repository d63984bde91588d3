//! Operational theories: basic measurements, the comeasurability family,
//! preparations, and conditional probability tables.
//!
//! A joint measurement is identified by its basis, the set of basic
//! measurements performed together. Tables are mandatory for every maximal
//! joint; a non-maximal joint may carry its own table too, which is how a
//! disturbing theory records that a measurement performed alone behaves
//! differently from the same measurement inside a larger joint.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::KsGraph;
use crate::pauli::{PauliString, Sign};
use crate::quantum::{joint_projection, DensityOperator, QuantumError};
use crate::realization::Realization;

/// Tolerance for comparing probabilities drawn from different tables.
pub const TABLE_TOLERANCE: f64 = 1e-10;
/// Tolerance for normalization of a single distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;
/// Probabilities above this count as possible outcomes.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("duplicate measurement label {0:?}")]
    DuplicateMeasurement(String),
    #[error("measurement {0:?} needs at least two distinct outcomes")]
    BadOutcomes(String),
    #[error("unknown measurement {0:?}")]
    UnknownMeasurement(String),
    #[error("joint {0} is not in the comeasurability family")]
    NotInFamily(String),
    #[error("empty joint measurement")]
    EmptyJoint,
    #[error("duplicate preparation label {0:?}")]
    DuplicatePreparation(String),
    #[error("unknown preparation {0:?}")]
    UnknownPreparation(String),
    #[error("maximal joint {0} has no table")]
    MissingTable(String),
    #[error("table for {joint} has wrong shape: {reason}")]
    TableShape { joint: String, reason: String },
    #[error("table for {joint} under {preparation} sums to {sum}")]
    NotNormalized { joint: String, preparation: String, sum: f64 },
    #[error("table for {joint} under {preparation} has negative entry {value}")]
    Negative { joint: String, preparation: String, value: f64 },
    #[error("outcome event has {got} entries, joint {joint} has {expected}")]
    EventLength { joint: String, got: usize, expected: usize },
    #[error("marginals of {joint} disagree: {first} from {first_source} vs {second} from {second_source} (preparation {preparation})")]
    Ambiguous {
        joint: String,
        first_source: String,
        second_source: String,
        preparation: String,
        first: f64,
        second: f64,
    },
    #[error("realization covers {got} vertices, graph has {expected}")]
    RealizationSize { got: usize, expected: usize },
    #[error("measurement {measurement} realizes non-commuting operators")]
    NonCommutingMeasurement { measurement: String },
    #[error("comeasurable set {0} is represented by non-commuting operators")]
    NonCommutingJoint(String),
    #[error("no preparations given")]
    NoPreparations,
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub label: String,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub label: String,
    pub outcomes: Vec<Outcome>,
}

impl Measurement {
    /// Two-outcome measurement with outcomes `+1` then `-1`.
    pub fn signed(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            outcomes: vec![
                Outcome {
                    label: "+1".into(),
                    value: 1,
                },
                Outcome {
                    label: "-1".into(),
                    value: -1,
                },
            ],
        }
    }

    pub fn with_outcomes(label: impl Into<String>, outcomes: &[(&str, i64)]) -> Self {
        Self {
            label: label.into(),
            outcomes: outcomes
                .iter()
                .map(|&(l, v)| Outcome {
                    label: l.to_string(),
                    value: v,
                })
                .collect(),
        }
    }
}

/// Basis of a (basic or joint) measurement: sorted indices of basic measurements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Joint(Vec<usize>);

impl Joint {
    pub fn new(mut basics: Vec<usize>) -> Self {
        basics.sort_unstable();
        basics.dedup();
        Joint(basics)
    }

    pub fn basics(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset_of(&self, other: &Joint) -> bool {
        self.0.iter().all(|b| other.0.binary_search(b).is_ok())
    }

    pub fn contains(&self, basic: usize) -> bool {
        self.0.binary_search(&basic).is_ok()
    }
}

/// Basic measurements together with the family of comeasurable sets, closed
/// under nonempty subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementSetup {
    basics: Vec<Measurement>,
    family: BTreeSet<Joint>,
}

impl MeasurementSetup {
    /// Closes `generators` (sets of basic indices) under nonempty subsets and
    /// adds every singleton.
    pub fn new(basics: Vec<Measurement>, generators: &[Vec<usize>]) -> Result<Self, TheoryError> {
        let mut seen = BTreeSet::new();
        for m in &basics {
            if !seen.insert(m.label.as_str()) {
                return Err(TheoryError::DuplicateMeasurement(m.label.clone()));
            }
            let labels: BTreeSet<&str> = m.outcomes.iter().map(|o| o.label.as_str()).collect();
            if m.outcomes.len() < 2 || labels.len() != m.outcomes.len() {
                return Err(TheoryError::BadOutcomes(m.label.clone()));
            }
        }
        let mut family = BTreeSet::new();
        for b in 0..basics.len() {
            family.insert(Joint(vec![b]));
        }
        for g in generators {
            let g = Joint::new(g.clone());
            if g.is_empty() {
                return Err(TheoryError::EmptyJoint);
            }
            if let Some(&bad) = g.0.iter().find(|&&b| b >= basics.len()) {
                return Err(TheoryError::UnknownMeasurement(format!("#{bad}")));
            }
            for mask in 1u64..(1u64 << g.len()) {
                let subset = g
                    .0
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &b)| b)
                    .collect();
                family.insert(Joint(subset));
            }
        }
        Ok(Self { basics, family })
    }

    /// Like [`MeasurementSetup::new`] with generators given by label.
    pub fn from_labels(basics: Vec<Measurement>, generators: &[Vec<&str>]) -> Result<Self, TheoryError> {
        let index = |l: &str| {
            basics
                .iter()
                .position(|m| m.label == l)
                .ok_or_else(|| TheoryError::UnknownMeasurement(l.to_string()))
        };
        let gens = generators
            .iter()
            .map(|g| g.iter().map(|l| index(l)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(basics, &gens)
    }

    pub fn basics(&self) -> &[Measurement] {
        &self.basics
    }

    pub fn family(&self) -> &BTreeSet<Joint> {
        &self.family
    }

    pub fn basic_index(&self, label: &str) -> Option<usize> {
        self.basics.iter().position(|m| m.label == label)
    }

    /// Resolves labels to a joint that must belong to the family.
    pub fn joint(&self, labels: &[&str]) -> Result<Joint, TheoryError> {
        if labels.is_empty() {
            return Err(TheoryError::EmptyJoint);
        }
        let idx = labels
            .iter()
            .map(|l| self.basic_index(l).ok_or_else(|| TheoryError::UnknownMeasurement(l.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let j = Joint::new(idx);
        if !self.family.contains(&j) {
            return Err(TheoryError::NotInFamily(self.name(&j)));
        }
        Ok(j)
    }

    /// Family members not strictly contained in another member.
    pub fn maximal(&self) -> Vec<Joint> {
        self.family
            .iter()
            .filter(|x| !self.family.iter().any(|y| y != *x && x.is_subset_of(y)))
            .cloned()
            .collect()
    }

    pub fn is_maximal(&self, joint: &Joint) -> bool {
        self.family.contains(joint) && !self.family.iter().any(|y| y != joint && joint.is_subset_of(y))
    }

    pub fn name(&self, joint: &Joint) -> String {
        let labels: Vec<&str> = joint.0.iter().map(|&b| self.basics[b].label.as_str()).collect();
        format!("{{{}}}", labels.join(","))
    }

    pub fn outcome_count(&self, joint: &Joint) -> usize {
        joint.0.iter().map(|&b| self.basics[b].outcomes.len()).product()
    }

    /// Mixed-radix decoding of a tuple index; the first basic is most significant.
    pub fn decode(&self, joint: &Joint, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; joint.len()];
        for (slot, &b) in joint.0.iter().enumerate().rev() {
            let k = self.basics[b].outcomes.len();
            out[slot] = index % k;
            index /= k;
        }
        out
    }

    pub fn encode(&self, joint: &Joint, outcome: &[usize]) -> usize {
        joint
            .0
            .iter()
            .zip(outcome)
            .fold(0, |acc, (&b, &o)| acc * self.basics[b].outcomes.len() + o)
    }

    pub fn outcome_name(&self, joint: &Joint, outcome: &[usize]) -> String {
        let parts: Vec<String> = joint
            .0
            .iter()
            .zip(outcome)
            .map(|(&b, &o)| format!("{}={}", self.basics[b].label, self.basics[b].outcomes[o].label))
            .collect();
        format!("({})", parts.join(","))
    }

    /// Sums a distribution over `from`'s outcomes down to the subset `to`.
    pub fn marginalize(&self, from: &Joint, dist: &[f64], to: &Joint) -> Vec<f64> {
        debug_assert!(to.is_subset_of(from));
        let positions: Vec<usize> = to
            .0
            .iter()
            .map(|b| from.0.iter().position(|x| x == b).expect("subset"))
            .collect();
        let mut out = vec![0.0; self.outcome_count(to)];
        for (idx, &p) in dist.iter().enumerate() {
            let full = self.decode(from, idx);
            let sub: Vec<usize> = positions.iter().map(|&pos| full[pos]).collect();
            out[self.encode(to, &sub)] += p;
        }
        out
    }

    /// Restriction of a full outcome assignment (one outcome per basic) to a joint.
    pub fn restrict(&self, joint: &Joint, assignment: &[usize]) -> usize {
        let sub: Vec<usize> = joint.0.iter().map(|&b| assignment[b]).collect();
        self.encode(joint, &sub)
    }
}

/// An operational theory. Construct with [`OperationalTheory::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperationalTheory {
    setup: MeasurementSetup,
    preparations: Vec<String>,
    tables: BTreeMap<Joint, Vec<Vec<f64>>>,
}

fn check_distribution(
    setup: &MeasurementSetup,
    joint: &Joint,
    prep: &str,
    dist: &[f64],
) -> Result<(), TheoryError> {
    if dist.len() != setup.outcome_count(joint) {
        return Err(TheoryError::TableShape {
            joint: setup.name(joint),
            reason: format!("{} entries, expected {}", dist.len(), setup.outcome_count(joint)),
        });
    }
    if let Some(&v) = dist.iter().find(|&&v| v < -NORMALIZATION_TOLERANCE || !v.is_finite()) {
        return Err(TheoryError::Negative {
            joint: setup.name(joint),
            preparation: prep.to_string(),
            value: v,
        });
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(TheoryError::NotNormalized {
            joint: setup.name(joint),
            preparation: prep.to_string(),
            sum,
        });
    }
    Ok(())
}

pub(crate) fn check_labels_unique(labels: &[String]) -> Result<(), TheoryError> {
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(TheoryError::DuplicatePreparation(l.clone()));
        }
    }
    Ok(())
}

impl OperationalTheory {
    /// `tables[joint][preparation][tuple]`. Every maximal joint needs a table.
    pub fn new(
        setup: MeasurementSetup,
        preparations: Vec<String>,
        tables: BTreeMap<Joint, Vec<Vec<f64>>>,
    ) -> Result<Self, TheoryError> {
        if preparations.is_empty() {
            return Err(TheoryError::NoPreparations);
        }
        check_labels_unique(&preparations)?;
        for (joint, per_prep) in &tables {
            if !setup.family.contains(joint) {
                return Err(TheoryError::NotInFamily(setup.name(joint)));
            }
            if per_prep.len() != preparations.len() {
                return Err(TheoryError::TableShape {
                    joint: setup.name(joint),
                    reason: format!("{} preparations, expected {}", per_prep.len(), preparations.len()),
                });
            }
            for (dist, prep) in per_prep.iter().zip(&preparations) {
                check_distribution(&setup, joint, prep, dist)?;
            }
        }
        for m in setup.maximal() {
            if !tables.contains_key(&m) {
                return Err(TheoryError::MissingTable(setup.name(&m)));
            }
        }
        Ok(Self {
            setup,
            preparations,
            tables,
        })
    }

    pub fn setup(&self) -> &MeasurementSetup {
        &self.setup
    }

    pub fn preparations(&self) -> &[String] {
        &self.preparations
    }

    pub fn tables(&self) -> &BTreeMap<Joint, Vec<Vec<f64>>> {
        &self.tables
    }

    pub fn preparation_index(&self, label: &str) -> Result<usize, TheoryError> {
        self.preparations
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| TheoryError::UnknownPreparation(label.to_string()))
    }

    /// Outcome distribution of `x` under preparation `r`.
    ///
    /// Uses `x`'s own table when it has one; otherwise marginalizes every
    /// tabulated joint containing `x` and requires them to agree within
    /// [`TABLE_TOLERANCE`].
    pub fn distribution(&self, x: &Joint, r: usize) -> Result<Vec<f64>, TheoryError> {
        if !self.setup.family.contains(x) {
            return Err(TheoryError::NotInFamily(self.setup.name(x)));
        }
        if let Some(t) = self.tables.get(x) {
            return Ok(t[r].clone());
        }
        let mut result: Option<(Vec<f64>, &Joint)> = None;
        for (y, t) in self.tables.iter().filter(|(y, _)| x.is_subset_of(y)) {
            let m = self.setup.marginalize(y, &t[r], x);
            match &result {
                None => result = Some((m, y)),
                Some((first, first_src)) => {
                    if let Some(k) = (0..m.len()).find(|&k| (m[k] - first[k]).abs() > TABLE_TOLERANCE) {
                        return Err(TheoryError::Ambiguous {
                            joint: self.setup.name(x),
                            first_source: self.setup.name(first_src),
                            second_source: self.setup.name(y),
                            preparation: self.preparations[r].clone(),
                            first: first[k],
                            second: m[k],
                        });
                    }
                }
            }
        }
        Ok(result.expect("every family member lies below a maximal joint").0)
    }

    /// `p(X^k | x ∧ r)` for an outcome event of `x`.
    pub fn marginal(&self, x: &Joint, event: &[usize], r: usize) -> Result<f64, TheoryError> {
        if event.len() != x.len() {
            return Err(TheoryError::EventLength {
                joint: self.setup.name(x),
                got: event.len(),
                expected: x.len(),
            });
        }
        let dist = self.distribution(x, r)?;
        Ok(dist[self.setup.encode(x, event)])
    }

    /// Outcome tuples (as indices) with probability above
    /// [`SUPPORT_THRESHOLD`] in at least one preparation.
    pub fn support(&self, x: &Joint) -> Result<Vec<usize>, TheoryError> {
        let mut possible = vec![false; self.setup.outcome_count(x)];
        for r in 0..self.preparations.len() {
            for (k, p) in self.distribution(x, r)?.into_iter().enumerate() {
                if p > SUPPORT_THRESHOLD {
                    possible[k] = true;
                }
            }
        }
        Ok(possible
            .into_iter()
            .enumerate()
            .filter_map(|(k, b)| b.then_some(k))
            .collect())
    }

    /// Preparations in which every outcome of `x` has probability 0 or 1.
    pub fn eigenstate_preparations(&self, x: &Joint) -> Result<Vec<usize>, TheoryError> {
        let mut out = Vec::new();
        for r in 0..self.preparations.len() {
            let dist = self.distribution(x, r)?;
            if dist
                .iter()
                .all(|&p| p.abs() <= TABLE_TOLERANCE || (p - 1.0).abs() <= TABLE_TOLERANCE)
            {
                out.push(r);
            }
        }
        Ok(out)
    }

    /// Checks no-disturbance: every way of obtaining the statistics of a family
    /// member (its own table or the marginal of any larger tabulated joint)
    /// must agree in every preparation.
    pub fn is_nondisturbing(&self) -> NonDisturbance {
        let mut violations = Vec::new();
        for x in &self.setup.family {
            let mut sources: Vec<(&Joint, &Vec<Vec<f64>>)> = Vec::new();
            if let Some(t) = self.tables.get(x) {
                sources.push((x, t));
            }
            sources.extend(self.tables.iter().filter(|(y, _)| *y != x && x.is_subset_of(y)));
            let Some(((ref_joint, ref_table), rest)) = sources.split_first() else {
                continue;
            };
            for r in 0..self.preparations.len() {
                let reference = self.setup.marginalize(ref_joint, &ref_table[r], x);
                for (y, t) in rest {
                    let other = self.setup.marginalize(y, &t[r], x);
                    for k in 0..reference.len() {
                        if (reference[k] - other[k]).abs() > TABLE_TOLERANCE {
                            violations.push(DisturbanceWitness {
                                measurement: self.setup.name(x),
                                reference: self.setup.name(ref_joint),
                                context: self.setup.name(y),
                                outcome: self.setup.outcome_name(x, &self.setup.decode(x, k)),
                                preparation: self.preparations[r].clone(),
                                reference_probability: reference[k],
                                context_probability: other[k],
                            });
                        }
                    }
                }
            }
        }
        NonDisturbance {
            holds: violations.is_empty(),
            violations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceWitness {
    pub measurement: String,
    pub reference: String,
    pub context: String,
    pub outcome: String,
    pub preparation: String,
    pub reference_probability: f64,
    pub context_probability: f64,
}

impl fmt::Display for DisturbanceWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p{} of {} under {}: {} via {} vs {} via {}",
            self.outcome,
            self.measurement,
            self.preparation,
            self.reference_probability,
            self.reference,
            self.context_probability,
            self.context
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonDisturbance {
    pub holds: bool,
    pub violations: Vec<DisturbanceWitness>,
}

/// Basic measurements induced by a realization: one per measurement label,
/// each carrying the operators of the vertices it realizes.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedMeasurement {
    pub measurement: Measurement,
    pub vertices: Vec<usize>,
    pub operators: Vec<PauliString>,
}

/// Collects the measurements of a realization in order of first appearance.
pub fn realized_measurements(graph: &KsGraph, realization: &Realization) -> Result<Vec<RealizedMeasurement>, TheoryError> {
    if realization.num_vertices() != graph.num_vertices() {
        return Err(TheoryError::RealizationSize {
            got: realization.num_vertices(),
            expected: graph.num_vertices(),
        });
    }
    let mut out: Vec<RealizedMeasurement> = Vec::new();
    for label in realization.measurement_labels() {
        let vertices = realization.vertices_of(&label);
        let operators: Vec<PauliString> = vertices.iter().map(|&v| graph.vertices()[v].operator.clone()).collect();
        for (k, a) in operators.iter().enumerate() {
            for b in &operators[k + 1..] {
                if !a.commutes(b).unwrap_or(false) {
                    return Err(TheoryError::NonCommutingMeasurement { measurement: label });
                }
            }
        }
        let measurement = if vertices.len() == 1 {
            Measurement::signed(label.clone())
        } else {
            let outcomes = crate::graph::all_sign_tuples(vertices.len())
                .iter()
                .enumerate()
                .map(|(k, t)| Outcome {
                    label: crate::pauli::format_tuple(t),
                    value: k as i64,
                })
                .collect();
            Measurement {
                label: label.clone(),
                outcomes,
            }
        };
        out.push(RealizedMeasurement {
            measurement,
            vertices,
            operators,
        });
    }
    Ok(out)
}

/// Builds the operational theory that a realization of `graph` induces on the
/// given quantum states via the Born rule.
///
/// Only comeasurable sets become joint measurements; hyperedges whose
/// measurements are not comeasurable get no joint table.
pub fn from_quantum(
    graph: &KsGraph,
    states: &[(String, DensityOperator)],
    realization: &Realization,
) -> Result<OperationalTheory, TheoryError> {
    if states.is_empty() {
        return Err(TheoryError::NoPreparations);
    }
    let realized = realized_measurements(graph, realization)?;
    let labels: Vec<String> = realized.iter().map(|m| m.measurement.label.clone()).collect();
    let generators: Vec<Vec<usize>> = realization
        .comeasurable_sets(graph)
        .into_iter()
        .map(|set| {
            set.iter()
                .map(|l| labels.iter().position(|x| x == l).expect("label from realization"))
                .collect()
        })
        .collect();
    let setup = MeasurementSetup::new(realized.iter().map(|m| m.measurement.clone()).collect(), &generators)?;

    let mut tables = BTreeMap::new();
    for joint in setup.maximal() {
        let ops: Vec<PauliString> = joint
            .basics()
            .iter()
            .flat_map(|&b| realized[b].operators.iter().cloned())
            .collect();
        for (k, a) in ops.iter().enumerate() {
            for b in &ops[k + 1..] {
                if !a.commutes(b).unwrap_or(false) {
                    return Err(TheoryError::NonCommutingJoint(setup.name(&joint)));
                }
            }
        }
        let n_tuples = setup.outcome_count(&joint);
        let mut per_prep = vec![vec![0.0; n_tuples]; states.len()];
        #[allow(clippy::needless_range_loop)]
        for idx in 0..n_tuples {
            let outcome = setup.decode(&joint, idx);
            let signs: Vec<Sign> = joint
                .basics()
                .iter()
                .zip(&outcome)
                .flat_map(|(&b, &o)| outcome_signs(&realized[b], o))
                .collect();
            let proj = joint_projection(&ops, &signs)?;
            for (r, (_, rho)) in states.iter().enumerate() {
                per_prep[r][idx] = rho.expectation(&proj)?.max(0.0);
            }
        }
        tables.insert(joint, per_prep);
    }
    OperationalTheory::new(setup, states.iter().map(|(l, _)| l.clone()).collect(), tables)
}

fn outcome_signs(m: &RealizedMeasurement, outcome: usize) -> Vec<Sign> {
    let k = m.vertices.len();
    (0..k)
        .map(|pos| {
            if outcome >> (k - 1 - pos) & 1 == 0 {
                Sign::Plus
            } else {
                Sign::Minus
            }
        })
        .collect()
}
