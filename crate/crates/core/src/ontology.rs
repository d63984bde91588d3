//! Ontological models over an operational theory, the noncontextuality and
//! factorization checks, and exhaustive search for noncontextual
//! value-definite models.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operational::{
    check_labels_unique, Joint, MeasurementSetup, OperationalTheory, TheoryError, NORMALIZATION_TOLERANCE,
    TABLE_TOLERANCE,
};

/// Tolerance for comparing response functions of a non-deterministic model.
pub const RESPONSE_TOLERANCE: f64 = 1e-12;
/// Default cap on the number of basic measurements for exhaustive search.
pub const DEFAULT_BASIC_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("no ontic states")]
    NoOnticStates,
    #[error("duplicate ontic state {0:?}")]
    DuplicateOnticState(String),
    #[error("preparation distribution {preparation} has shape or normalization problem: {reason}")]
    PreparationDistribution { preparation: String, reason: String },
    #[error("family member {0} has no response function")]
    MissingResponse(String),
    #[error("response for {joint} at {ontic_state}: {reason}")]
    Response {
        joint: String,
        ontic_state: String,
        reason: String,
    },
    #[error("model and theory describe different measurements or preparations")]
    SetupMismatch,
    #[error("measurement {0} is not two-valued")]
    NotTwoValued(String),
    #[error("{count} basic measurements exceed the search cap of {cap}")]
    Cap { count: usize, cap: usize },
    #[error("pin list has {got} entries, expected {expected}")]
    PinLength { got: usize, expected: usize },
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// An ontological model. `prep_distributions[r][λ]` and
/// `responses[joint][λ][tuple]`; every family member carries a response.
#[derive(Debug, Clone, PartialEq)]
pub struct OntologicalModel {
    setup: MeasurementSetup,
    preparations: Vec<String>,
    ontic_states: Vec<String>,
    prep_distributions: Vec<Vec<f64>>,
    responses: BTreeMap<Joint, Vec<Vec<f64>>>,
}

fn normalized(dist: &[f64]) -> Result<(), String> {
    if let Some(v) = dist.iter().find(|v| **v < -NORMALIZATION_TOLERANCE || !v.is_finite()) {
        return Err(format!("negative entry {v}"));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(format!("sums to {sum}"));
    }
    Ok(())
}

impl OntologicalModel {
    pub fn new(
        setup: MeasurementSetup,
        preparations: Vec<String>,
        ontic_states: Vec<String>,
        prep_distributions: Vec<Vec<f64>>,
        responses: BTreeMap<Joint, Vec<Vec<f64>>>,
    ) -> Result<Self, ModelError> {
        if ontic_states.is_empty() {
            return Err(ModelError::NoOnticStates);
        }
        check_labels_unique(&preparations)?;
        if let Err(TheoryError::DuplicatePreparation(l)) = check_labels_unique(&ontic_states) {
            return Err(ModelError::DuplicateOnticState(l));
        }
        if prep_distributions.len() != preparations.len() {
            return Err(ModelError::PreparationDistribution {
                preparation: "*".into(),
                reason: format!("{} distributions for {} preparations", prep_distributions.len(), preparations.len()),
            });
        }
        for (mu, r) in prep_distributions.iter().zip(&preparations) {
            if mu.len() != ontic_states.len() {
                return Err(ModelError::PreparationDistribution {
                    preparation: r.clone(),
                    reason: format!("{} entries for {} ontic states", mu.len(), ontic_states.len()),
                });
            }
            normalized(mu).map_err(|reason| ModelError::PreparationDistribution {
                preparation: r.clone(),
                reason,
            })?;
        }
        for joint in setup.family() {
            let xi = responses
                .get(joint)
                .ok_or_else(|| ModelError::MissingResponse(setup.name(joint)))?;
            if xi.len() != ontic_states.len() {
                return Err(ModelError::Response {
                    joint: setup.name(joint),
                    ontic_state: "*".into(),
                    reason: format!("{} rows for {} ontic states", xi.len(), ontic_states.len()),
                });
            }
            for (row, lambda) in xi.iter().zip(&ontic_states) {
                let err = |reason| ModelError::Response {
                    joint: setup.name(joint),
                    ontic_state: lambda.clone(),
                    reason,
                };
                if row.len() != setup.outcome_count(joint) {
                    return Err(err(format!("{} entries, expected {}", row.len(), setup.outcome_count(joint))));
                }
                normalized(row).map_err(err)?;
            }
        }
        if let Some(extra) = responses.keys().find(|j| !setup.family().contains(j)) {
            return Err(TheoryError::NotInFamily(setup.name(extra)).into());
        }
        Ok(Self {
            setup,
            preparations,
            ontic_states,
            prep_distributions,
            responses,
        })
    }

    /// Model whose ontic states each fix one outcome per basic measurement,
    /// every joint responding with the induced tuple.
    pub fn deterministic(
        setup: MeasurementSetup,
        preparations: Vec<String>,
        ontic_states: Vec<(String, Vec<usize>)>,
        prep_distributions: Vec<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let mut responses = BTreeMap::new();
        for joint in setup.family() {
            let rows = ontic_states
                .iter()
                .map(|(_, assignment)| {
                    let mut row = vec![0.0; setup.outcome_count(joint)];
                    row[setup.restrict(joint, assignment)] = 1.0;
                    row
                })
                .collect();
            responses.insert(joint.clone(), rows);
        }
        Self::new(
            setup,
            preparations,
            ontic_states.into_iter().map(|(l, _)| l).collect(),
            prep_distributions,
            responses,
        )
    }

    /// Replaces one response row, revalidating the model.
    pub fn with_response(mut self, joint: &Joint, ontic_state: usize, row: Vec<f64>) -> Result<Self, ModelError> {
        let rows = self
            .responses
            .get_mut(joint)
            .ok_or_else(|| TheoryError::NotInFamily(self.setup.name(joint)))?;
        rows[ontic_state] = row;
        Self::new(
            self.setup,
            self.preparations,
            self.ontic_states,
            self.prep_distributions,
            self.responses,
        )
    }

    pub fn setup(&self) -> &MeasurementSetup {
        &self.setup
    }

    pub fn preparations(&self) -> &[String] {
        &self.preparations
    }

    pub fn ontic_states(&self) -> &[String] {
        &self.ontic_states
    }

    pub fn prep_distributions(&self) -> &[Vec<f64>] {
        &self.prep_distributions
    }

    pub fn responses(&self) -> &BTreeMap<Joint, Vec<Vec<f64>>> {
        &self.responses
    }

    /// `Σ_λ μ(λ|r) ξ(·|x, λ)`.
    pub fn predicted(&self, x: &Joint, r: usize) -> Vec<f64> {
        let rows = &self.responses[x];
        let mut out = vec![0.0; self.setup.outcome_count(x)];
        for (lambda, row) in rows.iter().enumerate() {
            let w = self.prep_distributions[r][lambda];
            for (k, p) in row.iter().enumerate() {
                out[k] += w * p;
            }
        }
        out
    }

    /// Operational theory the model predicts. With `every_joint`, each family
    /// member gets its own table, which exposes disturbance in contextual
    /// models; otherwise only maximal joints are tabulated.
    pub fn induced_theory(&self, every_joint: bool) -> Result<OperationalTheory, ModelError> {
        let mut tables = BTreeMap::new();
        for x in self.setup.family() {
            if every_joint || self.setup.is_maximal(x) {
                let rows = (0..self.preparations.len()).map(|r| self.predicted(x, r)).collect();
                tables.insert(x.clone(), rows);
            }
        }
        Ok(OperationalTheory::new(self.setup.clone(), self.preparations.clone(), tables)?)
    }

    fn compatible(&self, theory: &OperationalTheory) -> Result<(), ModelError> {
        if theory.setup() != &self.setup || theory.preparations() != self.preparations.as_slice() {
            return Err(ModelError::SetupMismatch);
        }
        Ok(())
    }

    /// Every tabulated entry of `theory` equals the model's prediction.
    pub fn recovers(&self, theory: &OperationalTheory) -> Result<Check<RecoveryWitness>, ModelError> {
        self.compatible(theory)?;
        let mut witnesses = Vec::new();
        for (x, rows) in theory.tables() {
            for (r, table) in rows.iter().enumerate() {
                let predicted = self.predicted(x, r);
                for k in 0..table.len() {
                    if (predicted[k] - table[k]).abs() > TABLE_TOLERANCE {
                        witnesses.push(RecoveryWitness {
                            joint: self.setup.name(x),
                            preparation: self.preparations[r].clone(),
                            outcome: self.setup.outcome_name(x, &self.setup.decode(x, k)),
                            theory: table[k],
                            model: predicted[k],
                        });
                    }
                }
            }
        }
        Ok(Check::from(witnesses))
    }

    /// Every ontic state fixes the outcome of every maximal joint.
    pub fn is_value_definite(&self) -> bool {
        self.setup.maximal().iter().all(|x| {
            self.responses[x]
                .iter()
                .all(|row| row.iter().all(|&p| p == 0.0 || p == 1.0))
        })
    }

    /// Simultaneous noncontextuality: the response of every family member
    /// equals the marginal of the response of any larger member.
    pub fn is_noncontextual(&self) -> Check<ContextWitness> {
        let tolerance = if self.is_value_definite() { 0.0 } else { RESPONSE_TOLERANCE };
        let mut witnesses = Vec::new();
        for y in self.setup.family() {
            for x in self.setup.family().iter().filter(|x| *x != y && x.is_subset_of(y)) {
                for (lambda, row) in self.responses[y].iter().enumerate() {
                    let via_y = self.setup.marginalize(y, row, x);
                    let own = &self.responses[x][lambda];
                    for k in 0..own.len() {
                        if (via_y[k] - own[k]).abs() > tolerance {
                            witnesses.push(ContextWitness {
                                ontic_state: self.ontic_states[lambda].clone(),
                                measurement: self.setup.name(x),
                                context: self.setup.name(y),
                                outcome: self.setup.outcome_name(x, &self.setup.decode(x, k)),
                                alone: own[k],
                                in_context: via_y[k],
                            });
                        }
                    }
                }
            }
        }
        Check::from(witnesses)
    }

    /// Every joint response is the product of the single-measurement responses.
    pub fn factorizes(&self) -> Check<FactorizationWitness> {
        let mut witnesses = Vec::new();
        for y in self.setup.family().iter().filter(|y| y.len() > 1) {
            for (lambda, row) in self.responses[y].iter().enumerate() {
                for (k, &p) in row.iter().enumerate() {
                    let tuple = self.setup.decode(y, k);
                    let product: f64 = y
                        .basics()
                        .iter()
                        .zip(&tuple)
                        .map(|(&b, &o)| self.responses[&Joint::new(vec![b])][lambda][o])
                        .product();
                    if (p - product).abs() > RESPONSE_TOLERANCE {
                        witnesses.push(FactorizationWitness {
                            ontic_state: self.ontic_states[lambda].clone(),
                            joint: self.setup.name(y),
                            outcome: self.setup.outcome_name(y, &tuple),
                            joint_response: p,
                            product,
                        });
                    }
                }
            }
        }
        Check::from(witnesses)
    }

    /// Spekkens' measurement noncontextuality: operationally equivalent events
    /// get equal responses at every ontic state.
    ///
    /// An event is an outcome of a family member `x` observed as part of a
    /// context `y ⊇ x`; its statistics are the marginal of `y`'s statistics.
    /// Contexts whose statistics are ambiguous in the theory are skipped.
    pub fn satisfies_spekkens(&self, theory: &OperationalTheory) -> Result<Check<SpekkensWitness>, ModelError> {
        self.compatible(theory)?;
        struct Event {
            name: String,
            probabilities: Vec<f64>,
            responses: Vec<f64>,
        }
        let mut events: Vec<Event> = Vec::new();
        'contexts: for y in self.setup.family() {
            let mut stats = Vec::with_capacity(self.preparations.len());
            for r in 0..self.preparations.len() {
                match theory.distribution(y, r) {
                    Ok(d) => stats.push(d),
                    Err(TheoryError::Ambiguous { .. }) => continue 'contexts,
                    Err(e) => return Err(e.into()),
                }
            }
            for x in self.setup.family().iter().filter(|x| x.is_subset_of(y)) {
                let margins: Vec<Vec<f64>> = stats.iter().map(|d| self.setup.marginalize(y, d, x)).collect();
                let resp: Vec<Vec<f64>> = self.responses[y]
                    .iter()
                    .map(|row| self.setup.marginalize(y, row, x))
                    .collect();
                for k in 0..self.setup.outcome_count(x) {
                    events.push(Event {
                        name: format!(
                            "{} in {}",
                            self.setup.outcome_name(x, &self.setup.decode(x, k)),
                            self.setup.name(y)
                        ),
                        probabilities: margins.iter().map(|m| m[k]).collect(),
                        responses: resp.iter().map(|m| m[k]).collect(),
                    });
                }
            }
        }
        let mut witnesses = Vec::new();
        for (i, a) in events.iter().enumerate() {
            for b in &events[i + 1..] {
                let equivalent = a
                    .probabilities
                    .iter()
                    .zip(&b.probabilities)
                    .all(|(p, q)| (p - q).abs() <= TABLE_TOLERANCE);
                if !equivalent {
                    continue;
                }
                for lambda in 0..self.ontic_states.len() {
                    if (a.responses[lambda] - b.responses[lambda]).abs() > RESPONSE_TOLERANCE {
                        witnesses.push(SpekkensWitness {
                            first: a.name.clone(),
                            second: b.name.clone(),
                            ontic_state: self.ontic_states[lambda].clone(),
                            first_response: a.responses[lambda],
                            second_response: b.responses[lambda],
                        });
                    }
                }
            }
        }
        Ok(Check::from(witnesses))
    }

    /// All structural properties at once; theory-dependent ones when a theory is given.
    pub fn classify(&self, theory: Option<&OperationalTheory>) -> Result<ModelClassification, ModelError> {
        let (recovers, spekkens) = match theory {
            Some(t) => (
                Some(self.recovers(t)?.holds),
                Some(self.satisfies_spekkens(t)?.holds),
            ),
            None => (None, None),
        };
        Ok(ModelClassification {
            value_definite: self.is_value_definite(),
            noncontextual: self.is_noncontextual().holds,
            factorizes: self.factorizes().holds,
            recovers,
            spekkens,
        })
    }
}

/// Outcome of a check together with every violation found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check<W> {
    pub holds: bool,
    pub witnesses: Vec<W>,
}

impl<W> From<Vec<W>> for Check<W> {
    fn from(witnesses: Vec<W>) -> Self {
        Self {
            holds: witnesses.is_empty(),
            witnesses,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryWitness {
    pub joint: String,
    pub preparation: String,
    pub outcome: String,
    pub theory: f64,
    pub model: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextWitness {
    pub ontic_state: String,
    pub measurement: String,
    pub context: String,
    pub outcome: String,
    pub alone: f64,
    pub in_context: f64,
}

impl fmt::Display for ContextWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "at {}: {} of {} responds {} alone, {} inside {}",
            self.ontic_state, self.outcome, self.measurement, self.alone, self.in_context, self.context
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationWitness {
    pub ontic_state: String,
    pub joint: String,
    pub outcome: String,
    pub joint_response: f64,
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpekkensWitness {
    pub first: String,
    pub second: String,
    pub ontic_state: String,
    pub first_response: f64,
    pub second_response: f64,
}

impl fmt::Display for SpekkensWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} and {} are equivalent but respond {} vs {} at {}",
            self.first, self.second, self.first_response, self.second_response, self.ontic_state
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelClassification {
    pub value_definite: bool,
    pub noncontextual: bool,
    pub factorizes: bool,
    pub recovers: Option<bool>,
    pub spekkens: Option<bool>,
}

/// Result of [`search_ncvd`]: every outcome assignment to the basic
/// measurements compatible with all tabulated supports.
#[derive(Debug, Clone, PartialEq)]
pub struct NcvdSearch {
    pub witnesses: Vec<Vec<usize>>,
    /// One ontic state per witness; preparation distributions are uniform
    /// placeholders, so this model reproduces supports, not probabilities.
    pub model: Option<OntologicalModel>,
}

impl NcvdSearch {
    pub fn satisfiable(&self) -> bool {
        !self.witnesses.is_empty()
    }
}

fn check_searchable(theory: &OperationalTheory, cap: usize) -> Result<(), ModelError> {
    let basics = theory.setup().basics();
    if basics.len() > cap {
        return Err(ModelError::Cap {
            count: basics.len(),
            cap,
        });
    }
    if let Some(m) = basics.iter().find(|m| m.outcomes.len() != 2) {
        return Err(ModelError::NotTwoValued(m.label.clone()));
    }
    Ok(())
}

/// `possible[joint][tuple]` for every tabulated joint.
fn support_masks(theory: &OperationalTheory) -> Result<Vec<(Joint, Vec<bool>)>, ModelError> {
    theory
        .tables()
        .keys()
        .map(|x| {
            let mut mask = vec![false; theory.setup().outcome_count(x)];
            for k in theory.support(x)? {
                mask[k] = true;
            }
            Ok((x.clone(), mask))
        })
        .collect()
}

fn assignment(n: usize, counter: u64) -> Vec<usize> {
    (0..n).map(|b| (counter >> (n - 1 - b) & 1) as usize).collect()
}

/// Exhaustive search for noncontextual value-definite models.
///
/// Such a model is an outcome assignment to every basic measurement (all
/// joints then respond with the induced tuple) whose restriction to each
/// tabulated joint lies in that joint's support. Assignments are visited in
/// lexicographic order with each measurement's first outcome first.
pub fn search_ncvd(theory: &OperationalTheory, cap: usize) -> Result<NcvdSearch, ModelError> {
    search_ncvd_pinned(theory, &vec![None; theory.setup().basics().len()], cap)
}

/// Like [`search_ncvd`] with some basic measurements' outcomes fixed.
pub fn search_ncvd_pinned(theory: &OperationalTheory, pins: &[Option<usize>], cap: usize) -> Result<NcvdSearch, ModelError> {
    check_searchable(theory, cap)?;
    let setup = theory.setup();
    let n = setup.basics().len();
    if pins.len() != n {
        return Err(ModelError::PinLength {
            got: pins.len(),
            expected: n,
        });
    }
    let masks = support_masks(theory)?;
    let mut witnesses = Vec::new();
    for counter in 0..(1u64 << n) {
        let a = assignment(n, counter);
        if pins.iter().zip(&a).any(|(p, v)| p.is_some_and(|p| p != *v)) {
            continue;
        }
        if masks.iter().all(|(x, mask)| mask[setup.restrict(x, &a)]) {
            witnesses.push(a);
        }
    }
    let model = if witnesses.is_empty() {
        None
    } else {
        let uniform = vec![1.0 / witnesses.len() as f64; witnesses.len()];
        let states = witnesses
            .iter()
            .map(|a| {
                let name = a
                    .iter()
                    .enumerate()
                    .map(|(b, &o)| format!("{}={}", setup.basics()[b].label, setup.basics()[b].outcomes[o].label))
                    .collect::<Vec<_>>()
                    .join(",");
                (format!("λ[{name}]"), a.clone())
            })
            .collect();
        Some(OntologicalModel::deterministic(
            setup.clone(),
            theory.preparations().to_vec(),
            states,
            vec![uniform; theory.preparations().len()],
        )?)
    };
    Ok(NcvdSearch { witnesses, model })
}

/// Smallest fraction of maximal joints whose support a single outcome
/// assignment must miss.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationFraction {
    pub violated: usize,
    pub total: usize,
    pub best_assignment: Vec<usize>,
}

impl ViolationFraction {
    pub fn fraction(&self) -> Rational64 {
        Rational64::new(self.violated as i64, self.total as i64)
    }
}

pub fn min_violation_fraction(theory: &OperationalTheory, cap: usize) -> Result<ViolationFraction, ModelError> {
    check_searchable(theory, cap)?;
    let setup = theory.setup();
    let n = setup.basics().len();
    let maximal = setup.maximal();
    let masks: Vec<(Joint, Vec<bool>)> = support_masks(theory)?
        .into_iter()
        .filter(|(x, _)| maximal.contains(x))
        .collect();
    let mut best = ViolationFraction {
        violated: usize::MAX,
        total: masks.len(),
        best_assignment: Vec::new(),
    };
    for counter in 0..(1u64 << n) {
        let a = assignment(n, counter);
        let violated = masks.iter().filter(|(x, mask)| !mask[setup.restrict(x, &a)]).count();
        if violated < best.violated {
            best.violated = violated;
            best.best_assignment = a;
            if violated == 0 {
                break;
            }
        }
    }
    Ok(best)
}
