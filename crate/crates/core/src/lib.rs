//! Kochen–Specker graphs over Pauli observables, operational theories and
//! ontological models, and the realization analysis connecting them.

pub mod catalog;
pub mod graph;
pub mod matrix;
pub mod ontology;
pub mod operational;
pub mod pauli;
pub mod quantum;
pub mod realization;
pub mod scenario;
