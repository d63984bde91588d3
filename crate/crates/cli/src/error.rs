use std::fmt;

use ks_core::graph::GraphError;
use ks_core::ontology::ModelError;
use ks_core::realization::RealizationError;
use ks_core::scenario::ScenarioError;

/// Failure of a command, carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input.
    Parse(String),
    InvalidGraph(String),
    /// The scenario lacks a block the command needs.
    Missing(String),
    /// A search would exceed the configured cap.
    Cap(String),
    BadArgument(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::InvalidGraph(_) => 3,
            CliError::Missing(_) => 4,
            CliError::Cap(_) => 5,
            CliError::BadArgument(_) => 6,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Parse(m) => ("parse error", m),
            CliError::InvalidGraph(m) => ("invalid graph", m),
            CliError::Missing(m) => ("missing block", m),
            CliError::Cap(m) => ("over cap", m),
            CliError::BadArgument(m) => ("bad argument", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        let msg = e.to_string();
        match e {
            ScenarioError::Parse { .. } | ScenarioError::Invalid { .. } => CliError::Parse(msg),
            ScenarioError::Graph(g) => CliError::InvalidGraph(g.to_string()),
            ScenarioError::UnknownVertex { .. } => CliError::InvalidGraph(msg),
            ScenarioError::Missing(_) => CliError::Missing(msg),
            ScenarioError::UnknownRealization(_) => CliError::BadArgument(msg),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::VertexCap { .. } => CliError::Cap(e.to_string()),
            _ => CliError::InvalidGraph(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Cap { .. } => CliError::Cap(e.to_string()),
            _ => CliError::BadArgument(e.to_string()),
        }
    }
}

impl From<RealizationError> for CliError {
    fn from(e: RealizationError) -> Self {
        match e {
            RealizationError::Model(m) => m.into(),
            RealizationError::Graph(g) => g.into(),
            RealizationError::Size { .. } | RealizationError::EmptyAssociation(_) => CliError::Parse(e.to_string()),
            _ => CliError::BadArgument(e.to_string()),
        }
    }
}
