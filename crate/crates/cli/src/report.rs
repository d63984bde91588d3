use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Machine-readable result of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub input: Option<String>,
    /// SHA-256 of the scenario document the command read.
    pub input_digest: Option<String>,
    pub verdicts: BTreeMap<String, Value>,
    pub witnesses: Vec<Value>,
    pub elapsed_ms: f64,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Report {
    pub fn new(command: &str, input: Option<(&str, &[u8])>) -> Self {
        Self {
            command: command.to_string(),
            input: input.map(|(name, _)| name.to_string()),
            input_digest: input.map(|(_, bytes)| digest(bytes)),
            verdicts: BTreeMap::new(),
            witnesses: Vec::new(),
            elapsed_ms: 0.0,
        }
    }

    pub fn verdict(&mut self, key: &str, value: impl Serialize) {
        self.verdicts
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable verdict"));
    }

    pub fn witness(&mut self, value: impl Serialize) {
        self.witnesses
            .push(serde_json::to_value(value).expect("serializable witness"));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let headline = self
            .verdicts
            .get("result")
            .map(|v| format!(": {}", plain(v)))
            .unwrap_or_default();
        let input = self.input.as_deref().map(|i| format!(" {i}")).unwrap_or_default();
        writeln!(out, "{}{}{}", self.command, input, headline).unwrap();
        for (k, v) in self.verdicts.iter().filter(|(k, _)| k.as_str() != "result") {
            writeln!(out, "  {}: {}", k.replace('_', " "), plain(v)).unwrap();
        }
        if !self.witnesses.is_empty() {
            writeln!(out, "  witnesses:").unwrap();
            for w in &self.witnesses {
                writeln!(out, "    {}", plain(w)).unwrap();
            }
        }
        writeln!(out, "  elapsed: {:.3} ms", self.elapsed_ms).unwrap();
        out
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            items.iter().map(plain).collect::<Vec<_>>().join(", ")
        }
        other => other.to_string(),
    }
}
