//! Machine-readable run reports.

use serde::{Serialize, Serializer};
use serde_json::Value;

/// One CLI invocation: what went in, what came out, and which statement it reproduces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub outputs: Value,
    pub anchor: String,
}

impl RunReport {
    pub fn new(command: &str, inputs: Value, outputs: Value, anchor: &str) -> Self {
        RunReport {
            command: command.to_string(),
            inputs,
            outputs,
            anchor: anchor.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only JSON-representable values")
    }
}

/// Serializes any `Display` value as its string form (exact rationals as `"num/den"`).
pub fn serialize_display<T: std::fmt::Display, S: Serializer>(
    value: &T,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_str(value)
}
