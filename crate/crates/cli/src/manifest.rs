//! Run manifests written next to every report.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical JSON of the parsed inputs.
    pub inputs_hash: String,
    pub tool_version: String,
    pub timings: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: &Value, timings: BTreeMap<String, f64>, outputs: Vec<String>) -> Self {
        RunManifest {
            command: command.to_string(),
            inputs_hash: inputs_hash(inputs),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timings,
            outputs,
        }
    }
}

/// Hash of the compact JSON form. `serde_json` maps keep keys sorted, so equal
/// inputs give equal hashes.
pub fn inputs_hash(inputs: &Value) -> String {
    hex::encode(Sha256::digest(serde_json::to_string(inputs).unwrap().as_bytes()))
}

pub fn to_pretty_json(v: &Value) -> String {
    serde_json::to_string_pretty(v).unwrap()
}
