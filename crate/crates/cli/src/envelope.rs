use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Wrapper written for every command.
///
/// `payload_sha256` covers `command`, `config`, `passed` and `payload`;
/// `version` and `duration_ms` sit outside the hashed region.
#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub command: String,
    pub config: Value,
    pub passed: bool,
    pub payload: Value,
    pub payload_sha256: String,
    pub version: String,
    pub duration_ms: u128,
}

impl ReportEnvelope {
    pub fn new(
        command: &str,
        config: Value,
        passed: bool,
        payload: Value,
        started: Instant,
    ) -> Self {
        let hashed = json!({
            "command": command,
            "config": config,
            "passed": passed,
            "payload": payload,
        });
        let bytes = serde_json::to_vec(&hashed).expect("JSON values always serialize");
        let payload_sha256 = hex::encode(Sha256::digest(&bytes));
        Self {
            command: command.to_string(),
            config,
            passed,
            payload,
            payload_sha256,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_ms: started.elapsed().as_millis(),
        }
    }

    /// Process exit code for this report: 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("JSON values always serialize")
    }
}
