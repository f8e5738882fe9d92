use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::Outcome;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] polyext::Error),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid JSON in {path}: {source}")]
    Json { path: String, source: serde_json::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(_) => "validation",
            CliError::Io { .. } => "io",
            CliError::Json { .. } => "format",
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

#[derive(Serialize)]
pub struct RunReport {
    command: Vec<String>,
    inputs_digest: String,
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    status: &'static str,
    result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
    #[serde(skip)]
    human: String,
}

impl RunReport {
    pub fn new(command: Vec<String>, out: Outcome, elapsed: Option<Duration>) -> Self {
        RunReport {
            command,
            inputs_digest: out.digest,
            mode: if out.tol.is_some() { "float-tol" } else { "exact" },
            tol: out.tol,
            status: match out.code {
                0 => "ok",
                3 => "infeasible",
                _ => "failed",
            },
            result: out.result,
            elapsed_ms: elapsed.map(|d| d.as_secs_f64() * 1e3),
            human: out.human,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn human(&self) -> String {
        let mut s = self.human.trim_end().to_string();
        if let Some(ms) = self.elapsed_ms {
            s.push_str(&format!("\n({ms:.1} ms)"));
        }
        s
    }
}
