//! Machine-readable run records, one JSON object per line.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use optobs_core::decomp::{AgStats, SolveStatus};

/// What was solved: world, problem and query parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InstanceDesc {
    /// Model shorthand (`line:249`) or a file path.
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    pub problem: String,
    pub budget: usize,
    pub threshold: String,
    pub strict: bool,
    pub mode: String,
}

/// Encoding regime of the run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EncodingDesc {
    pub encoding: String,
    pub pseudo_boolean: bool,
    pub bellman: String,
    pub relax: bool,
    pub fallback: bool,
}

/// One benchmark result row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: InstanceDesc,
    pub method: String,
    pub encoding: EncodingDesc,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reward: Option<f64>,
    pub time_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<RunStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Resume key: hash of instance, method and encoding.
    pub key: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunStats {
    pub candidates_ranked: usize,
    pub oracle_calls: usize,
    pub fast_path_hits: usize,
    pub unknown_results: usize,
    pub early_terminated: bool,
    pub used_fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_star: Option<usize>,
}

impl From<&AgStats> for RunStats {
    fn from(s: &AgStats) -> RunStats {
        RunStats {
            candidates_ranked: s.candidates_ranked,
            oracle_calls: s.oracle_calls,
            fast_path_hits: s.fast_path_hits,
            unknown_results: s.unknown_results,
            early_terminated: s.early_terminated,
            used_fallback: s.used_fallback,
            b_star: s.b_star,
        }
    }
}

pub fn status_str(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Sat => "sat",
        SolveStatus::Unsat => "unsat",
        SolveStatus::Unknown => "unknown",
        SolveStatus::Timeout => "timeout",
    }
}

/// Exit code convention: sat 0, unsat 1, unknown/timeout 2.
pub fn status_exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Sat => 0,
        SolveStatus::Unsat => 1,
        SolveStatus::Unknown | SolveStatus::Timeout => 2,
    }
}

/// Stable resume key over the instance descriptor and regime.
pub fn descriptor_key(instance: &InstanceDesc, method: &str, encoding: &EncodingDesc) -> String {
    let payload = serde_json::json!({
        "instance": instance,
        "method": method,
        "encoding": encoding,
    });
    let digest = Sha256::digest(payload.to_string().as_bytes());
    hex_string(&digest[..16])
}

fn hex_string(bytes: &[u8]) -> String {
    use std::fmt::Write as _;
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (InstanceDesc, EncodingDesc) {
        (
            InstanceDesc {
                model: "line:5".to_string(),
                p: Some("1/2".to_string()),
                problem: "pop".to_string(),
                budget: 2,
                threshold: "4".to_string(),
                strict: false,
                mode: "randomized".to_string(),
            },
            EncodingDesc {
                encoding: "real".to_string(),
                pseudo_boolean: false,
                bellman: "equality".to_string(),
                relax: false,
                fallback: false,
            },
        )
    }

    #[test]
    fn records_round_trip_through_json() {
        let (instance, encoding) = sample();
        let key = descriptor_key(&instance, "smt", &encoding);
        let record = RunRecord {
            instance,
            method: "smt".to_string(),
            encoding,
            status: "sat".to_string(),
            reward: Some(3.0),
            time_ms: 12,
            stats: None,
            error: None,
            key,
        };
        let line = serde_json::to_string(&record).unwrap();
        let back: RunRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back.status, "sat");
        assert_eq!(back.key, record.key);
    }

    #[test]
    fn keys_are_stable_and_discriminating() {
        let (instance, encoding) = sample();
        let k1 = descriptor_key(&instance, "smt", &encoding);
        let k2 = descriptor_key(&instance, "smt", &encoding);
        assert_eq!(k1, k2);
        let k3 = descriptor_key(&instance, "decomp", &encoding);
        assert_ne!(k1, k3);
    }
}
