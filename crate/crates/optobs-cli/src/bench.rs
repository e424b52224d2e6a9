//! Benchmark harness: runs a TOML manifest of instances on a bounded worker
//! pool and appends one JSON record per line. Re-running a manifest skips
//! rows whose descriptor key already appears in the output file.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Deserialize;

use optobs_core::strategy::StrategyMode;

use crate::inputs::{
    parse_bellman, parse_encoding, parse_mode, parse_model, parse_problem, parse_threshold,
};
use crate::oracle::OracleOptions;
use crate::record::{
    descriptor_key, status_str, EncodingDesc, InstanceDesc, RunRecord, RunStats,
};
use crate::solve::{run_solve, Method, SolveSpec};

#[derive(Debug, Deserialize)]
pub struct Manifest {
    #[serde(rename = "instance")]
    pub instances: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ManifestEntry {
    pub model: String,
    pub p: Option<String>,
    pub problem: String,
    pub budget: usize,
    pub threshold: String,
    #[serde(default)]
    pub strict: bool,
    pub mode: Option<String>,
    #[serde(default = "default_method")]
    pub method: String,
    pub encoding: Option<String>,
    #[serde(default)]
    pub pseudo_boolean: bool,
    pub bellman: Option<String>,
    #[serde(default)]
    pub relax: bool,
    #[serde(default)]
    pub fallback: bool,
    pub timeout_s: Option<u64>,
}

fn default_method() -> String {
    "smt".to_string()
}

/// Summary of a bench run.
#[derive(Debug, Clone, Default)]
pub struct BenchSummary {
    pub ran: usize,
    pub skipped: usize,
    pub sat: usize,
    pub unsat: usize,
    pub unknown: usize,
    pub timeout: usize,
    pub errors: usize,
}

struct Job {
    entry: ManifestEntry,
    instance: InstanceDesc,
    encoding: EncodingDesc,
    method: Method,
    key: String,
}

fn job_of(entry: ManifestEntry) -> Result<Job> {
    let problem = parse_problem(&entry.problem)?;
    let mode = parse_mode(entry.mode.as_deref(), problem)?;
    let method = match entry.method.as_str() {
        "smt" => Method::Smt,
        "decomp" => Method::Decomp,
        other => anyhow::bail!("unknown method `{other}`"),
    };
    let instance = InstanceDesc {
        model: entry.model.clone(),
        p: entry.p.clone(),
        problem: entry.problem.clone(),
        budget: entry.budget,
        threshold: entry.threshold.clone(),
        strict: entry.strict,
        mode: match mode {
            StrategyMode::Deterministic => "deterministic".to_string(),
            StrategyMode::Randomized => "randomized".to_string(),
        },
    };
    let encoding = EncodingDesc {
        encoding: match parse_encoding(entry.encoding.as_deref())? {
            optobs_core::script::VarEncoding::Real => "real".to_string(),
            optobs_core::script::VarEncoding::Boolean => "bool".to_string(),
        },
        pseudo_boolean: entry.pseudo_boolean,
        bellman: match parse_bellman(entry.bellman.as_deref())? {
            optobs_core::script::BellmanForm::Equality => "equality".to_string(),
            optobs_core::script::BellmanForm::Inequality => "inequality".to_string(),
        },
        relax: entry.relax,
        fallback: entry.fallback,
    };
    let key = descriptor_key(&instance, method.as_str(), &encoding);
    Ok(Job {
        entry,
        instance,
        encoding,
        method,
        key,
    })
}

fn run_job(job: &Job, default_timeout: Duration) -> RunRecord {
    let result = (|| -> Result<RunRecord> {
        let entry = &job.entry;
        let problem = parse_problem(&entry.problem)?;
        let mode = parse_mode(entry.mode.as_deref(), problem)?;
        let m = parse_model(&entry.model, entry.p.as_deref())?;
        let tau = parse_threshold(&entry.threshold)?;
        let spec = SolveSpec {
            problem,
            budget: entry.budget,
            tau,
            strict: entry.strict,
            mode,
            method: job.method,
            oracle_options: OracleOptions {
                encoding: parse_encoding(entry.encoding.as_deref())?,
                pseudo_boolean: entry.pseudo_boolean,
                bellman: parse_bellman(entry.bellman.as_deref())?,
            },
            relax: entry.relax,
            fallback: entry.fallback,
            timeout: entry
                .timeout_s
                .map(Duration::from_secs)
                .unwrap_or(default_timeout),
        };
        let report = run_solve(&m, &spec)?;
        Ok(RunRecord {
            instance: job.instance.clone(),
            method: job.method.as_str().to_string(),
            encoding: job.encoding.clone(),
            status: status_str(report.status).to_string(),
            reward: report.reward,
            time_ms: report.wall.as_millis() as u64,
            stats: report.stats.as_ref().map(RunStats::from),
            error: None,
            key: job.key.clone(),
        })
    })();
    result.unwrap_or_else(|e| RunRecord {
        instance: job.instance.clone(),
        method: job.method.as_str().to_string(),
        encoding: job.encoding.clone(),
        status: "error".to_string(),
        reward: None,
        time_ms: 0,
        stats: None,
        error: Some(e.to_string()),
        key: job.key.clone(),
    })
}

/// Keys already present in an output file from an earlier run.
fn completed_keys(path: &Path) -> Result<Vec<String>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).with_context(|| format!("open {}", path.display()))?;
    let mut keys = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(record) = serde_json::from_str::<RunRecord>(&line) {
            // failed rows are retried on resume
            if record.status != "error" {
                keys.push(record.key);
            }
        }
    }
    Ok(keys)
}

/// Runs every manifest instance not yet present in `out`, on `jobs` worker
/// threads, appending records as they complete.
pub fn run_bench(
    manifest_path: &Path,
    out_path: &Path,
    jobs: usize,
    default_timeout: Duration,
) -> Result<BenchSummary> {
    let text = std::fs::read_to_string(manifest_path)
        .with_context(|| format!("read {}", manifest_path.display()))?;
    let manifest: Manifest = toml::from_str(&text)
        .with_context(|| format!("parse {}", manifest_path.display()))?;

    let done = completed_keys(out_path)?;
    let mut summary = BenchSummary::default();
    let mut pending: Vec<Job> = Vec::new();
    for entry in manifest.instances {
        let job = job_of(entry)?;
        if done.contains(&job.key) {
            summary.skipped += 1;
        } else {
            pending.push(job);
        }
    }

    let mut out = OpenOptions::new()
        .create(true)
        .append(true)
        .open(out_path)
        .with_context(|| format!("open {}", out_path.display()))?;

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<RunRecord>();
    let workers = jobs.max(1).min(pending.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let pending = &pending;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = pending.get(i) else { break };
                let record = run_job(job, default_timeout);
                if tx.send(record).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for record in rx.iter() {
            match record.status.as_str() {
                "sat" => summary.sat += 1,
                "unsat" => summary.unsat += 1,
                "unknown" => summary.unknown += 1,
                "timeout" => summary.timeout += 1,
                _ => summary.errors += 1,
            }
            summary.ran += 1;
            let line = serde_json::to_string(&record).expect("record serializes");
            let _ = writeln!(out, "{line}");
            let _ = out.flush();
            println!(
                "{:<28} {:<7} {:<8} {:>8} ms  {}",
                record.instance.model,
                record.method,
                record.status,
                record.time_ms,
                record
                    .reward
                    .map(|r| format!("reward {r:.6}"))
                    .unwrap_or_else(|| record.error.clone().unwrap_or_default())
            );
        }
    });
    Ok(summary)
}
