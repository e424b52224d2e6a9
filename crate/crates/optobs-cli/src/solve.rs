//! One-stop solve driver shared by the CLI and the benchmark harness.

use std::time::{Duration, Instant};

use optobs_core::decomp::{a_g_solve, AgInstance, AgOptions, AgStats, SolveStatus};
use optobs_core::mdp::Mdp;
use optobs_core::obs::ObservationFunction;
use optobs_core::oracle::{FullQuery, OracleStatus, PomdpOracle};
use optobs_core::rational::Rat;
use optobs_core::strategy::{PositionalStrategy, StrategyMode};

use crate::oracle::{solve_ssp_relax_repair, OracleOptions, SmtOracle};
use crate::smt::SolverConfig;

/// Problem variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// Positional observability (randomized strategies by default).
    Pop,
    /// Positional deterministic observability.
    Pdoop,
    /// Sensor selection over location POMDPs.
    Ssp,
}

impl Problem {
    pub fn as_str(&self) -> &'static str {
        match self {
            Problem::Pop => "pop",
            Problem::Pdoop => "pdoop",
            Problem::Ssp => "ssp",
        }
    }
}

/// Solution method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Direct encoding of the whole parametric chain.
    Smt,
    /// Heuristic enumeration over group partitions.
    Decomp,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Smt => "smt",
            Method::Decomp => "decomp",
        }
    }
}

/// A fully specified solve request.
#[derive(Debug, Clone)]
pub struct SolveSpec {
    pub problem: Problem,
    pub budget: usize,
    pub tau: Rat,
    pub strict: bool,
    pub mode: StrategyMode,
    pub method: Method,
    pub oracle_options: OracleOptions,
    /// Relax-and-repair interaction for direct sensor-selection solves.
    pub relax: bool,
    /// Full-encoding fallback after an exhausted enumeration.
    pub fallback: bool,
    pub timeout: Duration,
}

/// Outcome of a solve run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub reward: Option<f64>,
    pub witness_obs: Option<ObservationFunction>,
    pub witness_strategy: Option<PositionalStrategy>,
    pub stats: Option<AgStats>,
    pub wall: Duration,
}

/// Errors of the solve driver.
#[derive(Debug, thiserror::Error)]
pub enum SolveDriverError {
    #[error("pdoop requires deterministic strategies")]
    PdoopNeedsDeterministic,
    #[error("the decomposition method does not enumerate sensor selections; use --method smt")]
    DecompCannotSsp,
    #[error(transparent)]
    Smt(#[from] crate::smt::SmtError),
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("solve: {0}")]
    Decomp(String),
}

fn map_oracle_status(status: OracleStatus) -> SolveStatus {
    match status {
        OracleStatus::Sat => SolveStatus::Sat,
        OracleStatus::Unsat => SolveStatus::Unsat,
        OracleStatus::Unknown => SolveStatus::Unknown,
        OracleStatus::Timeout => SolveStatus::Timeout,
    }
}

/// Runs one request end to end.
pub fn run_solve(m: &Mdp, spec: &SolveSpec) -> Result<SolveReport, SolveDriverError> {
    if spec.problem == Problem::Pdoop && spec.mode != StrategyMode::Deterministic {
        return Err(SolveDriverError::PdoopNeedsDeterministic);
    }
    let start = Instant::now();
    let mut config = SolverConfig::resolve().ok_or(crate::smt::SmtError::NoSolver)?;
    config.timeout = spec.timeout;

    match (spec.method, spec.problem) {
        (Method::Decomp, Problem::Ssp) => Err(SolveDriverError::DecompCannotSsp),
        (Method::Decomp, _) => {
            let mut oracle = SmtOracle::new(config, spec.oracle_options.clone());
            let deadline = start + spec.timeout;
            let mut expired = move || Instant::now() >= deadline;
            let mut options = AgOptions {
                fallback: spec.fallback,
                deadline_expired: Some(&mut expired),
                ..AgOptions::default()
            };
            let inst = AgInstance {
                m,
                budget: spec.budget,
                tau: spec.tau.clone(),
                strict: spec.strict,
                mode: spec.mode,
            };
            let outcome = a_g_solve(&inst, &mut options, &mut oracle)
                .map_err(|e| SolveDriverError::Decomp(e.to_string()))?;
            let (witness_obs, witness_strategy, reward) = match outcome.witness {
                Some((obs, sigma, reward)) => (Some(obs), Some(sigma), Some(reward)),
                None => (None, None, None),
            };
            Ok(SolveReport {
                status: outcome.status,
                reward,
                witness_obs,
                witness_strategy,
                stats: Some(outcome.stats),
                wall: start.elapsed(),
            })
        }
        (Method::Smt, Problem::Ssp) if spec.relax => {
            let result = solve_ssp_relax_repair(
                &config,
                &spec.oracle_options,
                m,
                spec.budget,
                &spec.tau,
                spec.strict,
                spec.mode,
            )
            .map_err(|e| SolveDriverError::Oracle(e.to_string()))?;
            Ok(report_from_full(result, start))
        }
        (Method::Smt, problem) => {
            let mut oracle = SmtOracle::new(config, spec.oracle_options.clone());
            let result = oracle
                .check_full(&FullQuery {
                    m,
                    budget: spec.budget,
                    location: problem == Problem::Ssp,
                    tau: &spec.tau,
                    strict: spec.strict,
                    mode: spec.mode,
                })
                .map_err(|e| SolveDriverError::Oracle(e.to_string()))?;
            Ok(report_from_full(result, start))
        }
    }
}

fn report_from_full(
    result: optobs_core::oracle::FullResult,
    start: Instant,
) -> SolveReport {
    let status = map_oracle_status(result.status);
    let (witness_obs, witness_strategy, reward) = match result.witness {
        Some((obs, sigma, reward)) => (Some(obs), Some(sigma), Some(reward)),
        None => (None, None, None),
    };
    SolveReport {
        status,
        reward,
        witness_obs,
        witness_strategy,
        stats: None,
        wall: start.elapsed(),
    }
}
