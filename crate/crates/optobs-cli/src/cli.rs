//! Command-line interface.

use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use optobs_core::decomp::{mpbp, mpbp_linear, SolveStatus};
use optobs_core::obs::ObservationFunction;
use optobs_core::oracle::{fast_path_check, infer_strategy_constraints, ObsQuery, OracleStatus, PomdpOracle};
use optobs_core::solve::MdpAnalysis;
use optobs_core::strategy::StrategyMode;

use crate::bench::run_bench;
use crate::format::{load_obs, save_mdp};
use crate::inputs::{
    parse_bellman, parse_classes, parse_encoding, parse_mode, parse_model, parse_problem,
    parse_sensors, parse_threshold,
};
use crate::oracle::{bisect_brackets, bisect_min_reward, OracleOptions, SmtOracle};
use crate::record::{descriptor_key, status_exit_code, status_str, EncodingDesc, InstanceDesc, RunRecord, RunStats};
use crate::solve::{run_solve, Method, Problem, SolveSpec};

/// Observability synthesis for MDPs: decide whether an observation function
/// within a budget admits a positional strategy meeting a reward threshold.
#[derive(Parser)]
#[command(name = "optobs", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand)]
pub enum CliCommand {
    /// Decide a problem instance.
    Solve(SolveArgs),
    /// Compute the minimal positional budget and its witness.
    Mpbp(MpbpArgs),
    /// Generate a benchmark world as a model file.
    Gen(GenArgs),
    /// Evaluate one observation function against a threshold, or bisect its
    /// minimal expected reward.
    Oracle(OracleArgs),
    /// Run a manifest of instances and record machine-readable results.
    Bench(BenchArgs),
}

#[derive(Args)]
pub struct ModelArgs {
    /// Model shorthand `family:k[:goal=center|corner][:rows=r]`, the word
    /// `trap`, or a path to a model file.
    #[arg(long)]
    pub model: String,
    /// Success probability for the line family (rational, e.g. `1/2`).
    #[arg(long)]
    pub p: Option<String>,
}

#[derive(Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Problem variant: pop, pdoop or ssp.
    #[arg(long)]
    pub problem: String,
    /// Observation budget.
    #[arg(long)]
    pub budget: usize,
    /// Reward threshold as an exact rational, e.g. `125/2`.
    #[arg(long)]
    pub threshold: String,
    /// Use the strict comparison `<` instead of `≤`.
    #[arg(long)]
    pub strict: bool,
    /// Strategy mode: deterministic or randomized.
    #[arg(long)]
    pub mode: Option<String>,
    /// Method: smt (direct encoding) or decomp (heuristic enumeration).
    #[arg(long, default_value = "decomp")]
    pub method: String,
    /// Variable encoding: real or bool.
    #[arg(long)]
    pub encoding: Option<String>,
    /// Use pseudo-boolean cardinality constraints.
    #[arg(long)]
    pub pb: bool,
    /// Bellman constraint form: eq or ineq.
    #[arg(long)]
    pub bellman: Option<String>,
    /// Two-stage relax-and-repair for direct sensor-selection solves.
    #[arg(long)]
    pub relax: bool,
    /// Solve the full encoding after an exhausted enumeration.
    #[arg(long)]
    pub fallback: bool,
    /// Per-query timeout in seconds.
    #[arg(long, default_value_t = 180)]
    pub timeout: u64,
    /// Emit the run record as one JSON line.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args)]
pub struct MpbpArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Scan budgets linearly instead of binary search (cross-check).
    #[arg(long)]
    pub linear: bool,
}

#[derive(Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Activated sensors, e.g. `s1,s2` (location observation function).
    #[arg(long)]
    pub sensors: Option<String>,
    /// Per-non-goal-state class indices, e.g. `0,0,1,1`.
    #[arg(long)]
    pub classes: Option<String>,
    /// Observation function file.
    #[arg(long)]
    pub obs: Option<PathBuf>,
    /// Threshold to check against.
    #[arg(long)]
    pub threshold: Option<String>,
    #[arg(long)]
    pub strict: bool,
    /// Bisect the minimal expected reward instead of checking a threshold.
    #[arg(long)]
    pub bisect: bool,
    /// Bisection tolerance.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Strategy mode: deterministic or randomized.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub encoding: Option<String>,
    #[arg(long)]
    pub pb: bool,
    #[arg(long)]
    pub bellman: Option<String>,
    #[arg(long, default_value_t = 180)]
    pub timeout: u64,
}

#[derive(Args)]
pub struct BenchArgs {
    /// TOML manifest of instances.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output file, one JSON record per line; existing records are skipped.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; defaults to logical cores minus one.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Default per-instance timeout in seconds.
    #[arg(long, default_value_t = 180)]
    pub timeout: u64,
}

/// Runs a parsed command, returning the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        CliCommand::Solve(args) => cmd_solve(args),
        CliCommand::Mpbp(args) => cmd_mpbp(args),
        CliCommand::Gen(args) => cmd_gen(args),
        CliCommand::Oracle(args) => cmd_oracle(args),
        CliCommand::Bench(args) => cmd_bench(args),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<i32> {
    let problem = parse_problem(&args.problem)?;
    let mode = parse_mode(args.mode.as_deref(), problem)?;
    if problem == Problem::Pdoop && mode == StrategyMode::Randomized {
        bail!("--problem pdoop requires --mode deterministic");
    }
    let method = match args.method.as_str() {
        "smt" => Method::Smt,
        "decomp" => Method::Decomp,
        other => bail!("unknown method `{other}`"),
    };
    let m = parse_model(&args.model.model, args.model.p.as_deref())?;
    let tau = parse_threshold(&args.threshold)?;
    let spec = SolveSpec {
        problem,
        budget: args.budget,
        tau: tau.clone(),
        strict: args.strict,
        mode,
        method,
        oracle_options: OracleOptions {
            encoding: parse_encoding(args.encoding.as_deref())?,
            pseudo_boolean: args.pb,
            bellman: parse_bellman(args.bellman.as_deref())?,
        },
        relax: args.relax,
        fallback: args.fallback,
        timeout: Duration::from_secs(args.timeout),
    };
    let report = run_solve(&m, &spec)?;

    let cmp = if args.strict { "<" } else { "<=" };
    println!(
        "{:<24} {:<6} B={} τ {} {:<12} {:<8} {:>10.3?}{}",
        args.model.model,
        problem.as_str(),
        args.budget,
        cmp,
        args.threshold,
        status_str(report.status),
        report.wall,
        report
            .reward
            .map(|r| format!("  reward {r:.6}"))
            .unwrap_or_default()
    );
    if let Some(obs) = &report.witness_obs {
        println!("witness: {}", summarize_obs(obs));
    }
    if args.json {
        let instance = InstanceDesc {
            model: args.model.model.clone(),
            p: args.model.p.clone(),
            problem: args.problem.clone(),
            budget: args.budget,
            threshold: args.threshold.clone(),
            strict: args.strict,
            mode: match mode {
                StrategyMode::Deterministic => "deterministic".into(),
                StrategyMode::Randomized => "randomized".into(),
            },
        };
        let encoding = EncodingDesc {
            encoding: args.encoding.clone().unwrap_or_else(|| "real".into()),
            pseudo_boolean: args.pb,
            bellman: args.bellman.clone().unwrap_or_else(|| "equality".into()),
            relax: args.relax,
            fallback: args.fallback,
        };
        let key = descriptor_key(&instance, method.as_str(), &encoding);
        let record = RunRecord {
            instance,
            method: method.as_str().into(),
            encoding,
            status: status_str(report.status).into(),
            reward: report.reward,
            time_ms: report.wall.as_millis() as u64,
            stats: report.stats.as_ref().map(RunStats::from),
            error: None,
            key,
        };
        println!("{}", serde_json::to_string(&record)?);
    }
    Ok(status_exit_code(report.status))
}

fn cmd_mpbp(args: MpbpArgs) -> Result<i32> {
    let m = parse_model(&args.model.model, args.model.p.as_deref())?;
    let analysis = MdpAnalysis::analyze(&m, 1e-9, 1e-6)?;
    let result = if args.linear {
        mpbp_linear(&m, &analysis)?
    } else {
        mpbp(&m, &analysis)?
    };
    println!("B* = {}", result.b_star);
    println!("witness: {}", summarize_obs(&result.witness.obs));
    Ok(0)
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let m = parse_model(&args.model.model, args.model.p.as_deref())?;
    save_mdp(&m, &args.out)?;
    println!(
        "wrote {} ({} states, {} actions)",
        args.out.display(),
        m.n_states(),
        m.n_actions()
    );
    Ok(0)
}

fn cmd_oracle(args: OracleArgs) -> Result<i32> {
    let m = parse_model(&args.model.model, args.model.p.as_deref())?;
    let obs = match (&args.sensors, &args.classes, &args.obs) {
        (Some(sensors), None, None) => {
            ObservationFunction::location(&m, &parse_sensors(sensors)?)?
        }
        (None, Some(classes), None) => {
            let classes = parse_classes(classes)?;
            let width = classes.iter().copied().max().map_or(1, |c| c + 1);
            ObservationFunction::general(&m, width, &classes)?
        }
        (None, None, Some(path)) => load_obs(path, &m)?,
        _ => bail!("give exactly one of --sensors, --classes or --obs"),
    };
    obs.validate(&m)?;
    let mode = parse_mode(args.mode.as_deref(), Problem::Pop)?;
    let analysis = MdpAnalysis::analyze(&m, 1e-9, 1e-6)?;
    let options = OracleOptions {
        encoding: parse_encoding(args.encoding.as_deref())?,
        pseudo_boolean: args.pb,
        bellman: parse_bellman(args.bellman.as_deref())?,
    };
    let mut oracle = SmtOracle::from_env(options, Duration::from_secs(args.timeout))?;

    if args.bisect {
        let (lo, hi) = bisect_brackets(&m, &analysis);
        let value = bisect_min_reward(&mut oracle, &m, &analysis, &obs, lo, hi, args.tol, mode)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        println!("{} minimal expected reward ≈ {value:.6}", summarize_obs(&obs));
        return Ok(0);
    }

    let Some(threshold) = args.threshold.as_deref() else {
        bail!("give --threshold or --bisect");
    };
    let tau = parse_threshold(threshold)?;
    let result = match fast_path_check(&m, &analysis, &obs, &tau, args.strict) {
        Some(res) => res,
        None => {
            let constraints = infer_strategy_constraints(&m, &obs, &analysis.signatures);
            oracle.check_obs(&ObsQuery {
                m: &m,
                analysis: &analysis,
                obs: &obs,
                constraints: &constraints,
                tau: &tau,
                strict: args.strict,
                mode,
            })?
        }
    };
    let status = match result.status {
        OracleStatus::Sat => SolveStatus::Sat,
        OracleStatus::Unsat => SolveStatus::Unsat,
        OracleStatus::Unknown => SolveStatus::Unknown,
        OracleStatus::Timeout => SolveStatus::Timeout,
    };
    println!(
        "{} {} τ {} {}{}",
        summarize_obs(&obs),
        if args.strict { "<" } else { "<=" },
        threshold,
        status_str(status),
        result
            .reward
            .map(|r| format!("  reward {r:.6}"))
            .unwrap_or_default()
    );
    Ok(status_exit_code(status))
}

fn cmd_bench(args: BenchArgs) -> Result<i32> {
    let jobs = args.jobs.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get().saturating_sub(1).max(1))
            .unwrap_or(1)
    });
    let summary = run_bench(
        &args.manifest,
        &args.out,
        jobs,
        Duration::from_secs(args.timeout),
    )?;
    println!(
        "ran {} (skipped {}): {} sat, {} unsat, {} unknown, {} timeout, {} errors",
        summary.ran,
        summary.skipped,
        summary.sat,
        summary.unsat,
        summary.unknown,
        summary.timeout,
        summary.errors
    );
    Ok(if summary.errors > 0 { 3 } else { 0 })
}

/// Short human rendering of an observation function.
fn summarize_obs(obs: &ObservationFunction) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    match obs.kind {
        optobs_core::obs::ObsKind::Location => {
            let sensors: Vec<String> = obs.sensors().iter().map(|s| format!("@s{s}")).collect();
            let _ = write!(out, "sensors {{{}}}", sensors.join(","));
        }
        optobs_core::obs::ObsKind::General => {
            let mut parts = Vec::new();
            for label in obs.classes() {
                let members: Vec<String> =
                    obs.members(label).iter().map(|s| format!("s{s}")).collect();
                parts.push(format!("{label}={{{}}}", members.join(",")));
            }
            let _ = write!(out, "{}", parts.join(" "));
        }
    }
    out
}
