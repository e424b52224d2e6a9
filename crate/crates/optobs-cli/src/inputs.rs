//! Parsing of command-line and manifest inputs: model shorthands,
//! thresholds, modes and encoding names.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use optobs_core::mdp::Mdp;
use optobs_core::rational::{one, parse_rat, Rat};
use optobs_core::script::{BellmanForm, VarEncoding};
use optobs_core::strategy::StrategyMode;
use optobs_core::worlds::{self, GoalMode};

use crate::format::load_mdp;
use crate::solve::Problem;

/// Builds a model from the shorthand `family:k[:goal=center|corner][:rows=r]`
/// or loads it from a file path. `p` applies to the line family only.
pub fn parse_model(model: &str, p: Option<&str>) -> Result<Mdp> {
    let p_rat = match p {
        Some(text) => parse_rat(text).map_err(|e| anyhow!("{e}"))?,
        None => one(),
    };
    if let Some((family, rest)) = model.split_once(':') {
        let mut parts = rest.split(':');
        let k: usize = parts
            .next()
            .ok_or_else(|| anyhow!("missing size in `{model}`"))?
            .parse()
            .with_context(|| format!("bad size in `{model}`"))?;
        let mut goal = GoalMode::Corner;
        let mut rows = None;
        for part in parts {
            if let Some(g) = part.strip_prefix("goal=") {
                goal = match g {
                    "corner" => GoalMode::Corner,
                    "center" => GoalMode::Center,
                    other => bail!("unknown goal mode `{other}`"),
                };
            } else if let Some(r) = part.strip_prefix("rows=") {
                rows = Some(r.parse().with_context(|| format!("bad rows in `{model}`"))?);
            } else {
                bail!("unknown model option `{part}`");
            }
        }
        let m = match family {
            "line" => worlds::gen_line(k, p_rat)?,
            "grid" => worlds::gen_grid(k, goal)?,
            "maze" => worlds::gen_maze(k, rows)?,
            other => bail!("unknown world family `{other}`"),
        };
        return Ok(m);
    }
    if model == "trap" {
        return Ok(worlds::trap());
    }
    let path = Path::new(model);
    Ok(load_mdp(path)?)
}

pub fn parse_problem(s: &str) -> Result<Problem> {
    match s {
        "pop" => Ok(Problem::Pop),
        "pdoop" => Ok(Problem::Pdoop),
        "ssp" => Ok(Problem::Ssp),
        other => bail!("unknown problem `{other}` (expected pop, pdoop or ssp)"),
    }
}

/// Strategy mode, defaulting per problem: deterministic for `pdoop`,
/// randomized otherwise.
pub fn parse_mode(s: Option<&str>, problem: Problem) -> Result<StrategyMode> {
    match s {
        None => Ok(match problem {
            Problem::Pdoop => StrategyMode::Deterministic,
            _ => StrategyMode::Randomized,
        }),
        Some("deterministic") | Some("det") => Ok(StrategyMode::Deterministic),
        Some("randomized") | Some("rand") => Ok(StrategyMode::Randomized),
        Some(other) => bail!("unknown mode `{other}`"),
    }
}

pub fn parse_encoding(s: Option<&str>) -> Result<VarEncoding> {
    match s {
        None | Some("real") => Ok(VarEncoding::Real),
        Some("bool") | Some("boolean") => Ok(VarEncoding::Boolean),
        Some(other) => bail!("unknown encoding `{other}`"),
    }
}

pub fn parse_bellman(s: Option<&str>) -> Result<BellmanForm> {
    match s {
        None | Some("equality") | Some("eq") => Ok(BellmanForm::Equality),
        Some("inequality") | Some("ineq") => Ok(BellmanForm::Inequality),
        Some(other) => bail!("unknown bellman form `{other}`"),
    }
}

/// Exact rational threshold. Decimal inputs are promoted exactly, with a
/// warning on stderr since `0.1`-style literals rarely mean what they say.
pub fn parse_threshold(s: &str) -> Result<Rat> {
    let value = parse_rat(s).map_err(|e| anyhow!("{e}"))?;
    if s.contains('.') {
        eprintln!("warning: threshold `{s}` promoted to the exact rational {value}");
    }
    Ok(value)
}

/// Sensor list: `s1,s2` or `1,2`.
pub fn parse_sensors(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|part| !part.is_empty())
        .map(|part| {
            let trimmed = part.trim();
            let digits = trimmed.strip_prefix('s').unwrap_or(trimmed);
            digits
                .parse::<usize>()
                .with_context(|| format!("bad sensor `{part}`"))
        })
        .collect()
}

/// General-kind class list: one class index per non-goal state, `0,0,1,1`.
pub fn parse_classes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|part| !part.is_empty())
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .with_context(|| format!("bad class `{part}`"))
        })
        .collect()
}
