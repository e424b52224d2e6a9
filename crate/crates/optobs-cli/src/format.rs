//! Explicit-MDP file format (UTF-8 JSON) and the observation-function file.
//!
//! Model schema: `states`, `initial`, `goals`, `actions`, per-state
//! `rewards` as rational strings, and a list of `{from, action, to, p}`
//! transition entries. Missing `(from, action)` rows are implicit self-loops
//! with probability one. Rational strings are `integer`,
//! `integer/positive-integer` or decimals, parsed exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use optobs_core::mdp::{Mdp, SparseRow};
use optobs_core::obs::{ObsKind, ObsLabel, ObservationFunction};
use optobs_core::rational::{format_rat, one, parse_rat};

/// Errors of the model file layer.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("bad rational `{0}`")]
    BadRational(String),
    #[error("unknown action `{0}` in transition entry")]
    UnknownAction(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("duplicate transition entry for (s{state}, {action}, s{to})")]
    DuplicateEntry {
        state: usize,
        action: String,
        to: usize,
    },
    #[error("model violates invariants:\n{0}")]
    Invalid(String),
    #[error("bad observation entry `{0}`")]
    BadObservation(String),
}

#[derive(Serialize, Deserialize)]
struct MdpFile {
    states: usize,
    initial: Vec<usize>,
    goals: Vec<usize>,
    actions: Vec<String>,
    rewards: Vec<String>,
    transitions: Vec<TransitionEntry>,
}

#[derive(Serialize, Deserialize)]
struct TransitionEntry {
    from: usize,
    action: String,
    to: usize,
    p: String,
}

/// Loads and validates an MDP. The result round-trips through
/// [`save_mdp`] with exact rationals preserved.
pub fn load_mdp(path: &Path) -> Result<Mdp, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_mdp(&text)
}

/// Parses the JSON model format from a string.
pub fn parse_mdp(text: &str) -> Result<Mdp, FormatError> {
    let file: MdpFile = serde_json::from_str(text).map_err(|e| FormatError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let n = file.states;
    if file.rewards.len() != n {
        return Err(FormatError::Invalid(format!(
            "{} rewards for {} states",
            file.rewards.len(),
            n
        )));
    }
    let rewards = file
        .rewards
        .iter()
        .map(|s| parse_rat(s).map_err(|_| FormatError::BadRational(s.clone())))
        .collect::<Result<Vec<_>, _>>()?;

    // implicit self-loops, overwritten by explicit rows
    let mut transitions: Vec<Vec<SparseRow>> = (0..n)
        .map(|s| vec![vec![(s, one())]; file.actions.len()])
        .collect();
    let mut explicit = vec![vec![false; file.actions.len()]; n];
    for entry in &file.transitions {
        let a = file
            .actions
            .iter()
            .position(|name| *name == entry.action)
            .ok_or_else(|| FormatError::UnknownAction(entry.action.clone()))?;
        if entry.from >= n {
            return Err(FormatError::StateOutOfRange(entry.from));
        }
        if entry.to >= n {
            return Err(FormatError::StateOutOfRange(entry.to));
        }
        let p = parse_rat(&entry.p).map_err(|_| FormatError::BadRational(entry.p.clone()))?;
        let row = &mut transitions[entry.from][a];
        if !explicit[entry.from][a] {
            row.clear();
            explicit[entry.from][a] = true;
        }
        if row.iter().any(|(t, _)| *t == entry.to) {
            return Err(FormatError::DuplicateEntry {
                state: entry.from,
                action: entry.action.clone(),
                to: entry.to,
            });
        }
        row.push((entry.to, p));
    }

    let m = Mdp {
        actions: file.actions,
        initial: sorted(file.initial),
        goals: sorted(file.goals),
        rewards,
        transitions,
    };
    let report = m.validate();
    if !report.is_ok() {
        return Err(FormatError::Invalid(report.to_string()));
    }
    Ok(m)
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Serializes the MDP; rows that are plain probability-one self-loops are
/// left implicit.
pub fn render_mdp(m: &Mdp) -> String {
    let mut entries = Vec::new();
    for s in 0..m.n_states() {
        for (a, row) in m.transitions[s].iter().enumerate() {
            if row.as_slice() == [(s, one())] {
                continue;
            }
            for (t, p) in row {
                entries.push(TransitionEntry {
                    from: s,
                    action: m.actions[a].clone(),
                    to: *t,
                    p: format_rat(p),
                });
            }
        }
    }
    let file = MdpFile {
        states: m.n_states(),
        initial: m.initial.clone(),
        goals: m.goals.clone(),
        actions: m.actions.clone(),
        rewards: m.rewards.iter().map(format_rat).collect(),
        transitions: entries,
    };
    serde_json::to_string_pretty(&file).expect("model serialization never fails")
}

pub fn save_mdp(m: &Mdp, path: &Path) -> Result<(), FormatError> {
    fs::write(path, render_mdp(m)).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Serialize, Deserialize)]
struct ObsFile {
    kind: String,
    /// Per-state labels: class index (general), `@s<i>` / `bot` (location),
    /// `goal` for goal states.
    assignment: Vec<String>,
}

/// Loads an observation function for `m` from its JSON file form.
pub fn load_obs(path: &Path, m: &Mdp) -> Result<ObservationFunction, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_obs(&text, m)
}

/// Parses an observation function from its JSON file form.
pub fn parse_obs(text: &str, m: &Mdp) -> Result<ObservationFunction, FormatError> {
    let file: ObsFile = serde_json::from_str(text).map_err(|e| FormatError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.assignment.len() != m.n_states() {
        return Err(FormatError::Invalid(format!(
            "{} labels for {} states",
            file.assignment.len(),
            m.n_states()
        )));
    }
    let obs = match file.kind.as_str() {
        "general" => {
            let mut classes = Vec::new();
            let mut width = 0usize;
            for (s, label) in file.assignment.iter().enumerate() {
                if m.is_goal(s) {
                    if label != "goal" {
                        return Err(FormatError::BadObservation(label.clone()));
                    }
                    continue;
                }
                let c: usize = label
                    .parse()
                    .map_err(|_| FormatError::BadObservation(label.clone()))?;
                width = width.max(c + 1);
                classes.push(c);
            }
            ObservationFunction::general(m, width, &classes)
                .map_err(|e| FormatError::Invalid(e.to_string()))?
        }
        "location" => {
            let mut sensors = Vec::new();
            for (s, label) in file.assignment.iter().enumerate() {
                match label.as_str() {
                    "goal" | "bot" => {}
                    other => {
                        let loc: usize = other
                            .strip_prefix("@s")
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| FormatError::BadObservation(other.to_string()))?;
                        if loc != s {
                            return Err(FormatError::BadObservation(other.to_string()));
                        }
                        sensors.push(s);
                    }
                }
            }
            ObservationFunction::location(m, &sensors)
                .map_err(|e| FormatError::Invalid(e.to_string()))?
        }
        other => return Err(FormatError::BadObservation(other.to_string())),
    };
    obs.validate(m)
        .map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(obs)
}

/// Serializes an observation function to its JSON file form.
pub fn render_obs(obs: &ObservationFunction) -> String {
    let assignment: Vec<String> = obs
        .assignment
        .iter()
        .map(|l| match l {
            ObsLabel::Class(o) => o.to_string(),
            ObsLabel::At(s) => format!("@s{s}"),
            ObsLabel::Blind => "bot".to_string(),
            ObsLabel::Goal => "goal".to_string(),
        })
        .collect();
    let file = ObsFile {
        kind: match obs.kind {
            ObsKind::General => "general".to_string(),
            ObsKind::Location => "location".to_string(),
        },
        assignment,
    };
    serde_json::to_string_pretty(&file).expect("observation serialization never fails")
}
