//! Evaluating a fixed observation function against a reward threshold:
//! inferred strategy constraints, the native fast path, and the interface
//! implemented by solver-backed oracles.

use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::chain::pomdp_reward_under_strategy;
use crate::fmath;
use crate::mdp::{ActionSet, Mdp};
use crate::obs::{ObsLabel, ObservationFunction};
use crate::rational::Rat;
use crate::solve::MdpAnalysis;
use crate::strategy::{PositionalStrategy, StrategyMode};
use crate::value::Value;

/// Per-class strategy constraints inferable from optimal signatures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassConstraint {
    /// Actions fixed to probability zero.
    pub zeros: ActionSet,
    /// When all member signatures intersect: the shared support, whose
    /// probabilities must sum to one.
    pub support: Option<ActionSet>,
}

/// Inferred constraints for every observation class of a candidate.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InferredConstraints {
    pub per_class: BTreeMap<ObsLabel, ClassConstraint>,
    /// Number of strategy variables fixed to a constant by these rules.
    pub fixed_var_count: usize,
}

/// For each class `o`: when every member shares an optimal action, restrict
/// the row support to the shared set `Act_M(o)` (their probabilities sum to
/// one, the rest are zero); otherwise zero out every action outside the
/// union of member signatures.
pub fn infer_strategy_constraints(
    m: &Mdp,
    obs: &ObservationFunction,
    signatures: &[ActionSet],
) -> InferredConstraints {
    let full = ActionSet::full(m.n_actions());
    let mut per_class = BTreeMap::new();
    let mut fixed = 0usize;
    for label in obs.classes() {
        let members = obs.members(label);
        let mut inter = full;
        let mut union = ActionSet::EMPTY;
        for &s in &members {
            inter = inter.intersect(signatures[s]);
            union = union.union(signatures[s]);
        }
        let constraint = if !inter.is_empty() {
            let zeros = ActionSet(full.0 & !inter.0);
            fixed += zeros.len() + usize::from(inter.len() == 1);
            ClassConstraint {
                zeros,
                support: Some(inter),
            }
        } else {
            let zeros = ActionSet(full.0 & !union.0);
            fixed += zeros.len();
            ClassConstraint {
                zeros,
                support: None,
            }
        };
        per_class.insert(label, constraint);
    }
    InferredConstraints {
        per_class,
        fixed_var_count: fixed,
    }
}

/// Equivalence score of an observation function: the number of classes
/// whose members all share an optimal action.
pub fn eq_score(obs: &ObservationFunction, signatures: &[ActionSet], n_actions: usize) -> usize {
    let full = ActionSet::full(n_actions);
    obs.classes()
        .into_iter()
        .filter(|label| {
            let mut inter = full;
            for s in obs.members(*label) {
                inter = inter.intersect(signatures[s]);
            }
            !inter.is_empty()
        })
        .count()
}

/// Verdict of an oracle query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Sat,
    Unsat,
    Unknown,
    Timeout,
}

/// Where a verdict came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleSource {
    FastPath,
    Smt,
}

/// Outcome of evaluating one observation function.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub status: OracleStatus,
    /// Present iff `status == Sat`; re-evaluates natively to at most
    /// `τ + 1e-6`.
    pub witness: Option<PositionalStrategy>,
    /// The witness's natively evaluated expected reward.
    pub reward: Option<f64>,
    pub source: OracleSource,
}

impl OracleResult {
    pub fn unsat(source: OracleSource) -> OracleResult {
        OracleResult {
            status: OracleStatus::Unsat,
            witness: None,
            reward: None,
            source,
        }
    }
}

/// Native decisive check for candidates whose every class shares an optimal
/// action (`eq(obs) = |O|`).
///
/// Builds the deterministic strategy that picks the lowest-indexed shared
/// action per class and evaluates it exactly. If the resulting reward equals
/// the fully-observable optimum (tolerance `1e-9`), the verdict is decisive:
/// no observation function can do better, so `sat` iff the optimum meets the
/// threshold. Otherwise (an improper greedy corner case) the check abstains
/// and the caller falls back to the solver.
pub fn fast_path_check(
    m: &Mdp,
    analysis: &MdpAnalysis,
    obs: &ObservationFunction,
    tau: &Rat,
    strict: bool,
) -> Option<OracleResult> {
    let full = ActionSet::full(m.n_actions());
    let mut rows = BTreeMap::new();
    for label in obs.classes() {
        let mut inter = full;
        for s in obs.members(label) {
            inter = inter.intersect(analysis.signatures[s]);
        }
        rows.insert(label, inter.first()?);
    }
    let sigma = PositionalStrategy::deterministic(rows);
    let values = pomdp_reward_under_strategy(m, obs, &sigma, 1e-12).ok()?;
    let optimum = analysis.optimum().as_f64()?;
    let reward = match values.aggregate {
        Value::Finite(x) => x,
        Value::Infinite => return None,
    };
    if fmath::abs(reward - optimum) > 1e-9 * (1.0 + fmath::abs(optimum)) {
        return None;
    }
    let slack = if strict { -1e-9 } else { 1e-9 };
    let meets = values.aggregate.meets_threshold(tau, strict, slack);
    Some(if meets {
        OracleResult {
            status: OracleStatus::Sat,
            witness: Some(sigma),
            reward: Some(reward),
            source: OracleSource::FastPath,
        }
    } else {
        OracleResult::unsat(OracleSource::FastPath)
    })
}

/// Failure inside an oracle backend.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct OracleError(pub String);

/// One query: does `obs` admit a positional strategy meeting the threshold?
pub struct ObsQuery<'a> {
    pub m: &'a Mdp,
    pub analysis: &'a MdpAnalysis,
    pub obs: &'a ObservationFunction,
    pub constraints: &'a InferredConstraints,
    pub tau: &'a Rat,
    pub strict: bool,
    pub mode: StrategyMode,
}

/// One full-encoding query over all observation functions within a budget.
pub struct FullQuery<'a> {
    pub m: &'a Mdp,
    pub budget: usize,
    pub location: bool,
    pub tau: &'a Rat,
    pub strict: bool,
    pub mode: StrategyMode,
}

/// Outcome of a full-encoding query.
#[derive(Debug, Clone)]
pub struct FullResult {
    pub status: OracleStatus,
    pub witness: Option<(ObservationFunction, PositionalStrategy, f64)>,
}

/// A procedure that evaluates candidate observation functions. Implemented
/// by the SMT-backed oracle in the companion crate and by test oracles.
pub trait PomdpOracle {
    fn check_obs(&mut self, query: &ObsQuery<'_>) -> Result<OracleResult, OracleError>;
    fn check_full(&mut self, query: &FullQuery<'_>) -> Result<FullResult, OracleError>;
}
