//! SMT-backed POMDP oracle: evaluates candidate observation functions by
//! substituting them into the parametric chain, asserting the inferred
//! strategy constraints and checking the encoded feasibility query.
//!
//! One oracle owns one solver session; queries are isolated with push/pop.
//! A killed session (after a timeout) is reopened on the next query.

use std::collections::BTreeMap;
use std::time::Duration;

use optobs_core::chain::pomdp_reward_under_strategy;
use optobs_core::mdp::Mdp;
use optobs_core::obs::{ObsKind, ObsLabel, ObservationFunction};
use optobs_core::oracle::{
    FullQuery, FullResult, InferredConstraints, ObsQuery, OracleError, OracleResult,
    OracleSource, OracleStatus, PomdpOracle,
};
use optobs_core::rational::{rat_from_f64, Rat};
use optobs_core::script::{
    encode, BellmanForm, BudgetForm, ConstraintScript, EncodeOptions, Term, VarEncoding,
};
use optobs_core::strategy::{ActionChoice, PositionalStrategy, StrategyMode};
use optobs_core::tpmc::{
    build_location_tpmc, build_observation_tpmc, substitute_observation, TpMc,
};
use optobs_core::value::Value;

use crate::smt::{relax_repair_solve, ModelValue, SmtError, SmtSession, SmtStatus, SolverConfig};

/// Slack allowed when re-validating a witness against the threshold.
pub const WITNESS_SLACK: f64 = 1e-6;

/// Encoding regime used for oracle queries.
#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub encoding: VarEncoding,
    pub pseudo_boolean: bool,
    pub bellman: BellmanForm,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            encoding: VarEncoding::Real,
            pseudo_boolean: false,
            bellman: BellmanForm::Equality,
        }
    }
}

/// The solver-backed oracle.
pub struct SmtOracle {
    config: SolverConfig,
    options: OracleOptions,
    session: Option<SmtSession>,
}

impl SmtOracle {
    pub fn new(config: SolverConfig, options: OracleOptions) -> SmtOracle {
        SmtOracle {
            config,
            options,
            session: None,
        }
    }

    /// Resolves the solver from the environment.
    pub fn from_env(options: OracleOptions, timeout: Duration) -> Result<SmtOracle, SmtError> {
        let mut config = SolverConfig::resolve().ok_or(SmtError::NoSolver)?;
        config.timeout = timeout;
        Ok(SmtOracle::new(config, options))
    }

    fn encode_options(&self, mode: StrategyMode, tau: &Rat, strict: bool) -> EncodeOptions {
        EncodeOptions {
            mode,
            encoding: self.options.encoding,
            pseudo_boolean: self.options.pseudo_boolean,
            bellman: self.options.bellman,
            budget_form: BudgetForm::Exact,
            strict,
            threshold: tau.clone(),
        }
    }

    /// Runs one query on the session, isolating it from earlier queries
    /// with a solver reset. Resets (rather than push/pop scopes) keep the
    /// solver in its fast one-shot mode for nonlinear arithmetic.
    fn scoped_check(
        &mut self,
        script: &ConstraintScript,
        extra_asserts: &[Term],
    ) -> Result<crate::smt::SolverVerdict, SmtError> {
        let mut session = match self.session.take() {
            Some(mut s) => {
                s.reset()?;
                s
            }
            None => SmtSession::open(&self.config)?,
        };
        let result = (|| {
            session.assert_raw(&script.render())?;
            for t in extra_asserts {
                session.assert_raw(&format!("(assert {})\n", t.render()))?;
            }
            session.check_with_model(&script.var_names())
        })();
        match &result {
            Ok(v) if v.status != SmtStatus::Timeout => self.session = Some(session),
            _ => {} // dead or timed-out sessions are dropped and reopened later
        }
        result
    }

    /// Inferred-constraint equalities for the substituted chain.
    fn constraint_terms(
        &self,
        t: &TpMc,
        obs: &ObservationFunction,
        constraints: &InferredConstraints,
        mode: StrategyMode,
    ) -> Vec<Term> {
        let boolean_x =
            self.options.encoding == VarEncoding::Boolean && mode == StrategyMode::Deterministic;
        let mut terms = Vec::new();
        for label in obs.classes() {
            let Some(constraint) = constraints.per_class.get(&label) else {
                continue;
            };
            let Some(row) = t.x_rows.get(&label) else {
                continue;
            };
            for a in constraint.zeros.iter() {
                let x = Term::Var(t.vars[row[a].0].name.clone());
                terms.push(if boolean_x {
                    Term::Not(x.into())
                } else {
                    Term::Eq(
                        x.into(),
                        Term::Num(Rat::from_integer(0.into())).into(),
                    )
                });
            }
            if let Some(support) = constraint.support {
                let members: Vec<Term> = support
                    .iter()
                    .map(|a| Term::Var(t.vars[row[a].0].name.clone()))
                    .collect();
                terms.push(if boolean_x {
                    Term::Or(members)
                } else {
                    Term::Eq(
                        Term::Add(members).into(),
                        Term::Num(Rat::from_integer(1.into())).into(),
                    )
                });
            }
        }
        terms
    }

    /// Reads the strategy for `obs` out of a model.
    fn extract_strategy(
        &self,
        t: &TpMc,
        obs: &ObservationFunction,
        model: &BTreeMap<String, ModelValue>,
        mode: StrategyMode,
    ) -> Result<PositionalStrategy, OracleError> {
        extract_strategy_from_model(t, &obs.classes(), model, mode)
    }
}

/// Builds the substituted chain for an observation function.
fn substituted_tpmc(m: &Mdp, obs: &ObservationFunction) -> Result<TpMc, OracleError> {
    let full = match obs.kind {
        ObsKind::General => build_observation_tpmc(m, obs.n_classes.max(1)),
        ObsKind::Location => build_location_tpmc(m, obs.sensors_on().max(1)),
    }
    .map_err(|e| OracleError(e.to_string()))?;
    substitute_observation(&full, obs).map_err(|e| OracleError(e.to_string()))
}

/// Reads strategy rows for the given labels out of a model.
pub fn extract_strategy_from_model(
    t: &TpMc,
    labels: &[ObsLabel],
    model: &BTreeMap<String, ModelValue>,
    mode: StrategyMode,
) -> Result<PositionalStrategy, OracleError> {
    let n_actions = t.mdp.n_actions();
    let mut rows = BTreeMap::new();
    for label in labels {
        let Some(row) = t.x_rows.get(label) else {
            return Err(OracleError(format!("no strategy row for {label}").into()));
        };
        let mut dist: Vec<Rat> = Vec::with_capacity(n_actions);
        for a in 0..n_actions {
            let name = &t.vars[row[a].0].name;
            let value = model
                .get(name)
                .ok_or_else(|| OracleError(format!("model lacks {name}")))?;
            let q = match value {
                ModelValue::Bool(b) => {
                    if *b {
                        Rat::from_integer(1.into())
                    } else {
                        Rat::from_integer(0.into())
                    }
                }
                ModelValue::Rational(q) => q.clone(),
            };
            dist.push(q);
        }
        let choice = match mode {
            StrategyMode::Deterministic => {
                let a = dist
                    .iter()
                    .position(|q| !num_traits::Zero::is_zero(q))
                    .ok_or_else(|| OracleError(format!("empty row for {label}")))?;
                ActionChoice::Dirac(a)
            }
            StrategyMode::Randomized => ActionChoice::Distribution(dist),
        };
        rows.insert(*label, choice);
    }
    Ok(PositionalStrategy { mode, rows })
}

fn map_status(status: SmtStatus) -> OracleStatus {
    match status {
        SmtStatus::Sat => OracleStatus::Sat,
        SmtStatus::Unsat => OracleStatus::Unsat,
        SmtStatus::Unknown => OracleStatus::Unknown,
        SmtStatus::Timeout => OracleStatus::Timeout,
    }
}

impl PomdpOracle for SmtOracle {
    fn check_obs(&mut self, q: &ObsQuery<'_>) -> Result<OracleResult, OracleError> {
        let t = substituted_tpmc(q.m, q.obs)?;
        let mut opts = self.encode_options(q.mode, q.tau, q.strict);
        // the budget is not part of a fixed-observation query
        opts.budget_form = BudgetForm::AtMost;
        let script = encode(&t, &opts);
        let extra = self.constraint_terms(&t, q.obs, q.constraints, q.mode);
        let verdict = self
            .scoped_check(&script, &extra)
            .map_err(|e| OracleError(e.to_string()))?;
        let status = map_status(verdict.status);
        if status != OracleStatus::Sat {
            return Ok(OracleResult {
                status,
                witness: None,
                reward: None,
                source: OracleSource::Smt,
            });
        }
        let model = verdict.model.as_ref().expect("sat has a model");
        let sigma = self.extract_strategy(&t, q.obs, model, q.mode)?;
        let values = pomdp_reward_under_strategy(q.m, q.obs, &sigma, 1e-10)
            .map_err(|e| OracleError(e.to_string()))?;
        match values.aggregate {
            Value::Finite(reward)
                if values
                    .aggregate
                    .meets_threshold(q.tau, q.strict, WITNESS_SLACK) =>
            {
                Ok(OracleResult {
                    status: OracleStatus::Sat,
                    witness: Some(sigma),
                    reward: Some(reward),
                    source: OracleSource::Smt,
                })
            }
            other => Err(OracleError(format!(
                "unsound model: witness re-evaluates to {other} against threshold {}",
                q.tau
            ))),
        }
    }

    fn check_full(&mut self, q: &FullQuery<'_>) -> Result<FullResult, OracleError> {
        let t = if q.location {
            build_location_tpmc(q.m, q.budget)
        } else {
            build_observation_tpmc(q.m, q.budget)
        }
        .map_err(|e| OracleError(e.to_string()))?;
        let opts = self.encode_options(q.mode, q.tau, q.strict);
        let script = encode(&t, &opts);
        let verdict = self
            .scoped_check(&script, &[])
            .map_err(|e| OracleError(e.to_string()))?;
        let status = map_status(verdict.status);
        if status != OracleStatus::Sat {
            return Ok(FullResult {
                status,
                witness: None,
            });
        }
        let model = verdict.model.as_ref().expect("sat has a model");
        let obs = extract_observation_from_model(&t, model)?;
        let sigma = extract_strategy_from_model(&t, &obs.classes(), model, q.mode)?;
        let values = pomdp_reward_under_strategy(q.m, &obs, &sigma, 1e-10)
            .map_err(|e| OracleError(e.to_string()))?;
        match values.aggregate {
            Value::Finite(reward)
                if values
                    .aggregate
                    .meets_threshold(q.tau, q.strict, WITNESS_SLACK) =>
            {
                Ok(FullResult {
                    status: OracleStatus::Sat,
                    witness: Some((obs, sigma, reward)),
                })
            }
            other => Err(OracleError(format!(
                "unsound model: witness re-evaluates to {other} against threshold {}",
                q.tau
            ))),
        }
    }
}

/// Reads the observation function out of a full-encoding model.
pub fn extract_observation_from_model(
    t: &TpMc,
    model: &BTreeMap<String, ModelValue>,
) -> Result<ObservationFunction, OracleError> {
    let m = &t.mdp;
    match t.kind {
        optobs_core::tpmc::TpMcKind::Observation { budget } => {
            let mut classes = Vec::new();
            for s in m.non_goal_states() {
                let mut chosen = None;
                for o in 0..budget {
                    let name = match t.y_obs[s][o] {
                        optobs_core::tpmc::YRef::Var(id) => &t.vars[id.0].name,
                        optobs_core::tpmc::YRef::Fixed(true) => {
                            chosen = Some(o);
                            break;
                        }
                        optobs_core::tpmc::YRef::Fixed(false) => continue,
                    };
                    let on = model
                        .get(name)
                        .and_then(|v| v.as_bool())
                        .ok_or_else(|| OracleError(format!("model lacks {name}")))?;
                    if on {
                        chosen = Some(o);
                        break;
                    }
                }
                classes.push(chosen.ok_or_else(|| {
                    OracleError(format!("state s{s} has no observation in the model"))
                })?);
            }
            ObservationFunction::general(m, budget, &classes)
                .map_err(|e| OracleError(e.to_string()))
        }
        optobs_core::tpmc::TpMcKind::Location { .. } => {
            let mut sensors = Vec::new();
            for s in m.non_goal_states() {
                let on = match t.y_loc[s] {
                    optobs_core::tpmc::YRef::Var(id) => {
                        let name = &t.vars[id.0].name;
                        model
                            .get(name)
                            .and_then(|v| v.as_bool())
                            .ok_or_else(|| OracleError(format!("model lacks {name}")))?
                    }
                    optobs_core::tpmc::YRef::Fixed(on) => on,
                };
                if on {
                    sensors.push(s);
                }
            }
            ObservationFunction::location(m, &sensors).map_err(|e| OracleError(e.to_string()))
        }
    }
}

/// Direct (unsubstituted) solve of a location chain with the two-stage
/// relax-and-repair interaction; used for sensor-selection instances.
pub fn solve_ssp_relax_repair(
    oracle_cfg: &SolverConfig,
    options: &OracleOptions,
    m: &Mdp,
    budget: usize,
    tau: &Rat,
    strict: bool,
    mode: StrategyMode,
) -> Result<FullResult, OracleError> {
    let t = build_location_tpmc(m, budget).map_err(|e| OracleError(e.to_string()))?;
    let opts = EncodeOptions {
        mode,
        encoding: options.encoding,
        pseudo_boolean: options.pseudo_boolean,
        bellman: options.bellman,
        budget_form: BudgetForm::Exact,
        strict,
        threshold: tau.clone(),
    };
    let script = encode(&t, &opts);
    let mut session =
        SmtSession::open(oracle_cfg).map_err(|e| OracleError(e.to_string()))?;
    let verdict =
        relax_repair_solve(&mut session, &script).map_err(|e| OracleError(e.to_string()))?;
    session.close();
    let status = map_status(verdict.status);
    if status != OracleStatus::Sat {
        return Ok(FullResult {
            status,
            witness: None,
        });
    }
    let model = verdict.model.as_ref().expect("sat has a model");
    let obs = extract_observation_from_model(&t, model)?;
    let sigma = extract_strategy_from_model(&t, &obs.classes(), model, mode)?;
    let values = pomdp_reward_under_strategy(m, &obs, &sigma, 1e-10)
        .map_err(|e| OracleError(e.to_string()))?;
    match values.aggregate {
        Value::Finite(reward)
            if values.aggregate.meets_threshold(tau, strict, WITNESS_SLACK) =>
        {
            Ok(FullResult {
                status: OracleStatus::Sat,
                witness: Some((obs, sigma, reward)),
            })
        }
        other => Err(OracleError(format!(
            "unsound model: witness re-evaluates to {other} against threshold {tau}"
        ))),
    }
}

/// Error carrying the bracketing interval of an interrupted bisection.
#[derive(Debug, thiserror::Error)]
#[error("bisection inconclusive in [{lo}, {hi}]: {reason}")]
pub struct BisectError {
    pub lo: f64,
    pub hi: f64,
    pub reason: String,
}

/// Estimates `inf { τ : oracle sat }` for a fixed observation function by
/// bisection. `lo` must be infeasible (or zero), `hi` feasible; at most 40
/// oracle calls.
#[allow(clippy::too_many_arguments)]
pub fn bisect_min_reward(
    oracle: &mut SmtOracle,
    m: &Mdp,
    analysis: &optobs_core::solve::MdpAnalysis,
    obs: &ObservationFunction,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mode: StrategyMode,
) -> Result<f64, BisectError> {
    let constraints =
        optobs_core::oracle::infer_strategy_constraints(m, obs, &analysis.signatures);
    fn check_at(
        oracle: &mut SmtOracle,
        m: &Mdp,
        analysis: &optobs_core::solve::MdpAnalysis,
        obs: &ObservationFunction,
        constraints: &InferredConstraints,
        mode: StrategyMode,
        tau_f: f64,
    ) -> Result<bool, String> {
        let tau = rat_from_f64(tau_f)
            .ok_or_else(|| format!("threshold {tau_f} is not finite"))?;
        let res = oracle
            .check_obs(&ObsQuery {
                m,
                analysis,
                obs,
                constraints,
                tau: &tau,
                strict: false,
                mode,
            })
            .map_err(|e| e.to_string())?;
        match res.status {
            OracleStatus::Sat => Ok(true),
            OracleStatus::Unsat => Ok(false),
            OracleStatus::Unknown | OracleStatus::Timeout => {
                Err("oracle returned unknown/timeout".to_string())
            }
        }
    }
    let fail = |lo: f64, hi: f64, reason: String| BisectError { lo, hi, reason };

    // establish the upper bracket
    let mut widen = 0;
    loop {
        match check_at(oracle, m, analysis, obs, &constraints, mode, hi) {
            Ok(true) => break,
            Ok(false) => {
                lo = hi;
                hi *= 2.0;
                widen += 1;
                if widen > 8 {
                    return Err(fail(lo, hi, "no feasible upper bound found".to_string()));
                }
            }
            Err(reason) => return Err(fail(lo, hi, reason)),
        }
    }
    for _ in 0..40 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match check_at(oracle, m, analysis, obs, &constraints, mode, mid) {
            Ok(true) => hi = mid,
            Ok(false) => lo = mid,
            Err(reason) => return Err(fail(lo, hi, reason)),
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Expected reward of the uniformly random blind strategy; the default upper
/// bracket for bisection.
pub fn blind_uniform_value(m: &Mdp) -> Option<f64> {
    let obs = ObservationFunction::blind(m);
    let sigma = PositionalStrategy::uniform(m, &obs);
    match pomdp_reward_under_strategy(m, &obs, &sigma, 1e-10) {
        Ok(values) => values.aggregate.as_f64(),
        Err(_) => None,
    }
}

/// Default bisection brackets: the fully-observable optimum below, the blind
/// uniform value above (or four times the optimum when that is infinite).
pub fn bisect_brackets(m: &Mdp, analysis: &optobs_core::solve::MdpAnalysis) -> (f64, f64) {
    let lo = analysis.optimum().as_f64().unwrap_or(0.0);
    let hi = blind_uniform_value(m).unwrap_or(4.0 * lo.max(1.0));
    (lo, hi.max(lo + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use optobs_core::rational::rat_to_f64 as _;

    #[test]
    fn blind_uniform_value_of_symmetric_line() {
        let m = optobs_core::worlds::gen_line(5, optobs_core::rational::ratio(1, 2)).unwrap();
        // uniform blind play on the p=1/2 line is the Fig. 2 random walk
        let v = blind_uniform_value(&m).unwrap();
        assert!((v - 10.0).abs() < 1e-9, "{v}");
    }
}
