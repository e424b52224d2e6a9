//! Positional strategies: per-observation action choices.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::mdp::Mdp;
use crate::obs::{ObsLabel, ObservationFunction};
use crate::rational::Rat;

/// Whether a strategy row is a Dirac choice or a proper distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyMode {
    Deterministic,
    Randomized,
}

/// One row of a positional strategy.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionChoice {
    /// Single action, probability one.
    Dirac(usize),
    /// Dense distribution over all actions; must sum to one.
    Distribution(Vec<Rat>),
}

impl ActionChoice {
    /// `(action, probability)` pairs with nonzero probability.
    pub fn support(&self, n_actions: usize) -> Vec<(usize, Rat)> {
        match self {
            ActionChoice::Dirac(a) => alloc::vec![(*a, Rat::one())],
            ActionChoice::Distribution(p) => {
                debug_assert_eq!(p.len(), n_actions);
                p.iter()
                    .enumerate()
                    .filter(|(_, q)| !q.is_zero())
                    .map(|(a, q)| (a, q.clone()))
                    .collect()
            }
        }
    }
}

/// A positional strategy: one action choice per observation class.
///
/// Rows are keyed by [`ObsLabel`]: `Class(o)` for general observation
/// functions, `At(s)` and `Blind` for location POMDPs.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionalStrategy {
    pub mode: StrategyMode,
    pub rows: BTreeMap<ObsLabel, ActionChoice>,
}

/// Raised when a strategy does not fit an observation function.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error("no strategy row for observation class {0}")]
    MissingRow(ObsLabel),
    #[error("row {0} does not sum to 1")]
    RowSum(ObsLabel),
    #[error("row {0} is not Dirac in deterministic mode")]
    NotDirac(ObsLabel),
}

impl PositionalStrategy {
    pub fn deterministic(rows: BTreeMap<ObsLabel, usize>) -> Self {
        PositionalStrategy {
            mode: StrategyMode::Deterministic,
            rows: rows
                .into_iter()
                .map(|(k, a)| (k, ActionChoice::Dirac(a)))
                .collect(),
        }
    }

    /// Uniform randomized strategy over every class of `obs`.
    pub fn uniform(m: &Mdp, obs: &ObservationFunction) -> Self {
        let n = m.n_actions();
        let p = Rat::new((1).into(), (n as i64).into());
        let rows = obs
            .classes()
            .into_iter()
            .map(|label| (label, ActionChoice::Distribution(alloc::vec![p.clone(); n])))
            .collect();
        PositionalStrategy {
            mode: StrategyMode::Randomized,
            rows,
        }
    }

    pub fn row(&self, label: ObsLabel) -> Option<&ActionChoice> {
        self.rows.get(&label)
    }

    /// Checks coverage of `obs`'s classes and row invariants.
    pub fn validate(&self, m: &Mdp, obs: &ObservationFunction) -> Result<(), StrategyError> {
        for label in obs.classes() {
            let row = self.rows.get(&label).ok_or(StrategyError::MissingRow(label))?;
            match row {
                ActionChoice::Dirac(_) => {}
                ActionChoice::Distribution(p) => {
                    if self.mode == StrategyMode::Deterministic
                        && p.iter().filter(|q| !q.is_zero()).count() != 1
                    {
                        return Err(StrategyError::NotDirac(label));
                    }
                    let total: Rat = p.iter().sum();
                    if p.len() != m.n_actions() || !total.is_one() {
                        return Err(StrategyError::RowSum(label));
                    }
                }
            }
        }
        Ok(())
    }
}
