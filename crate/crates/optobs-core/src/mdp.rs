//! Explicit finite MDPs with exact rational transition probabilities.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::Rat;

/// Sparse successor distribution: `(successor, probability)` pairs.
pub type SparseRow = Vec<(usize, Rat)>;

/// An explicit MDP with uniformly distributed initial states, absorbing goal
/// states and per-state rewards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mdp {
    /// Ordered action names; actions are referenced by index everywhere.
    pub actions: Vec<String>,
    /// Sorted initial state indices.
    pub initial: Vec<usize>,
    /// Sorted goal state indices.
    pub goals: Vec<usize>,
    /// Per-state reward, collected on every step taken from the state.
    pub rewards: Vec<Rat>,
    /// `transitions[s][a]` is the successor distribution of action `a` in
    /// state `s`.
    pub transitions: Vec<Vec<SparseRow>>,
}

impl Mdp {
    pub fn n_states(&self) -> usize {
        self.rewards.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn is_goal(&self, s: usize) -> bool {
        self.goals.binary_search(&s).is_ok()
    }

    /// Non-goal states in ascending order.
    pub fn non_goal_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_states()).filter(|s| !self.is_goal(*s))
    }

    pub fn row(&self, s: usize, a: usize) -> &SparseRow {
        &self.transitions[s][a]
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    /// Checks every structural invariant and reports all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.n_states();

        if self.actions.is_empty() {
            violations.push(Violation::NoActions);
        }
        if self.transitions.len() != n {
            violations.push(Violation::ShapeMismatch {
                transitions: self.transitions.len(),
                states: n,
            });
            return ValidationReport { violations };
        }

        if self.initial.is_empty() {
            violations.push(Violation::EmptyInitial);
        }
        if self.goals.is_empty() {
            violations.push(Violation::EmptyGoals);
        }
        for &s in &self.initial {
            if s >= n {
                violations.push(Violation::StateOutOfRange { role: "initial", state: s });
            }
            if self.goals.contains(&s) {
                violations.push(Violation::InitialGoalOverlap { state: s });
            }
        }
        for &s in &self.goals {
            if s >= n {
                violations.push(Violation::StateOutOfRange { role: "goal", state: s });
            }
        }

        for (s, reward) in self.rewards.iter().enumerate() {
            if reward.is_negative() {
                violations.push(Violation::NegativeReward { state: s });
            }
        }

        for s in 0..n {
            if self.transitions[s].len() != self.actions.len() {
                violations.push(Violation::MissingActionRows { state: s });
                continue;
            }
            for (a, row) in self.transitions[s].iter().enumerate() {
                let mut total = Rat::zero();
                let mut seen = Vec::with_capacity(row.len());
                for (t, p) in row {
                    if *t >= n {
                        violations.push(Violation::SuccessorOutOfRange { state: s, action: a, to: *t });
                    }
                    if seen.contains(t) {
                        violations.push(Violation::DuplicateSuccessor { state: s, action: a, to: *t });
                    }
                    seen.push(*t);
                    if p.is_negative() || *p > Rat::one() {
                        violations.push(Violation::ProbabilityOutOfRange { state: s, action: a, to: *t });
                    }
                    total += p;
                }
                if !total.is_one() {
                    violations.push(Violation::RowSum {
                        state: s,
                        action: self.action_name_or_index(a),
                        total,
                    });
                }
                if self.is_goal(s) && row.as_slice() != [(s, Rat::one())] {
                    violations.push(Violation::GoalNotAbsorbing {
                        state: s,
                        action: self.action_name_or_index(a),
                    });
                }
            }
        }

        ValidationReport { violations }
    }

    fn action_name_or_index(&self, a: usize) -> String {
        self.actions
            .get(a)
            .cloned()
            .unwrap_or_else(|| alloc::format!("#{a}"))
    }

    /// States with no path to any goal in the all-actions support graph,
    /// i.e. states from which no strategy reaches a goal with positive
    /// probability. Transitions out of them can never be part of a
    /// goal-reaching run.
    pub fn doomed_states(&self) -> Vec<bool> {
        let n = self.n_states();
        let mut can_reach = alloc::vec![false; n];
        let mut stack: Vec<usize> = self.goals.iter().copied().filter(|&g| g < n).collect();
        for &g in &stack {
            can_reach[g] = true;
        }
        // backward reachability over the support graph
        let mut preds: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for s in 0..n {
            for row in &self.transitions[s] {
                for (t, p) in row {
                    if *t < n && !p.is_zero() {
                        preds[*t].push(s);
                    }
                }
            }
        }
        while let Some(t) = stack.pop() {
            for &s in &preds[t] {
                if !can_reach[s] {
                    can_reach[s] = true;
                    stack.push(s);
                }
            }
        }
        can_reach.iter().map(|r| !r).collect()
    }
}

/// Outcome of [`Mdp::validate`]: empty iff every invariant holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A single invariant violation, with state/action coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoActions,
    ShapeMismatch { transitions: usize, states: usize },
    EmptyInitial,
    EmptyGoals,
    StateOutOfRange { role: &'static str, state: usize },
    InitialGoalOverlap { state: usize },
    NegativeReward { state: usize },
    MissingActionRows { state: usize },
    SuccessorOutOfRange { state: usize, action: usize, to: usize },
    DuplicateSuccessor { state: usize, action: usize, to: usize },
    ProbabilityOutOfRange { state: usize, action: usize, to: usize },
    RowSum { state: usize, action: String, total: Rat },
    GoalNotAbsorbing { state: usize, action: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoActions => write!(f, "action set is empty"),
            Violation::ShapeMismatch { transitions, states } => write!(
                f,
                "transition table has {transitions} rows for {states} states"
            ),
            Violation::EmptyInitial => write!(f, "initial set is empty"),
            Violation::EmptyGoals => write!(f, "goal set empty or non-absorbing"),
            Violation::StateOutOfRange { role, state } => {
                write!(f, "{role} state s{state} out of range")
            }
            Violation::InitialGoalOverlap { state } => {
                write!(f, "state s{state} is both initial and goal")
            }
            Violation::NegativeReward { state } => write!(f, "reward of s{state} is negative"),
            Violation::MissingActionRows { state } => {
                write!(f, "state s{state} lacks a row per action")
            }
            Violation::SuccessorOutOfRange { state, action, to } => {
                write!(f, "transition (s{state}, #{action}) -> s{to} out of range")
            }
            Violation::DuplicateSuccessor { state, action, to } => {
                write!(f, "duplicate successor s{to} in row (s{state}, #{action})")
            }
            Violation::ProbabilityOutOfRange { state, action, to } => {
                write!(f, "probability of (s{state}, #{action}) -> s{to} outside [0, 1]")
            }
            Violation::RowSum { state, action, total } => {
                write!(f, "row (s{state}, {action}) sums to {total}")
            }
            Violation::GoalNotAbsorbing { state, action } => {
                write!(f, "goal set empty or non-absorbing: goal s{state} moves under {action}")
            }
        }
    }
}

/// Set of action indices, packed as a bitmask. Supports MDPs with up to 64
/// actions, which covers every model family in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ActionSet(pub u64);

impl ActionSet {
    pub const EMPTY: ActionSet = ActionSet(0);

    pub fn full(n_actions: usize) -> ActionSet {
        debug_assert!(n_actions <= 64);
        if n_actions == 64 {
            ActionSet(u64::MAX)
        } else {
            ActionSet((1u64 << n_actions) - 1)
        }
    }

    pub fn singleton(a: usize) -> ActionSet {
        ActionSet(1u64 << a)
    }

    pub fn insert(&mut self, a: usize) {
        self.0 |= 1u64 << a;
    }

    pub fn contains(&self, a: usize) -> bool {
        self.0 & (1u64 << a) != 0
    }

    pub fn intersect(&self, other: ActionSet) -> ActionSet {
        ActionSet(self.0 & other.0)
    }

    pub fn union(&self, other: ActionSet) -> ActionSet {
        ActionSet(self.0 | other.0)
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    /// Action indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(|a| self.contains(*a))
    }

    /// Smallest action index in the set, if any.
    pub fn first(&self) -> Option<usize> {
        if self.is_empty() {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, ratio};
    use crate::worlds;

    #[test]
    fn generator_output_is_valid() {
        let m = worlds::gen_line(5, ratio(1, 2)).unwrap();
        assert!(m.validate().is_ok());
    }

    #[test]
    fn broken_row_sum_is_reported() {
        let mut m = worlds::gen_line(5, ratio(1, 2)).unwrap();
        // corrupt s2's self-loop (the goal row under action l)
        m.transitions[2][0] = alloc::vec![(2, ratio(1, 2))];
        let report = m.validate();
        assert!(!report.is_ok());
        let text = alloc::format!("{report}");
        assert!(text.contains("row (s2, l) sums to 1/2"), "{text}");
    }

    #[test]
    fn missing_goal_is_reported() {
        let mut m = worlds::gen_line(5, one()).unwrap();
        m.goals.clear();
        let report = m.validate();
        let text = alloc::format!("{report}");
        assert!(text.contains("goal set empty"), "{text}");
    }

    #[test]
    fn doomed_states_of_trap() {
        let m = worlds::trap();
        let doomed = m.doomed_states();
        assert_eq!(doomed, alloc::vec![false, false, true, false, false, false]);
    }

    #[test]
    fn action_set_basics() {
        let mut s = ActionSet::EMPTY;
        s.insert(2);
        s.insert(0);
        assert_eq!(s.iter().collect::<alloc::vec::Vec<_>>(), alloc::vec![0, 2]);
        assert_eq!(s.first(), Some(0));
        assert_eq!(s.len(), 2);
        assert!(s.intersect(ActionSet::singleton(1)).is_empty());
        assert_eq!(s.union(ActionSet::singleton(1)), ActionSet::full(3));
    }
}
