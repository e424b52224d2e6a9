//! Minimal expected total reward for MDPs (stochastic-shortest-path form)
//! and per-state optimal signatures.

use alloc::vec::Vec;

use crate::fmath;
use crate::mdp::{ActionSet, Mdp};
use crate::rational::rat_to_f64;
use crate::value::{Value, ValueVector};

/// Iteration cap for value iteration sweeps.
const MAX_SWEEPS: usize = 1_000_000;

/// Numeric failure in a solver.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("value iteration did not converge; residual {residual}")]
    NonConvergence { residual: f64 },
    #[error("improper state s{state}: no strategy reaches a goal with probability 1")]
    ImproperState { state: usize },
    #[error("linear system singular beyond tolerance; residual {residual}")]
    SingularSystem { residual: f64 },
}

/// States from which some strategy reaches a goal with probability one.
///
/// Iteratively removes states that cannot almost-surely reach the goal set:
/// in each round, a state survives only if some action keeps all its
/// successors inside the surviving set and the goal remains backward
/// reachable through such actions.
pub fn almost_sure_states(m: &Mdp) -> Vec<bool> {
    let n = m.n_states();
    let mut alive = alloc::vec![true; n];
    loop {
        // backward reachability from goals restricted to actions whose
        // full support stays alive
        let mut reach = alloc::vec![false; n];
        for &g in &m.goals {
            reach[g] = alive[g];
        }
        let mut changed = true;
        while changed {
            changed = false;
            for s in 0..n {
                if reach[s] || !alive[s] || m.is_goal(s) {
                    continue;
                }
                let ok = m.transitions[s].iter().any(|row| {
                    row.iter().all(|(t, _)| alive[*t]) && row.iter().any(|(t, _)| reach[*t])
                });
                if ok {
                    reach[s] = true;
                    changed = true;
                }
            }
        }
        if reach == alive {
            return alive;
        }
        alive = reach;
    }
}

/// Minimal expected cumulative reward from every state to the goal set,
/// with the per-state-action Q-values of the final iterate.
///
/// States from which no strategy reaches a goal with probability one get
/// [`Value::Infinite`]; the aggregate is the uniform mean over the initial
/// states. Convergence: max residual below `tol·max(1, ‖v‖∞)`.
pub fn min_expected_reward(
    m: &Mdp,
    tol: f64,
) -> Result<(ValueVector, Vec<Vec<Value>>), SolveError> {
    let n = m.n_states();
    let proper = almost_sure_states(m);

    // f64 view of rewards and transitions, restricted to proper states
    let rewards: Vec<f64> = m.rewards.iter().map(rat_to_f64).collect();
    let rows: Vec<Vec<Vec<(usize, f64)>>> = (0..n)
        .map(|s| {
            m.transitions[s]
                .iter()
                .map(|row| row.iter().map(|(t, p)| (*t, rat_to_f64(p))).collect())
                .collect()
        })
        .collect();

    let sweep_states: Vec<usize> = (0..n).filter(|&s| proper[s] && !m.is_goal(s)).collect();
    let mut v = alloc::vec![0.0f64; n];
    let mut converged = false;
    let mut residual = 0.0;

    for sweep in 0..MAX_SWEEPS {
        let mut delta: f64 = 0.0;
        let mut vmax: f64 = 0.0;
        let forward = sweep % 2 == 0;
        let visit = |s: usize, v: &mut Vec<f64>, delta: &mut f64, vmax: &mut f64| {
            let mut best = f64::INFINITY;
            for row in &rows[s] {
                // actions touching improper states cannot be optimal here
                if row.iter().any(|(t, _)| !proper[*t]) {
                    continue;
                }
                let q: f64 = rewards[s] + row.iter().map(|(t, p)| p * v[*t]).sum::<f64>();
                if q < best {
                    best = q;
                }
            }
            *delta = fmath::max(*delta, fmath::abs(best - v[s]));
            v[s] = best;
            *vmax = fmath::max(*vmax, fmath::abs(best));
        };
        if forward {
            for &s in &sweep_states {
                visit(s, &mut v, &mut delta, &mut vmax);
            }
        } else {
            for &s in sweep_states.iter().rev() {
                visit(s, &mut v, &mut delta, &mut vmax);
            }
        }
        residual = delta;
        if delta < tol * fmath::max(1.0, vmax) {
            converged = true;
            break;
        }
    }
    if !converged && !sweep_states.is_empty() {
        return Err(SolveError::NonConvergence { residual });
    }

    let values: Vec<Value> = (0..n)
        .map(|s| {
            if m.is_goal(s) {
                Value::Finite(0.0)
            } else if proper[s] {
                Value::Finite(v[s])
            } else {
                Value::Infinite
            }
        })
        .collect();

    let q: Vec<Vec<Value>> = (0..n)
        .map(|s| {
            rows[s]
                .iter()
                .map(|row| {
                    if row.iter().any(|(t, _)| !proper[*t]) {
                        Value::Infinite
                    } else {
                        Value::Finite(
                            rewards[s] + row.iter().map(|(t, p)| p * v[*t]).sum::<f64>(),
                        )
                    }
                })
                .collect()
        })
        .collect();

    Ok((ValueVector::new(values, &m.initial), q))
}

/// Per-state sets of locally optimal actions.
///
/// `α*(s) = { a : Q(s,a) ≤ v(s)·(1 + tie_tol) + tie_tol }`. Goal states carry
/// the full action set (every action self-loops there), as do improper
/// states, where every action trivially attains the infinite value. Errors
/// when an initial state is improper, since the instance itself then has
/// infinite minimal expected reward.
pub fn optimal_signatures(
    m: &Mdp,
    values: &ValueVector,
    q: &[Vec<Value>],
    tie_tol: f64,
) -> Result<Vec<ActionSet>, SolveError> {
    let full = ActionSet::full(m.n_actions());
    for &s in &m.initial {
        if !values.get(s).is_finite() {
            return Err(SolveError::ImproperState { state: s });
        }
    }
    let mut sigs = Vec::with_capacity(m.n_states());
    for s in 0..m.n_states() {
        if m.is_goal(s) {
            sigs.push(full);
            continue;
        }
        match values.get(s) {
            Value::Infinite => sigs.push(full),
            Value::Finite(v) => {
                let bound = v * (1.0 + tie_tol) + tie_tol;
                let mut set = ActionSet::EMPTY;
                for (a, qa) in q[s].iter().enumerate() {
                    if let Value::Finite(qa) = qa {
                        if *qa <= bound {
                            set.insert(a);
                        }
                    }
                }
                debug_assert!(!set.is_empty(), "state s{s} has an empty signature");
                sigs.push(set);
            }
        }
    }
    Ok(sigs)
}

/// Precomputed per-MDP analysis shared by the oracle fast path and the
/// decomposition heuristics.
#[derive(Debug, Clone)]
pub struct MdpAnalysis {
    pub values: ValueVector,
    pub q: Vec<Vec<Value>>,
    pub signatures: Vec<ActionSet>,
}

impl MdpAnalysis {
    pub fn analyze(m: &Mdp, tol: f64, tie_tol: f64) -> Result<MdpAnalysis, SolveError> {
        let (values, q) = min_expected_reward(m, tol)?;
        let signatures = optimal_signatures(m, &values, &q, tie_tol)?;
        Ok(MdpAnalysis {
            values,
            q,
            signatures,
        })
    }

    /// The fully-observable optimum: mean optimal value over initial states.
    pub fn optimum(&self) -> Value {
        self.values.aggregate
    }
}

/// Default solver tolerance used throughout the crate.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default tie tolerance for optimal signatures.
pub const DEFAULT_TIE_TOL: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, ratio};
    use crate::worlds::{self, GoalMode};

    fn assert_close(v: Value, want: f64) {
        match v {
            Value::Finite(x) => assert!((x - want).abs() < 1e-9, "{x} != {want}"),
            Value::Infinite => panic!("expected {want}, got inf"),
        }
    }

    #[test]
    fn grid3_optimum_is_2_25() {
        let m = worlds::gen_grid(3, GoalMode::Corner).unwrap();
        let (values, _) = min_expected_reward(&m, 1e-9).unwrap();
        assert_close(values.aggregate, 2.25);
    }

    #[test]
    fn line249_optimum_is_125_over_2() {
        let m = worlds::gen_line(249, one()).unwrap();
        let (values, _) = min_expected_reward(&m, 1e-9).unwrap();
        assert_close(values.aggregate, 62.5);
    }

    #[test]
    fn all_goal_states_have_zero_value() {
        let mut m = worlds::gen_line(3, one()).unwrap();
        // make every state a goal
        m.goals = alloc::vec![0, 1, 2];
        m.initial = alloc::vec![];
        for s in 0..3 {
            m.transitions[s] = alloc::vec![alloc::vec![(s, one())], alloc::vec![(s, one())]];
            m.rewards[s] = crate::rational::zero();
        }
        // validation would reject the empty initial set; the solver still
        // answers the per-state question
        let (values, _) = min_expected_reward(&m, 1e-9).unwrap();
        for s in 0..3 {
            assert_eq!(values.get(s), Value::Finite(0.0));
        }
    }

    #[test]
    fn trap_state_is_infinite_others_finite() {
        let m = worlds::trap();
        let (values, q) = min_expected_reward(&m, 1e-9).unwrap();
        assert_eq!(values.get(2), Value::Infinite);
        assert_close(values.get(0), 1.0);
        assert_close(values.aggregate, 1.0);
        let sigs = optimal_signatures(&m, &values, &q, 1e-6).unwrap();
        assert_eq!(sigs[0], ActionSet::singleton(2)); // c
        assert_eq!(sigs[1], ActionSet::singleton(0)); // a
        assert_eq!(sigs[4], ActionSet::singleton(0)); // a
        assert_eq!(sigs[5], ActionSet::singleton(1)); // b
        assert_eq!(sigs[2], ActionSet::full(3)); // the trap
    }

    #[test]
    fn line5_signatures_point_at_the_goal() {
        let m = worlds::gen_line(5, one()).unwrap();
        let a = MdpAnalysis::analyze(&m, 1e-9, 1e-6).unwrap();
        let l = m.action_index("l").unwrap();
        let r = m.action_index("r").unwrap();
        assert_eq!(a.signatures[0], ActionSet::singleton(r));
        assert_eq!(a.signatures[1], ActionSet::singleton(r));
        assert_eq!(a.signatures[3], ActionSet::singleton(l));
        assert_eq!(a.signatures[4], ActionSet::singleton(l));
    }

    #[test]
    fn grid3_signatures_match_the_three_groups() {
        let m = worlds::gen_grid(3, GoalMode::Corner).unwrap();
        let a = MdpAnalysis::analyze(&m, 1e-9, 1e-6).unwrap();
        let right = m.action_index("right").unwrap();
        let down = m.action_index("down").unwrap();
        let rd = ActionSet::singleton(right).union(ActionSet::singleton(down));
        for s in [0, 1, 3, 4] {
            assert_eq!(a.signatures[s], rd, "s{s}");
        }
        for s in [2, 5] {
            assert_eq!(a.signatures[s], ActionSet::singleton(down), "s{s}");
        }
        for s in [6, 7] {
            assert_eq!(a.signatures[s], ActionSet::singleton(right), "s{s}");
        }
    }

    #[test]
    fn improper_initial_state_errors() {
        let mut m = worlds::trap();
        m.initial = alloc::vec![0, 2];
        let (values, q) = min_expected_reward(&m, 1e-9).unwrap();
        assert_eq!(values.aggregate, Value::Infinite);
        assert_eq!(
            optimal_signatures(&m, &values, &q, 1e-6),
            Err(SolveError::ImproperState { state: 2 })
        );
    }

    #[test]
    fn line_with_failure_probability() {
        let m = worlds::gen_line(5, ratio(1, 2)).unwrap();
        let (values, _) = min_expected_reward(&m, 1e-12).unwrap();
        assert_close(values.get(1), 2.0);
        assert_close(values.get(0), 4.0);
        assert_close(values.aggregate, 3.0);
    }
}
