//! Markov chains induced by a strategy, and their expected total reward.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::fmath;
use crate::mdp::{Mdp, SparseRow};
use crate::obs::{ObsLabel, ObservationFunction};
use crate::rational::{rat_to_f64, Rat};
use crate::strategy::PositionalStrategy;
use crate::value::{Value, ValueVector};

const MAX_SWEEPS: usize = 1_000_000;
/// Above this size the linear solve switches from direct elimination to
/// iterative refinement.
const DIRECT_LIMIT: usize = 2000;

/// A Markov chain with absorbing goal states and per-state rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    pub initial: Vec<usize>,
    pub goals: Vec<usize>,
    pub rewards: Vec<Rat>,
    pub rows: Vec<SparseRow>,
}

impl MarkovChain {
    pub fn n_states(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_goal(&self, s: usize) -> bool {
        self.goals.binary_search(&s).is_ok()
    }
}

/// Raised by chain construction and evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChainError {
    #[error("no strategy row for observation class {0}")]
    MissingStrategyRow(ObsLabel),
    #[error("linear system singular beyond tolerance; residual {residual}")]
    Singular { residual: f64 },
    #[error("iterative solve did not converge; residual {residual}")]
    NonConvergence { residual: f64 },
}

/// Induces the Markov chain `M[obs][σ]`: `P'(s,t) = Σ_a σ(a | obs(s))·P(s,a)(t)`.
///
/// Probabilities are combined exactly, so each output row sums to one as a
/// rational identity.
pub fn induce_chain(
    m: &Mdp,
    obs: &ObservationFunction,
    sigma: &PositionalStrategy,
) -> Result<MarkovChain, ChainError> {
    let n = m.n_states();
    let mut rows = Vec::with_capacity(n);
    for s in 0..n {
        if m.is_goal(s) {
            rows.push(alloc::vec![(s, Rat::one())]);
            continue;
        }
        let label = obs.label(s);
        let choice = sigma
            .row(label)
            .ok_or(ChainError::MissingStrategyRow(label))?;
        let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
        for (a, weight) in choice.support(m.n_actions()) {
            for (t, p) in m.row(s, a) {
                let entry = acc.entry(*t).or_insert_with(Rat::zero);
                *entry += &weight * p;
            }
        }
        rows.push(acc.into_iter().filter(|(_, p)| !p.is_zero()).collect());
    }
    Ok(MarkovChain {
        initial: m.initial.clone(),
        goals: m.goals.clone(),
        rewards: m.rewards.clone(),
        rows,
    })
}

/// Iterative Tarjan SCC over the support graph. Returns the component index
/// of every state; component indices are in reverse topological order
/// (a component only points to components with smaller indices).
fn sccs(rows: &[SparseRow]) -> (Vec<usize>, usize) {
    let n = rows.len();
    let mut index = alloc::vec![usize::MAX; n];
    let mut low = alloc::vec![0usize; n];
    let mut on_stack = alloc::vec![false; n];
    let mut comp = alloc::vec![usize::MAX; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0usize;
    let mut n_comps = 0usize;

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        while let Some(&(v, ei)) = call.last() {
            if ei == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if ei < rows[v].len() {
                call.last_mut().expect("nonempty").1 += 1;
                let (w, p) = &rows[v][ei];
                if p.is_zero() {
                    continue;
                }
                if index[*w] == usize::MAX {
                    call.push((*w, 0));
                } else if on_stack[*w] {
                    low[v] = low[v].min(index[*w]);
                }
            } else {
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = n_comps;
                        if w == v {
                            break;
                        }
                    }
                    n_comps += 1;
                }
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
            }
        }
    }
    (comp, n_comps)
}

/// Expected total reward to the goal set for every state of the chain.
///
/// Strongly-connected-component analysis finds the states that fail to reach
/// a goal with probability one (those that can reach a goal-free bottom
/// component); they get [`Value::Infinite`]. The remaining transient states
/// are solved as the linear system `v = rew + P·v`: direct elimination up to
/// [`DIRECT_LIMIT`] states, iterative refinement beyond, with residual at
/// most `tol`.
pub fn chain_expected_reward(c: &MarkovChain, tol: f64) -> Result<ValueVector, ChainError> {
    let n = c.n_states();
    let (comp, n_comps) = sccs(&c.rows);

    // bottom components: no edge leaving the component
    let mut is_bottom = alloc::vec![true; n_comps];
    let mut comp_has_goal = alloc::vec![false; n_comps];
    for s in 0..n {
        if c.is_goal(s) {
            comp_has_goal[comp[s]] = true;
        }
        for (t, p) in &c.rows[s] {
            if !p.is_zero() && comp[*t] != comp[s] {
                is_bottom[comp[s]] = false;
            }
        }
    }

    // a state is infinite iff it can reach a goal-free bottom component
    let mut infinite = alloc::vec![false; n];
    for s in 0..n {
        if is_bottom[comp[s]] && !comp_has_goal[comp[s]] {
            infinite[s] = true;
        }
    }
    // backward closure over the support graph
    let mut preds: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for s in 0..n {
        for (t, p) in &c.rows[s] {
            if !p.is_zero() {
                preds[*t].push(s);
            }
        }
    }
    let mut work: Vec<usize> = (0..n).filter(|&s| infinite[s]).collect();
    while let Some(t) = work.pop() {
        for &s in &preds[t] {
            if !infinite[s] {
                infinite[s] = true;
                work.push(s);
            }
        }
    }

    // solve v = rew + P v on the finite non-goal states
    let solve_states: Vec<usize> = (0..n)
        .filter(|&s| !infinite[s] && !c.is_goal(s))
        .collect();
    let mut dense_index = alloc::vec![usize::MAX; n];
    for (i, &s) in solve_states.iter().enumerate() {
        dense_index[s] = i;
    }
    let k = solve_states.len();
    let rewards: Vec<f64> = solve_states.iter().map(|&s| rat_to_f64(&c.rewards[s])).collect();
    // transitions among solve states only: goal targets contribute zero and
    // infinite targets cannot occur (their predecessors are infinite too)
    let rows_f: Vec<Vec<(usize, f64)>> = solve_states
        .iter()
        .map(|&s| {
            c.rows[s]
                .iter()
                .filter(|(t, _)| dense_index[*t] != usize::MAX)
                .map(|(t, p)| (dense_index[*t], rat_to_f64(p)))
                .collect()
        })
        .collect();

    let v = if k <= DIRECT_LIMIT {
        solve_direct(&rows_f, &rewards, tol)?
    } else {
        solve_iterative(&rows_f, &rewards, tol)?
    };

    let values: Vec<Value> = (0..n)
        .map(|s| {
            if c.is_goal(s) {
                Value::Finite(0.0)
            } else if infinite[s] {
                Value::Infinite
            } else {
                Value::Finite(v[dense_index[s]])
            }
        })
        .collect();
    Ok(ValueVector::new(values, &c.initial))
}

/// Gaussian elimination with partial pivoting on `(I − P)·v = rew`.
fn solve_direct(rows: &[Vec<(usize, f64)>], rew: &[f64], tol: f64) -> Result<Vec<f64>, ChainError> {
    let k = rew.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut a = alloc::vec![0.0f64; k * k];
    let mut b = rew.to_vec();
    for i in 0..k {
        a[i * k + i] = 1.0;
        for (j, p) in &rows[i] {
            a[i * k + j] -= p;
        }
    }
    for col in 0..k {
        let mut pivot = col;
        for r in col + 1..k {
            if fmath::abs(a[r * k + col]) > fmath::abs(a[pivot * k + col]) {
                pivot = r;
            }
        }
        let pval = a[pivot * k + col];
        if fmath::abs(pval) < 1e-14 {
            return Err(ChainError::Singular { residual: fmath::abs(pval) });
        }
        if pivot != col {
            for j in 0..k {
                a.swap(col * k + j, pivot * k + j);
            }
            b.swap(col, pivot);
        }
        for r in col + 1..k {
            let factor = a[r * k + col] / a[col * k + col];
            if factor == 0.0 {
                continue;
            }
            a[r * k + col] = 0.0;
            for j in col + 1..k {
                a[r * k + j] -= factor * a[col * k + j];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut v = alloc::vec![0.0f64; k];
    for i in (0..k).rev() {
        let mut acc = b[i];
        for j in i + 1..k {
            acc -= a[i * k + j] * v[j];
        }
        v[i] = acc / a[i * k + i];
    }
    // verify the residual of the original sparse system
    let mut residual: f64 = 0.0;
    let mut vmax: f64 = 0.0;
    for i in 0..k {
        let pv: f64 = rows[i].iter().map(|(j, p)| p * v[*j]).sum();
        residual = fmath::max(residual, fmath::abs(v[i] - pv - rew[i]));
        vmax = fmath::max(vmax, fmath::abs(v[i]));
    }
    if residual > tol * fmath::max(1.0, vmax) {
        return Err(ChainError::Singular { residual });
    }
    Ok(v)
}

/// Gauss–Seidel refinement with alternating sweep direction on `v = rew + P·v`.
fn solve_iterative(
    rows: &[Vec<(usize, f64)>],
    rew: &[f64],
    tol: f64,
) -> Result<Vec<f64>, ChainError> {
    let k = rew.len();
    let mut v = alloc::vec![0.0f64; k];
    let mut residual = 0.0;
    for sweep in 0..MAX_SWEEPS {
        let mut delta: f64 = 0.0;
        let mut vmax: f64 = 0.0;
        let visit = |i: usize, v: &mut Vec<f64>, delta: &mut f64, vmax: &mut f64| {
            let mut acc = rew[i];
            let mut diag = 0.0;
            for (j, p) in &rows[i] {
                if *j == i {
                    diag = *p;
                } else {
                    acc += p * v[*j];
                }
            }
            // solve the diagonal exactly: v_i = (rew + Σ_{j≠i} p v_j)/(1 − p_ii)
            let new = if diag < 1.0 { acc / (1.0 - diag) } else { acc };
            *delta = fmath::max(*delta, fmath::abs(new - v[i]));
            v[i] = new;
            *vmax = fmath::max(*vmax, fmath::abs(new));
        };
        if sweep % 2 == 0 {
            for i in 0..k {
                visit(i, &mut v, &mut delta, &mut vmax);
            }
        } else {
            for i in (0..k).rev() {
                visit(i, &mut v, &mut delta, &mut vmax);
            }
        }
        residual = delta;
        if delta < tol * fmath::max(1.0, vmax) {
            return Ok(v);
        }
    }
    Err(ChainError::NonConvergence { residual })
}

/// Expected reward of the POMDP `M[obs]` under a fixed positional strategy:
/// the composition of [`induce_chain`] and [`chain_expected_reward`].
pub fn pomdp_reward_under_strategy(
    m: &Mdp,
    obs: &ObservationFunction,
    sigma: &PositionalStrategy,
    tol: f64,
) -> Result<ValueVector, ChainError> {
    let chain = induce_chain(m, obs, sigma)?;
    chain_expected_reward(&chain, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obs::ObservationFunction;
    use crate::rational::{one, ratio};
    use crate::strategy::{ActionChoice, PositionalStrategy, StrategyMode};
    use crate::worlds;
    use alloc::collections::BTreeMap;

    fn fig2_obs(m: &Mdp) -> ObservationFunction {
        // o1 = {s0, s4}, o2 = {s1, s3}
        ObservationFunction::general(m, 2, &[0, 1, 1, 0]).unwrap()
    }

    #[test]
    fn deterministic_two_class_strategy_reaches_optimum() {
        let m = worlds::gen_line(5, one()).unwrap();
        let obs = ObservationFunction::general(&m, 2, &[0, 0, 1, 1]).unwrap();
        let r = m.action_index("r").unwrap();
        let l = m.action_index("l").unwrap();
        let mut rows = BTreeMap::new();
        rows.insert(ObsLabel::Class(0), r);
        rows.insert(ObsLabel::Class(1), l);
        let sigma = PositionalStrategy::deterministic(rows);
        let chain = induce_chain(&m, &obs, &sigma).unwrap();
        assert_eq!(chain.rows[1].as_slice(), [(2, one())]);
        let values = chain_expected_reward(&chain, 1e-9).unwrap();
        assert_eq!(values.aggregate, Value::Finite(1.5));
    }

    #[test]
    fn uniform_strategy_on_fig2_coloring_gives_ten() {
        let m = worlds::gen_line(5, ratio(1, 2)).unwrap();
        let obs = fig2_obs(&m);
        let sigma = PositionalStrategy::uniform(&m, &obs);
        let values = pomdp_reward_under_strategy(&m, &obs, &sigma, 1e-11).unwrap();
        match values.aggregate {
            Value::Finite(x) => assert!((x - 10.0).abs() < 1e-9, "{x}"),
            Value::Infinite => panic!("expected 10"),
        }
    }

    #[test]
    fn deterministic_strategies_on_fig2_coloring_are_improper() {
        let m = worlds::gen_line(5, ratio(1, 2)).unwrap();
        let obs = fig2_obs(&m);
        for c0 in 0..2usize {
            for c1 in 0..2usize {
                let mut rows = BTreeMap::new();
                rows.insert(ObsLabel::Class(0), c0);
                rows.insert(ObsLabel::Class(1), c1);
                let sigma = PositionalStrategy::deterministic(rows);
                let values = pomdp_reward_under_strategy(&m, &obs, &sigma, 1e-9).unwrap();
                assert_eq!(values.aggregate, Value::Infinite, "σ = ({c0}, {c1})");
            }
        }
    }

    #[test]
    fn chain_of_goals_has_zero_aggregate() {
        let m = worlds::gen_line(3, one()).unwrap();
        let obs = ObservationFunction::blind(&m);
        let r = m.action_index("r").unwrap();
        let mut rows = BTreeMap::new();
        rows.insert(ObsLabel::Class(0), r);
        let sigma = PositionalStrategy::deterministic(rows);
        let mut chain = induce_chain(&m, &obs, &sigma).unwrap();
        chain.initial = alloc::vec![1];
        let values = chain_expected_reward(&chain, 1e-9).unwrap();
        assert_eq!(values.get(1), Value::Finite(0.0));
    }

    #[test]
    fn missing_row_names_the_class() {
        let m = worlds::gen_line(5, one()).unwrap();
        let obs = ObservationFunction::general(&m, 2, &[0, 0, 1, 1]).unwrap();
        let mut rows = BTreeMap::new();
        rows.insert(ObsLabel::Class(0), ActionChoice::Dirac(1));
        let sigma = PositionalStrategy {
            mode: StrategyMode::Deterministic,
            rows,
        };
        assert_eq!(
            induce_chain(&m, &obs, &sigma),
            Err(ChainError::MissingStrategyRow(ObsLabel::Class(1)))
        );
    }

    #[test]
    fn uniform_rows_average_the_action_rows() {
        let m = worlds::gen_line(5, one()).unwrap();
        let obs = ObservationFunction::blind(&m);
        let sigma = PositionalStrategy::uniform(&m, &obs);
        let chain = induce_chain(&m, &obs, &sigma).unwrap();
        // s1: half left to s0, half right to the goal
        assert_eq!(chain.rows[1].as_slice(), [(0, ratio(1, 2)), (2, ratio(1, 2))]);
    }

    #[test]
    fn trap_entering_strategy_is_infinite() {
        let m = worlds::trap();
        let obs = ObservationFunction::general(&m, 2, &[0, 0, 1, 1, 1]).unwrap();
        let b = 1usize;
        let mut rows = BTreeMap::new();
        rows.insert(ObsLabel::Class(0), b);
        rows.insert(ObsLabel::Class(1), b);
        let sigma = PositionalStrategy::deterministic(rows);
        let values = pomdp_reward_under_strategy(&m, &obs, &sigma, 1e-9).unwrap();
        assert_eq!(values.aggregate, Value::Infinite);
    }

    #[test]
    fn iterative_and_direct_agree_on_a_long_line() {
        let m = worlds::gen_line(21, ratio(1, 2)).unwrap();
        let obs = ObservationFunction::full_observability(&m);
        let a = crate::solve::MdpAnalysis::analyze(&m, 1e-12, 1e-6).unwrap();
        let mut rows = BTreeMap::new();
        for s in m.non_goal_states() {
            rows.insert(obs.label(s), a.signatures[s].first().unwrap());
        }
        let sigma = PositionalStrategy::deterministic(
            rows.into_iter().collect::<BTreeMap<_, _>>(),
        );
        let chain = induce_chain(&m, &obs, &sigma).unwrap();
        let k = chain.n_states();
        let dense: Vec<usize> = (0..k).filter(|&s| !chain.is_goal(s)).collect();
        let rewards: Vec<f64> = dense.iter().map(|&s| rat_to_f64(&chain.rewards[s])).collect();
        let mut idx = alloc::vec![usize::MAX; k];
        for (i, &s) in dense.iter().enumerate() {
            idx[s] = i;
        }
        let rows_f: Vec<Vec<(usize, f64)>> = dense
            .iter()
            .map(|&s| {
                chain.rows[s]
                    .iter()
                    .filter(|(t, _)| idx[*t] != usize::MAX)
                    .map(|(t, p)| (idx[*t], rat_to_f64(p)))
                    .collect()
            })
            .collect();
        let vd = solve_direct(&rows_f, &rewards, 1e-9).unwrap();
        let vi = solve_iterative(&rows_f, &rewards, 1e-12).unwrap();
        for i in 0..vd.len() {
            assert!((vd[i] - vi[i]).abs() < 1e-6, "{} vs {}", vd[i], vi[i]);
        }
    }
}
