//! Benchmark world generators: line, grid and maze families, plus the
//! six-state trap counterexample and a seeded generator for small random
//! models used by the verification suites.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::{One, Zero};
use rand_core::{RngCore, SeedableRng};

use crate::mdp::{Mdp, SparseRow};
use crate::rational::{one, zero, Rat};

/// Grid goal placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalMode {
    /// Bottom-right corner, index `k² − 1`.
    Corner,
    /// Centermost state, index `(k² − 1)/2`; requires odd `k`.
    Center,
}

/// Parsed description of a benchmark world.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldSpec {
    pub family: Family,
    pub size: usize,
    /// Success probability; line family only.
    pub p: Rat,
    pub goal: GoalMode,
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Line,
    Grid,
    Maze,
}

/// Raised on malformed generator parameters.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorldError {
    #[error("line size {0} must be odd and at least 3")]
    BadLineSize(usize),
    #[error("success probability must be in (0, 1]")]
    BadProbability,
    #[error("grid size {0} must be at least 2")]
    BadGridSize(usize),
    #[error("grid center goal requires odd size, got {0}")]
    CenterNeedsOdd(usize),
    #[error("maze size {0} must be odd and at least 5")]
    BadMazeSize(usize),
    #[error("maze needs at least 2 rows, got {0}")]
    BadMazeRows(usize),
}

impl WorldSpec {
    pub fn build(&self) -> Result<Mdp, WorldError> {
        match self.family {
            Family::Line => gen_line(self.size, self.p.clone()),
            Family::Grid => gen_grid(self.size, self.goal),
            Family::Maze => gen_maze(self.size, self.rows),
        }
    }
}

fn dirac(t: usize) -> SparseRow {
    alloc::vec![(t, one())]
}

/// Line world of `k` states: goal in the middle, actions `l`/`r`, interior
/// moves succeed with probability `p` and otherwise self-loop, outward moves
/// at the boundary self-loop with probability one.
pub fn gen_line(k: usize, p: Rat) -> Result<Mdp, WorldError> {
    if k < 3 || k % 2 == 0 {
        return Err(WorldError::BadLineSize(k));
    }
    if p <= Rat::zero() || p > Rat::one() {
        return Err(WorldError::BadProbability);
    }
    let goal = (k - 1) / 2;
    let fail = Rat::one() - &p;

    let move_to = |s: usize, t: usize| -> SparseRow {
        if p.is_one() {
            dirac(t)
        } else {
            alloc::vec![(t, p.clone()), (s, fail.clone())]
        }
    };

    let mut transitions = Vec::with_capacity(k);
    for s in 0..k {
        if s == goal {
            transitions.push(alloc::vec![dirac(s), dirac(s)]);
            continue;
        }
        let left = if s == 0 { dirac(s) } else { move_to(s, s - 1) };
        let right = if s == k - 1 { dirac(s) } else { move_to(s, s + 1) };
        transitions.push(alloc::vec![left, right]);
    }

    Ok(Mdp {
        actions: alloc::vec!["l".to_string(), "r".to_string()],
        initial: (0..k).filter(|&s| s != goal).collect(),
        goals: alloc::vec![goal],
        rewards: (0..k).map(|s| if s == goal { zero() } else { one() }).collect(),
        transitions,
    })
}

/// `k × k` grid world in row-major order with deterministic compass moves;
/// moves into a wall self-loop.
pub fn gen_grid(k: usize, goal: GoalMode) -> Result<Mdp, WorldError> {
    if k < 2 {
        return Err(WorldError::BadGridSize(k));
    }
    if goal == GoalMode::Center && k % 2 == 0 {
        return Err(WorldError::CenterNeedsOdd(k));
    }
    let n = k * k;
    let goal_idx = match goal {
        GoalMode::Corner => n - 1,
        GoalMode::Center => (n - 1) / 2,
    };

    let mut transitions = Vec::with_capacity(n);
    for s in 0..n {
        if s == goal_idx {
            transitions.push(alloc::vec![dirac(s); 4]);
            continue;
        }
        let (i, j) = (s / k, s % k);
        let left = if j > 0 { dirac(s - 1) } else { dirac(s) };
        let right = if j + 1 < k { dirac(s + 1) } else { dirac(s) };
        let up = if i > 0 { dirac(s - k) } else { dirac(s) };
        let down = if i + 1 < k { dirac(s + k) } else { dirac(s) };
        transitions.push(alloc::vec![left, right, up, down]);
    }

    Ok(Mdp {
        actions: alloc::vec![
            "left".to_string(),
            "right".to_string(),
            "up".to_string(),
            "down".to_string(),
        ],
        initial: (0..n).filter(|&s| s != goal_idx).collect(),
        goals: alloc::vec![goal_idx],
        rewards: (0..n)
            .map(|s| if s == goal_idx { zero() } else { one() })
            .collect(),
        transitions,
    })
}

/// Maze with a top row of `k` cells and three vertical corridors under
/// columns `0`, `(k−1)/2` and `k−1`. The goal is the bottom cell of the
/// middle corridor. State order: top row first, then per corridor row the
/// left/middle/right cells. `rows` defaults to `(k+1)/2`.
pub fn gen_maze(k: usize, rows: Option<usize>) -> Result<Mdp, WorldError> {
    if k < 5 || k % 2 == 0 {
        return Err(WorldError::BadMazeSize(k));
    }
    let rows = rows.unwrap_or((k + 1) / 2);
    if rows < 2 {
        return Err(WorldError::BadMazeRows(rows));
    }
    let cols = [0, (k - 1) / 2, k - 1];
    let n = k + 3 * (rows - 1);
    // corridor cell (r, c_i) for r in 1..rows has index k + 3*(r-1) + i
    let corridor = |r: usize, i: usize| k + 3 * (r - 1) + i;
    let goal_idx = corridor(rows - 1, 1);

    let mut transitions = Vec::with_capacity(n);
    for s in 0..n {
        if s == goal_idx {
            transitions.push(alloc::vec![dirac(s); 4]);
            continue;
        }
        let (left, right, up, down);
        if s < k {
            // top row cell (0, s)
            left = if s > 0 { dirac(s - 1) } else { dirac(s) };
            right = if s + 1 < k { dirac(s + 1) } else { dirac(s) };
            up = dirac(s);
            down = match cols.iter().position(|&c| c == s) {
                Some(i) => dirac(corridor(1, i)),
                None => dirac(s),
            };
        } else {
            let r = (s - k) / 3 + 1;
            let i = (s - k) % 3;
            left = dirac(s);
            right = dirac(s);
            up = if r == 1 { dirac(cols[i]) } else { dirac(corridor(r - 1, i)) };
            down = if r + 1 < rows { dirac(corridor(r + 1, i)) } else { dirac(s) };
        }
        transitions.push(alloc::vec![left, right, up, down]);
    }

    Ok(Mdp {
        actions: alloc::vec![
            "left".to_string(),
            "right".to_string(),
            "up".to_string(),
            "down".to_string(),
        ],
        initial: (0..n).filter(|&s| s != goal_idx).collect(),
        goals: alloc::vec![goal_idx],
        rewards: (0..n)
            .map(|s| if s == goal_idx { zero() } else { one() })
            .collect(),
        transitions,
    })
}

/// Six-state MDP with an inescapable trap state `s2` and goal `s3`. States
/// `s1` and `s4` share the optimal signature `{a}` yet any valid
/// two-observation certificate must separate them, which defeats
/// partition-based enumeration.
pub fn trap() -> Mdp {
    let rows = |a: SparseRow, b: SparseRow, c: SparseRow| alloc::vec![a, b, c];
    Mdp {
        actions: alloc::vec!["a".to_string(), "b".to_string(), "c".to_string()],
        initial: alloc::vec![0, 1, 4, 5],
        goals: alloc::vec![3],
        rewards: alloc::vec![one(), one(), one(), zero(), one(), one()],
        transitions: alloc::vec![
            rows(dirac(0), dirac(2), dirac(3)), // s0: a loops, b traps, c wins
            rows(dirac(3), dirac(2), dirac(1)), // s1: a wins, b traps, c loops
            rows(dirac(2), dirac(2), dirac(2)), // s2: the trap
            rows(dirac(3), dirac(3), dirac(3)), // s3: goal
            rows(dirac(3), dirac(4), dirac(2)), // s4: a wins, b loops, c traps
            rows(dirac(5), dirac(3), dirac(2)), // s5: a loops, b wins, c traps
        ],
    }
}

/// Seeded generator for small random MDPs used by property and
/// cross-validation suites. Probabilities are exact rationals obtained by
/// normalizing small integer weights; goals are absorbing, rewards are one
/// off-goal.
pub fn gen_random_small(seed: u64, max_states: usize, max_actions: usize) -> Mdp {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |lo: usize, hi: usize| -> usize {
        lo + (rng.next_u64() as usize) % (hi - lo + 1)
    };
    let n = pick(3, max_states.max(3));
    let n_actions = pick(1, max_actions.max(1));
    let goal = pick(0, n - 1);

    let mut transitions = Vec::with_capacity(n);
    for s in 0..n {
        let mut rows = Vec::with_capacity(n_actions);
        for _ in 0..n_actions {
            if s == goal {
                rows.push(dirac(s));
                continue;
            }
            let k = pick(1, 3.min(n));
            let mut succs = Vec::new();
            while succs.len() < k {
                let t = pick(0, n - 1);
                if !succs.contains(&t) {
                    succs.push(t);
                }
            }
            let weights: Vec<usize> = (0..k).map(|_| pick(1, 4)).collect();
            let total: usize = weights.iter().sum();
            let mut row: SparseRow = succs
                .into_iter()
                .zip(weights)
                .map(|(t, w)| (t, Rat::new((w as i64).into(), (total as i64).into())))
                .collect();
            row.sort_by_key(|(t, _)| *t);
            rows.push(row);
        }
        transitions.push(rows);
    }

    Mdp {
        actions: (0..n_actions).map(|a| alloc::format!("a{a}")).collect(),
        initial: (0..n).filter(|&s| s != goal).collect(),
        goals: alloc::vec![goal],
        rewards: (0..n).map(|s| if s == goal { zero() } else { one() }).collect(),
        transitions,
    }
}

/// Names the state for diagnostics, e.g. `s12`.
pub fn state_name(s: usize) -> String {
    alloc::format!("s{s}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn line_matches_figure_edge_for_edge() {
        let m = gen_line(5, ratio(1, 2)).unwrap();
        assert!(m.validate().is_ok());
        assert_eq!(m.goals, alloc::vec![2]);
        assert_eq!(m.initial, alloc::vec![0, 1, 3, 4]);
        let r = m.action_index("r").unwrap();
        let l = m.action_index("l").unwrap();
        // s1 under r: 1/2 to goal, 1/2 self-loop
        assert_eq!(m.row(1, r).as_slice(), [(2, ratio(1, 2)), (1, ratio(1, 2))]);
        // boundary outward move self-loops with probability 1
        assert_eq!(m.row(0, l).as_slice(), [(0, ratio(1, 1))]);
    }

    #[test]
    fn line_rejects_even_sizes() {
        assert!(gen_line(4, ratio(1, 2)).is_err());
        assert!(gen_line(5, ratio(3, 2)).is_err());
    }

    #[test]
    fn grid_shapes() {
        let m = gen_grid(3, GoalMode::Corner).unwrap();
        assert!(m.validate().is_ok());
        assert_eq!(m.n_states(), 9);
        assert_eq!(m.goals, alloc::vec![8]);
        let c = gen_grid(7, GoalMode::Center).unwrap();
        assert_eq!(c.goals, alloc::vec![24]);
        assert!(gen_grid(4, GoalMode::Center).is_err());
    }

    #[test]
    fn maze_reproduces_the_eleven_state_layout() {
        let m = gen_maze(5, None).unwrap();
        assert!(m.validate().is_ok());
        assert_eq!(m.n_states(), 11);
        assert_eq!(m.goals, alloc::vec![9]);
        let down = m.action_index("down").unwrap();
        let up = m.action_index("up").unwrap();
        let right = m.action_index("right").unwrap();
        assert_eq!(m.row(2, down).as_slice(), [(6, one())]);
        assert_eq!(m.row(6, up).as_slice(), [(2, one())]);
        assert_eq!(m.row(6, down).as_slice(), [(9, one())]);
        assert_eq!(m.row(0, right).as_slice(), [(1, one())]);
        assert_eq!(m.row(1, down).as_slice(), [(1, one())]);
        assert_eq!(m.row(10, up).as_slice(), [(7, one())]);
    }

    #[test]
    fn maze_state_count_formula() {
        assert_eq!(gen_maze(7, None).unwrap().n_states(), 16);
        assert_eq!(gen_maze(39, None).unwrap().n_states(), 96);
        assert_eq!(gen_maze(15, None).unwrap().n_states(), 36);
        assert!(gen_maze(6, None).is_err());
    }

    #[test]
    fn trap_is_valid_and_shaped() {
        let m = trap();
        assert!(m.validate().is_ok());
        assert_eq!(m.n_states(), 6);
        assert_eq!(m.goals, alloc::vec![3]);
    }

    #[test]
    fn random_small_is_valid_and_deterministic() {
        for seed in 0..50 {
            let m = gen_random_small(seed, 6, 2);
            assert!(m.validate().is_ok(), "seed {seed}: {}", m.validate());
            assert_eq!(m, gen_random_small(seed, 6, 2));
        }
    }
}
