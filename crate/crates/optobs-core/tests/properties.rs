//! Cross-cutting invariants: exact row sums, information monotonicity,
//! Monte-Carlo cross-validation of the chain solver, value-iteration vs
//! linear-solve agreement, closed-form grid optima, and exhaustive
//! instantiation soundness of the parametric chains.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use optobs_core::chain::{chain_expected_reward, induce_chain, pomdp_reward_under_strategy};
use optobs_core::mdp::Mdp;
use optobs_core::obs::{ObsLabel, ObservationFunction};
use optobs_core::rational::{one, rat_to_f64, Rat};
use optobs_core::solve::{min_expected_reward, MdpAnalysis};
use optobs_core::strategy::{ActionChoice, PositionalStrategy, StrategyMode};
use optobs_core::tpmc::{build_location_tpmc, build_observation_tpmc, VarRole};
use optobs_core::value::Value;
use optobs_core::worlds::{self, GoalMode};

/// Best deterministic positional reward for a fixed observation function,
/// by exhaustive enumeration of all per-class action choices.
fn best_deterministic(m: &Mdp, obs: &ObservationFunction) -> Value {
    let classes = obs.classes();
    let n_actions = m.n_actions();
    let combos = n_actions.pow(classes.len() as u32);
    let mut best = Value::Infinite;
    for combo in 0..combos {
        let mut rows = BTreeMap::new();
        let mut c = combo;
        for label in &classes {
            rows.insert(*label, c % n_actions);
            c /= n_actions;
        }
        let sigma = PositionalStrategy::deterministic(rows);
        let values = pomdp_reward_under_strategy(m, obs, &sigma, 1e-10).unwrap();
        if values.aggregate < best {
            best = values.aggregate;
        }
    }
    best
}

#[test]
fn information_monotonicity_on_refined_observations() {
    // refining an observation function can only improve the best
    // deterministic reward
    for seed in 0..24u64 {
        let m = worlds::gen_random_small(seed, 8, 2);
        let non_goal: Vec<usize> = m.non_goal_states().collect();
        if non_goal.len() < 3 {
            continue;
        }
        let mut rng = StdRng::seed_from_u64(seed ^ 0xbeef);
        // coarse partition into 2 classes, refinement splits class 0
        let coarse: Vec<usize> = non_goal.iter().map(|_| rng.gen_range(0..2usize)).collect();
        if coarse.iter().all(|&c| c == coarse[0]) {
            continue;
        }
        let mut fine = coarse.clone();
        let mut split = false;
        for f in fine.iter_mut() {
            if *f == 0 {
                if split {
                    *f = 2;
                }
                split = true;
            }
        }
        let coarse_obs = ObservationFunction::general(&m, 2, &coarse).unwrap();
        let fine_obs = ObservationFunction::general(&m, 3, &fine).unwrap();
        let coarse_best = best_deterministic(&m, &coarse_obs);
        let fine_best = best_deterministic(&m, &fine_obs);
        match (fine_best, coarse_best) {
            (Value::Infinite, Value::Finite(_)) => {
                panic!("seed {seed}: refinement lost a finite strategy")
            }
            (Value::Finite(f), Value::Finite(c)) => {
                assert!(f <= c + 1e-7, "seed {seed}: {f} > {c}")
            }
            _ => {}
        }
    }
}

#[test]
fn chain_solver_agrees_with_monte_carlo() {
    const EPISODES: usize = 100_000;
    const CAP: usize = 2_000;
    for seed in 0..15u64 {
        let m = worlds::gen_random_small(seed, 6, 2);
        let obs = ObservationFunction::full_observability(&m);
        let sigma = PositionalStrategy::uniform(&m, &obs);
        let chain = induce_chain(&m, &obs, &sigma).unwrap();
        let exact = chain_expected_reward(&chain, 1e-12).unwrap();

        let rows_f: Vec<Vec<(usize, f64)>> = chain
            .rows
            .iter()
            .map(|row| row.iter().map(|(t, p)| (*t, rat_to_f64(p))).collect())
            .collect();
        let rewards: Vec<f64> = chain.rewards.iter().map(rat_to_f64).collect();
        let mut rng = StdRng::seed_from_u64(seed ^ 0xfeed);
        let mut sum = 0.0f64;
        let mut sumsq = 0.0f64;
        let mut capped = 0usize;
        for _ in 0..EPISODES {
            // one capped episode already certifies the infinite verdict
            if capped > 0 && !exact.aggregate.is_finite() {
                break;
            }
            let mut s = chain.initial[rng.gen_range(0..chain.initial.len())];
            let mut total = 0.0;
            let mut steps = 0;
            while !chain.is_goal(s) && steps < CAP {
                total += rewards[s];
                let draw: f64 = rng.gen();
                let mut acc = 0.0;
                let mut next = s;
                for (t, p) in &rows_f[s] {
                    acc += p;
                    if draw < acc {
                        next = *t;
                        break;
                    }
                }
                s = next;
                steps += 1;
            }
            if steps >= CAP {
                capped += 1;
            }
            sum += total;
            sumsq += total * total;
        }
        match exact.aggregate {
            Value::Finite(v) => {
                assert_eq!(capped, 0, "seed {seed}: finite chain hit the step cap");
                let mean = sum / EPISODES as f64;
                let var = (sumsq / EPISODES as f64 - mean * mean).max(0.0);
                let se = (var / EPISODES as f64).sqrt();
                assert!(
                    (mean - v).abs() <= 3.0 * se + 1e-6,
                    "seed {seed}: exact {v}, estimate {mean} ± {se}"
                );
            }
            Value::Infinite => {
                assert!(capped > 0, "seed {seed}: infinite chain but all episodes ended");
            }
        }
    }
}

#[test]
fn greedy_chain_value_matches_value_iteration() {
    let models = vec![
        worlds::gen_line(9, one()).unwrap(),
        worlds::gen_line(15, optobs_core::rational::ratio(1, 2)).unwrap(),
        worlds::gen_grid(4, GoalMode::Corner).unwrap(),
        worlds::gen_maze(5, None).unwrap(),
    ];
    for m in models {
        let a = MdpAnalysis::analyze(&m, 1e-12, 1e-6).unwrap();
        let obs = ObservationFunction::full_observability(&m);
        let mut rows = BTreeMap::new();
        for s in m.non_goal_states() {
            rows.insert(obs.label(s), a.signatures[s].first().unwrap());
        }
        let sigma = PositionalStrategy::deterministic(rows);
        let values = pomdp_reward_under_strategy(&m, &obs, &sigma, 1e-12).unwrap();
        for s in 0..m.n_states() {
            match (values.get(s), a.values.get(s)) {
                (Value::Finite(c), Value::Finite(v)) => {
                    assert!((c - v).abs() < 1e-8, "state {s}: chain {c}, vi {v}")
                }
                (c, v) => assert_eq!(c, v, "state {s}"),
            }
        }
    }
}

#[test]
fn grid_optima_follow_the_mean_manhattan_formula() {
    for k in [3usize, 6, 20, 24] {
        let m = worlds::gen_grid(k, GoalMode::Corner).unwrap();
        let (values, _) = min_expected_reward(&m, 1e-9).unwrap();
        let n = (k * k) as f64;
        let expect = n * (k as f64 - 1.0) / (n - 1.0);
        match values.aggregate {
            Value::Finite(x) => assert!((x - expect).abs() < 1e-9, "k={k}: {x} vs {expect}"),
            Value::Infinite => panic!("k={k}: infinite"),
        }
    }
}

#[test]
fn benchmark_families_have_the_expected_group_counts() {
    use optobs_core::groups::atomic_groups;
    for (m, want) in [
        (worlds::gen_line(61, one()).unwrap(), 2),
        (worlds::gen_line(249, one()).unwrap(), 2),
        (worlds::gen_grid(6, GoalMode::Corner).unwrap(), 3),
        (worlds::gen_grid(20, GoalMode::Corner).unwrap(), 3),
        (worlds::gen_maze(7, None).unwrap(), 4),
        (worlds::gen_maze(15, None).unwrap(), 4),
        (worlds::gen_maze(39, None).unwrap(), 4),
    ] {
        let a = MdpAnalysis::analyze(&m, 1e-9, 1e-6).unwrap();
        let g = atomic_groups(&m, &a.signatures);
        assert_eq!(g.len(), want, "{} states", m.n_states());
    }
}

/// Every deterministic instantiation of the observation tpMC evaluates to
/// exactly the induced chain of the corresponding observation function and
/// strategy.
#[test]
fn observation_tpmc_instantiation_soundness_exhaustive() {
    for seed in [3u64, 11, 19] {
        let m = worlds::gen_random_small(seed, 6, 2);
        let non_goal: Vec<usize> = m.non_goal_states().collect();
        let budget = 2usize;
        let t = build_observation_tpmc(&m, budget).unwrap();

        let obs_combos = budget.pow(non_goal.len() as u32);
        let act_combos = m.n_actions().pow(budget as u32);
        for oc in 0..obs_combos {
            let mut classes = Vec::with_capacity(non_goal.len());
            let mut c = oc;
            for _ in 0..non_goal.len() {
                classes.push(c % budget);
                c /= budget;
            }
            let obs = ObservationFunction::general(&m, budget, &classes).unwrap();
            for ac in 0..act_combos {
                let mut acts = Vec::with_capacity(budget);
                let mut c = ac;
                for _ in 0..budget {
                    acts.push(c % m.n_actions());
                    c /= m.n_actions();
                }
                let mut rows = BTreeMap::new();
                for (o, &a) in acts.iter().enumerate() {
                    rows.insert(ObsLabel::Class(o), a);
                }
                let sigma = PositionalStrategy::deterministic(rows);

                let mut values = vec![Rat::zero(); t.vars.len()];
                for (i, v) in t.vars.iter().enumerate() {
                    match &v.role {
                        VarRole::ObsAssign { state, obs: o } => {
                            if obs.label(*state) == ObsLabel::Class(*o) {
                                values[i] = one();
                            }
                        }
                        VarRole::Strategy { row, action } => {
                            if let ObsLabel::Class(o) = row {
                                if acts[*o] == *action {
                                    values[i] = one();
                                }
                            }
                        }
                        VarRole::SensorSwitch { .. } => {}
                    }
                }
                let matrix = t.instantiate(&values);
                let chain = induce_chain(&m, &obs, &sigma).unwrap();
                assert_eq!(matrix, chain.rows, "seed {seed}, obs {oc}, acts {ac}");
            }
        }
    }
}

/// Same soundness statement for the location tpMC, over every sensor subset
/// and deterministic strategy of a small line.
#[test]
fn location_tpmc_instantiation_soundness_exhaustive() {
    let m = worlds::gen_line(5, optobs_core::rational::ratio(1, 2)).unwrap();
    let t = build_location_tpmc(&m, 2).unwrap();
    let non_goal: Vec<usize> = m.non_goal_states().collect();

    for subset in 0..(1usize << non_goal.len()) {
        let sensors: Vec<usize> = non_goal
            .iter()
            .enumerate()
            .filter(|(i, _)| subset & (1 << i) != 0)
            .map(|(_, s)| *s)
            .collect();
        let obs = ObservationFunction::location(&m, &sensors).unwrap();
        let rows_needed: Vec<ObsLabel> = obs.classes();
        let act_combos = m.n_actions().pow(rows_needed.len() as u32);
        for ac in 0..act_combos {
            let mut choice = BTreeMap::new();
            let mut c = ac;
            for label in &rows_needed {
                choice.insert(*label, c % m.n_actions());
                c /= m.n_actions();
            }
            let sigma = PositionalStrategy::deterministic(choice.clone());

            let mut values = vec![Rat::zero(); t.vars.len()];
            for (i, v) in t.vars.iter().enumerate() {
                match &v.role {
                    VarRole::SensorSwitch { state } => {
                        if obs.label(*state) == ObsLabel::At(*state) {
                            values[i] = one();
                        }
                    }
                    VarRole::Strategy { row, action } => {
                        // unused rows can hold anything; pick the first action
                        let picked = choice.get(row).copied().unwrap_or(0);
                        if picked == *action {
                            values[i] = one();
                        }
                    }
                    VarRole::ObsAssign { .. } => {}
                }
            }
            let matrix = t.instantiate(&values);
            let chain = induce_chain(&m, &obs, &sigma).unwrap();
            assert_eq!(matrix, chain.rows, "sensors {sensors:?}, acts {ac}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Induced chain rows sum to one, exactly.
    #[test]
    fn induced_rows_sum_to_one(seed in 0u64..500, wa in 1u32..5, wb in 1u32..5) {
        let m = worlds::gen_random_small(seed, 7, 2);
        let obs = ObservationFunction::blind(&m);
        let total = wa + wb;
        let dist = if m.n_actions() == 2 {
            vec![
                Rat::new((wa as i64).into(), (total as i64).into()),
                Rat::new((wb as i64).into(), (total as i64).into()),
            ]
        } else {
            vec![Rat::one()]
        };
        let mut rows = BTreeMap::new();
        rows.insert(ObsLabel::Class(0), ActionChoice::Distribution(dist));
        let sigma = PositionalStrategy { mode: StrategyMode::Randomized, rows };
        let chain = induce_chain(&m, &obs, &sigma).unwrap();
        for (s, row) in chain.rows.iter().enumerate() {
            let total: Rat = row.iter().map(|(_, p)| p.clone()).sum();
            prop_assert!(total.is_one(), "row {s} sums to {total}");
        }
    }

    /// Parsing and formatting of rational literals round-trips.
    #[test]
    fn rational_strings_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let q = Rat::new(n.into(), d.into());
        let s = optobs_core::rational::format_rat(&q);
        prop_assert_eq!(optobs_core::rational::parse_rat(&s).unwrap(), q);
    }
}
