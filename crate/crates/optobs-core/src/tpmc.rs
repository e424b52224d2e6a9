//! Typed parametric Markov chains: Markov chains whose transition
//! probabilities are polynomials over typed variables, built from an MDP by
//! leaving the observation assignment and the positional strategy symbolic.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::mdp::{Mdp, SparseRow};
use crate::obs::{ObsKind, ObsLabel, ObservationFunction};
use crate::rational::Rat;

/// Index into [`TpMc::vars`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// What a typed variable stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarRole {
    /// `y_{s,o}`: state `s` carries observation `o`.
    ObsAssign { state: usize, obs: usize },
    /// `y_s`: the location sensor of state `s` is on.
    SensorSwitch { state: usize },
    /// `x_{row,a}`: probability of action `a` under the given observation row.
    Strategy { row: ObsLabel, action: usize },
}

/// A typed variable of the parametric chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedVar {
    pub name: String,
    pub role: VarRole,
    /// `{0,1}`-valued (sum types 𝔹 / 𝔹_{=C}); real-valued in `[0,1]` otherwise.
    pub binary: bool,
    /// Sum-type group this variable belongs to, if any.
    pub group: Option<usize>,
}

/// Sum-type group: all members sum to `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumGroup {
    pub kind: GroupKind,
    pub members: Vec<VarId>,
    pub target: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupKind {
    /// `𝔹^s_{=1}`: one observation per state.
    ObsOneHot { state: usize },
    /// `𝔹_{=B}`: exactly `B` sensors on.
    SensorBudget,
    /// `ℝ^o_{=1}`: a probability distribution per observation row.
    StrategyRow { row: ObsLabel },
}

/// Either a live variable or a constant fixed by substitution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YRef {
    Var(VarId),
    Fixed(bool),
}

/// A monomial: rational coefficient times a (sorted) product of variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: Rat,
    pub vars: Vec<VarId>,
}

/// Multivariate polynomial with rational coefficients in canonical form:
/// monomials sorted by variable list, no zero coefficients, like terms
/// combined.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    pub terms: Vec<Monomial>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Rat) -> Poly {
        let mut p = Poly::zero();
        p.add_term(c, Vec::new());
        p
    }

    /// Adds `coeff · Π vars` and restores canonical form.
    pub fn add_term(&mut self, coeff: Rat, mut vars: Vec<VarId>) {
        if coeff.is_zero() {
            return;
        }
        vars.sort_unstable();
        match self.terms.binary_search_by(|m| m.vars.cmp(&vars)) {
            Ok(i) => {
                self.terms[i].coeff += coeff;
                if self.terms[i].coeff.is_zero() {
                    self.terms.remove(i);
                }
            }
            Err(i) => self.terms.insert(i, Monomial { coeff, vars }),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluates under a full assignment of variable values.
    pub fn eval(&self, values: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for m in &self.terms {
            let mut term = m.coeff.clone();
            for v in &m.vars {
                term *= &values[v.0];
            }
            acc += term;
        }
        acc
    }
}

/// Which construction the chain came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpMcKind {
    /// Observation assignment `y_{s,o}` over `O = {1..B}`.
    Observation { budget: usize },
    /// Location sensors `y_s` with the `⊥` fallback row.
    Location { budget: usize },
}

/// A typed parametric Markov chain over an MDP skeleton.
#[derive(Debug, Clone)]
pub struct TpMc {
    pub kind: TpMcKind,
    /// The underlying MDP (states, initial, goals, rewards, concrete rows).
    pub mdp: Mdp,
    pub vars: Vec<TypedVar>,
    pub groups: Vec<SumGroup>,
    /// Observation kind: `y[s][o]`; empty for goal states.
    pub y_obs: Vec<Vec<YRef>>,
    /// Location kind: `y[s]`; `Fixed(true)` for goal states.
    pub y_loc: Vec<YRef>,
    /// Strategy rows, dense in actions.
    pub x_rows: BTreeMap<ObsLabel, Vec<VarId>>,
    /// Parametric transition matrix, sparse per state.
    pub trans: Vec<Vec<(usize, Poly)>>,
    /// States with no path to a goal under any strategy. Their Bellman rows
    /// are meaningless (`v = rew + v`), so encodings exclude them and forbid
    /// transitions into them instead.
    pub doomed: Vec<bool>,
}

/// Raised by tpMC construction and substitution.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TpMcError {
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("observation function has {classes} classes, tpMC budget is {budget}")]
    ClassCountMismatch { classes: usize, budget: usize },
    #[error("observation kind does not match the tpMC construction")]
    KindMismatch,
    #[error("sensor on state s{0} is not a non-goal state of the tpMC")]
    BadSensor(usize),
}

impl TpMc {
    pub fn n_states(&self) -> usize {
        self.mdp.n_states()
    }

    pub fn var(&self, id: VarId) -> &TypedVar {
        &self.vars[id.0]
    }

    pub fn x_var(&self, row: ObsLabel, action: usize) -> Option<VarId> {
        self.x_rows.get(&row).map(|r| r[action])
    }

    /// Instantiates the parametric matrix under concrete variable values
    /// (indexed by `VarId`), dropping zero entries.
    pub fn instantiate(&self, values: &[Rat]) -> Vec<SparseRow> {
        self.trans
            .iter()
            .map(|row| {
                row.iter()
                    .filter_map(|(t, poly)| {
                        let p = poly.eval(values);
                        (!p.is_zero()).then_some((*t, p))
                    })
                    .collect()
            })
            .collect()
    }
}

/// Builds the observation tpMC for budget `B`: variables `y_{s,o}` per
/// non-goal state and observation, `x_{o,a}` per observation and action,
/// and transition polynomials
/// `P(s,s′) = Σ_a Σ_o y_{s,o} · x_{o,a} · P_M(s,a)(s′)`.
pub fn build_observation_tpmc(m: &Mdp, budget: usize) -> Result<TpMc, TpMcError> {
    if budget == 0 {
        return Err(TpMcError::ZeroBudget);
    }
    let n = m.n_states();
    let mut vars = Vec::new();
    let mut groups = Vec::new();
    let mut y_obs: Vec<Vec<YRef>> = alloc::vec![Vec::new(); n];

    for s in m.non_goal_states() {
        let gid = groups.len();
        let mut members = Vec::with_capacity(budget);
        for o in 0..budget {
            let id = VarId(vars.len());
            vars.push(TypedVar {
                name: alloc::format!("y_s{s}_o{o}"),
                role: VarRole::ObsAssign { state: s, obs: o },
                binary: true,
                group: Some(gid),
            });
            members.push(id);
            y_obs[s].push(YRef::Var(id));
        }
        groups.push(SumGroup {
            kind: GroupKind::ObsOneHot { state: s },
            members,
            target: Rat::one(),
        });
    }

    let mut x_rows = BTreeMap::new();
    for o in 0..budget {
        let gid = groups.len();
        let row_label = ObsLabel::Class(o);
        let mut members = Vec::with_capacity(m.n_actions());
        for a in 0..m.n_actions() {
            let id = VarId(vars.len());
            vars.push(TypedVar {
                name: alloc::format!("x_o{o}_a{a}"),
                role: VarRole::Strategy { row: row_label, action: a },
                binary: false,
                group: Some(gid),
            });
            members.push(id);
        }
        groups.push(SumGroup {
            kind: GroupKind::StrategyRow { row: row_label },
            members: members.clone(),
            target: Rat::one(),
        });
        x_rows.insert(row_label, members);
    }

    let mut trans: Vec<Vec<(usize, Poly)>> = Vec::with_capacity(n);
    for s in 0..n {
        if m.is_goal(s) {
            trans.push(alloc::vec![(s, Poly::constant(Rat::one()))]);
            continue;
        }
        let mut row: BTreeMap<usize, Poly> = BTreeMap::new();
        for (a, arow) in m.transitions[s].iter().enumerate() {
            for (t, p) in arow {
                let poly = row.entry(*t).or_default();
                for o in 0..budget {
                    let y = match y_obs[s][o] {
                        YRef::Var(id) => id,
                        YRef::Fixed(_) => unreachable!("fresh build has no fixed vars"),
                    };
                    let x = x_rows[&ObsLabel::Class(o)][a];
                    poly.add_term(p.clone(), alloc::vec![y, x]);
                }
            }
        }
        trans.push(row.into_iter().collect());
    }

    let doomed = m.doomed_states();
    Ok(TpMc {
        kind: TpMcKind::Observation { budget },
        mdp: m.clone(),
        vars,
        groups,
        y_obs,
        y_loc: Vec::new(),
        x_rows,
        trans,
        doomed,
    })
}

/// Builds the location tpMC for budget `B`: one sensor switch `y_s` per
/// non-goal state (exactly `B` of them on), strategy rows per location plus
/// one `⊥` row, and transition polynomials
/// `P(s,s′) = Σ_a [ y_s·x_{s,a} + (1−y_s)·x_{⊥,a} ] · P_M(s,a)(s′)`.
pub fn build_location_tpmc(m: &Mdp, budget: usize) -> Result<TpMc, TpMcError> {
    if budget == 0 {
        return Err(TpMcError::ZeroBudget);
    }
    let n = m.n_states();
    let mut vars = Vec::new();
    let mut groups = Vec::new();
    let mut y_loc: Vec<YRef> = alloc::vec![YRef::Fixed(true); n];

    let budget_gid = groups.len();
    let mut budget_members = Vec::new();
    for s in m.non_goal_states() {
        let id = VarId(vars.len());
        vars.push(TypedVar {
            name: alloc::format!("y_s{s}"),
            role: VarRole::SensorSwitch { state: s },
            binary: true,
            group: Some(budget_gid),
        });
        budget_members.push(id);
        y_loc[s] = YRef::Var(id);
    }
    groups.push(SumGroup {
        kind: GroupKind::SensorBudget,
        members: budget_members,
        target: Rat::from_integer((budget as i64).into()),
    });

    let mut x_rows = BTreeMap::new();
    let add_row = |label: ObsLabel, vars: &mut Vec<TypedVar>, groups: &mut Vec<SumGroup>| {
        let gid = groups.len();
        let mut members = Vec::with_capacity(m.n_actions());
        for a in 0..m.n_actions() {
            let id = VarId(vars.len());
            let name = match label {
                ObsLabel::At(s) => alloc::format!("x_at{s}_a{a}"),
                ObsLabel::Blind => alloc::format!("x_bot_a{a}"),
                _ => unreachable!("location rows are At or Blind"),
            };
            vars.push(TypedVar {
                name,
                role: VarRole::Strategy { row: label, action: a },
                binary: false,
                group: Some(gid),
            });
            members.push(id);
        }
        groups.push(SumGroup {
            kind: GroupKind::StrategyRow { row: label },
            members: members.clone(),
            target: Rat::one(),
        });
        members
    };
    for s in m.non_goal_states() {
        let members = add_row(ObsLabel::At(s), &mut vars, &mut groups);
        x_rows.insert(ObsLabel::At(s), members);
    }
    let members = add_row(ObsLabel::Blind, &mut vars, &mut groups);
    x_rows.insert(ObsLabel::Blind, members);

    let mut trans: Vec<Vec<(usize, Poly)>> = Vec::with_capacity(n);
    for s in 0..n {
        if m.is_goal(s) {
            trans.push(alloc::vec![(s, Poly::constant(Rat::one()))]);
            continue;
        }
        let y = match y_loc[s] {
            YRef::Var(id) => id,
            YRef::Fixed(_) => unreachable!("non-goal sensors are variables here"),
        };
        let mut row: BTreeMap<usize, Poly> = BTreeMap::new();
        for (a, arow) in m.transitions[s].iter().enumerate() {
            for (t, p) in arow {
                let poly = row.entry(*t).or_default();
                let x_on = x_rows[&ObsLabel::At(s)][a];
                let x_off = x_rows[&ObsLabel::Blind][a];
                // y·x_on·p + (1−y)·x_off·p, expanded
                poly.add_term(p.clone(), alloc::vec![y, x_on]);
                poly.add_term(p.clone(), alloc::vec![x_off]);
                poly.add_term(-p.clone(), alloc::vec![y, x_off]);
            }
        }
        trans.push(row.into_iter().collect());
    }

    let doomed = m.doomed_states();
    Ok(TpMc {
        kind: TpMcKind::Location { budget },
        mdp: m.clone(),
        vars,
        groups,
        y_obs: Vec::new(),
        y_loc,
        x_rows,
        trans,
        doomed,
    })
}

/// Fixes every observation variable of `t` according to `obs` and folds the
/// polynomials: the result contains strategy variables only.
pub fn substitute_observation(t: &TpMc, obs: &ObservationFunction) -> Result<TpMc, TpMcError> {
    // per old var: Some(new id) if retained, the fixed value otherwise
    enum Subst {
        Keep(VarId),
        Fix(bool),
    }

    let assigned: Vec<Option<bool>> = match (t.kind, obs.kind) {
        (TpMcKind::Observation { budget }, ObsKind::General) => {
            if obs.n_classes > budget {
                return Err(TpMcError::ClassCountMismatch {
                    classes: obs.n_classes,
                    budget,
                });
            }
            t.vars
                .iter()
                .map(|v| match v.role {
                    VarRole::ObsAssign { state, obs: o } => {
                        Some(obs.label(state) == ObsLabel::Class(o))
                    }
                    _ => None,
                })
                .collect()
        }
        (TpMcKind::Location { .. }, ObsKind::Location) => {
            for &s in &obs.sensors() {
                if s >= t.n_states() || t.mdp.is_goal(s) {
                    return Err(TpMcError::BadSensor(s));
                }
            }
            t.vars
                .iter()
                .map(|v| match v.role {
                    VarRole::SensorSwitch { state } => {
                        Some(obs.label(state) == ObsLabel::At(state))
                    }
                    _ => None,
                })
                .collect()
        }
        _ => return Err(TpMcError::KindMismatch),
    };

    let mut subst = Vec::with_capacity(t.vars.len());
    let mut vars = Vec::new();
    for (i, v) in t.vars.iter().enumerate() {
        match assigned[i] {
            Some(value) => subst.push(Subst::Fix(value)),
            None => {
                let id = VarId(vars.len());
                let mut nv = v.clone();
                nv.group = None; // groups rebuilt below
                vars.push(nv);
                subst.push(Subst::Keep(id));
            }
        }
    }

    // rebuild strategy-row groups with remapped ids
    let mut groups = Vec::new();
    for g in &t.groups {
        if !matches!(g.kind, GroupKind::StrategyRow { .. }) {
            continue;
        }
        let gid = groups.len();
        let members: Vec<VarId> = g
            .members
            .iter()
            .map(|old| match subst[old.0] {
                Subst::Keep(id) => id,
                Subst::Fix(_) => unreachable!("strategy variables are never substituted"),
            })
            .collect();
        for &m in &members {
            vars[m.0].group = Some(gid);
        }
        groups.push(SumGroup {
            kind: g.kind.clone(),
            members,
            target: g.target.clone(),
        });
    }

    let x_rows: BTreeMap<ObsLabel, Vec<VarId>> = t
        .x_rows
        .iter()
        .map(|(label, row)| {
            let row = row
                .iter()
                .map(|old| match subst[old.0] {
                    Subst::Keep(id) => id,
                    Subst::Fix(_) => unreachable!("strategy variables are never substituted"),
                })
                .collect();
            (*label, row)
        })
        .collect();

    let trans: Vec<Vec<(usize, Poly)>> = t
        .trans
        .iter()
        .map(|row| {
            row.iter()
                .filter_map(|(target, poly)| {
                    let mut folded = Poly::zero();
                    'mono: for m in &poly.terms {
                        let mut kept = Vec::new();
                        for v in &m.vars {
                            match subst[v.0] {
                                Subst::Keep(id) => kept.push(id),
                                Subst::Fix(true) => {}
                                Subst::Fix(false) => continue 'mono,
                            }
                        }
                        folded.add_term(m.coeff.clone(), kept);
                    }
                    (!folded.is_zero()).then_some((*target, folded))
                })
                .collect()
        })
        .collect();

    let y_obs = t
        .y_obs
        .iter()
        .enumerate()
        .map(|(s, row)| {
            (0..row.len())
                .map(|o| YRef::Fixed(obs.label(s) == ObsLabel::Class(o)))
                .collect()
        })
        .collect();
    let y_loc = (0..t.y_loc.len())
        .map(|s| YRef::Fixed(obs.label(s) == ObsLabel::At(s) || t.mdp.is_goal(s)))
        .collect();

    Ok(TpMc {
        kind: t.kind,
        mdp: t.mdp.clone(),
        vars,
        groups,
        y_obs,
        y_loc,
        x_rows,
        trans,
        doomed: t.doomed.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, ratio};
    use crate::worlds;

    #[test]
    fn observation_tpmc_polynomials_match_the_figure() {
        let m = worlds::gen_line(5, one()).unwrap();
        let t = build_observation_tpmc(&m, 2).unwrap();
        // 4 non-goal states × 2 obs + 2 obs × 2 actions = 12 variables
        assert_eq!(t.vars.len(), 12);
        // s0 -> s1 carries y_{s0,o0}·x_{o0,r} + y_{s0,o1}·x_{o1,r}
        let r = m.action_index("r").unwrap();
        let poly = t.trans[0]
            .iter()
            .find(|(t, _)| *t == 1)
            .map(|(_, p)| p)
            .unwrap();
        assert_eq!(poly.terms.len(), 2);
        for (o, mono) in poly.terms.iter().enumerate() {
            assert_eq!(mono.coeff, one());
            let names: Vec<&str> = mono
                .vars
                .iter()
                .map(|v| t.var(*v).name.as_str())
                .collect();
            assert_eq!(
                names,
                alloc::vec![
                    alloc::format!("y_s0_o{o}").as_str(),
                    alloc::format!("x_o{o}_a{r}").as_str()
                ]
            );
        }
        // the goal row is the constant self-loop
        assert_eq!(t.trans[2].len(), 1);
        assert_eq!(t.trans[2][0].1, Poly::constant(one()));
    }

    #[test]
    fn budget_one_has_a_single_strategy_row() {
        let m = worlds::gen_line(5, one()).unwrap();
        let t = build_observation_tpmc(&m, 1).unwrap();
        assert_eq!(t.x_rows.len(), 1);
        // every non-goal state owns exactly one y variable
        for s in m.non_goal_states() {
            assert_eq!(t.y_obs[s].len(), 1);
        }
        assert!(build_observation_tpmc(&m, 0).is_err());
    }

    #[test]
    fn location_tpmc_has_one_row_per_state_plus_blind() {
        let m = worlds::gen_line(5, one()).unwrap();
        let t = build_location_tpmc(&m, 2).unwrap();
        assert_eq!(t.x_rows.len(), 5); // 4 locations + ⊥
        // s0 -> s1 with p=1: x_bot_r + y0·x_at0_r − y0·x_bot_r
        let r = m.action_index("r").unwrap();
        let poly = t.trans[0]
            .iter()
            .find(|(t, _)| *t == 1)
            .map(|(_, p)| p)
            .unwrap();
        assert_eq!(poly.terms.len(), 3);
        let x_bot = t.x_var(ObsLabel::Blind, r).unwrap();
        let x_at0 = t.x_var(ObsLabel::At(0), r).unwrap();
        let y0 = match t.y_loc[0] {
            YRef::Var(id) => id,
            _ => panic!(),
        };
        assert_eq!(poly.eval(&fixed_vals(&t, &[(y0, one()), (x_at0, one())])), one());
        assert_eq!(poly.eval(&fixed_vals(&t, &[(x_bot, one())])), one());
    }

    fn fixed_vals(t: &TpMc, set: &[(VarId, Rat)]) -> alloc::vec::Vec<Rat> {
        let mut vals = alloc::vec![Rat::zero(); t.vars.len()];
        for (id, v) in set {
            vals[id.0] = v.clone();
        }
        vals
    }

    #[test]
    fn substitution_reproduces_the_simplified_chain() {
        // sensors on s0 and s3: s0 uses its own row, s1/s4 use the blind row
        let m = worlds::gen_line(5, one()).unwrap();
        let t = build_location_tpmc(&m, 2).unwrap();
        let obs = ObservationFunction::location(&m, &[0, 3]).unwrap();
        let sub = substitute_observation(&t, &obs).unwrap();
        assert!(sub
            .vars
            .iter()
            .all(|v| matches!(v.role, VarRole::Strategy { .. })));
        let r = m.action_index("r").unwrap();
        let poly = sub.trans[0]
            .iter()
            .find(|(t, _)| *t == 1)
            .map(|(_, p)| p)
            .unwrap();
        // s0 -> s1 carries 1·x_{0,r}
        assert_eq!(poly.terms.len(), 1);
        assert_eq!(poly.terms[0].coeff, one());
        assert_eq!(sub.var(poly.terms[0].vars[0]).name, "x_at0_a1");

        let poly = sub.trans[1]
            .iter()
            .find(|(t, _)| *t == 2)
            .map(|(_, p)| p)
            .unwrap();
        assert_eq!(sub.var(poly.terms[0].vars[0]).name, "x_bot_a1");
    }

    #[test]
    fn full_observability_substitution_uses_own_rows_only() {
        let m = worlds::gen_line(5, one()).unwrap();
        let t = build_observation_tpmc(&m, 4).unwrap();
        let obs = ObservationFunction::full_observability(&m);
        let sub = substitute_observation(&t, &obs).unwrap();
        for (s, class) in [(0usize, 0usize), (1, 1), (3, 2), (4, 3)] {
            for (_, poly) in &sub.trans[s] {
                for mono in &poly.terms {
                    for v in &mono.vars {
                        match sub.var(*v).role {
                            VarRole::Strategy { row, .. } => {
                                assert_eq!(row, ObsLabel::Class(class))
                            }
                            _ => panic!("unsubstituted variable"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn all_blind_substitution_uses_the_bot_row() {
        let m = worlds::gen_line(5, one()).unwrap();
        let t = build_location_tpmc(&m, 1).unwrap();
        let obs = ObservationFunction::location(&m, &[]).unwrap();
        let sub = substitute_observation(&t, &obs).unwrap();
        for s in m.non_goal_states() {
            for (_, poly) in &sub.trans[s] {
                for mono in &poly.terms {
                    for v in &mono.vars {
                        match sub.var(*v).role {
                            VarRole::Strategy { row, .. } => assert_eq!(row, ObsLabel::Blind),
                            _ => panic!("unsubstituted variable"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn class_count_mismatch_is_rejected() {
        let m = worlds::gen_line(5, one()).unwrap();
        let t = build_observation_tpmc(&m, 2).unwrap();
        let obs = ObservationFunction::general(&m, 3, &[0, 1, 2, 0]).unwrap();
        assert_eq!(
            substitute_observation(&t, &obs).unwrap_err(),
            TpMcError::ClassCountMismatch { classes: 3, budget: 2 }
        );
    }

    #[test]
    fn instantiation_matches_induced_chain() {
        use crate::chain::induce_chain;
        use crate::strategy::PositionalStrategy;

        let m = worlds::gen_line(5, ratio(1, 2)).unwrap();
        let t = build_observation_tpmc(&m, 2).unwrap();
        let obs = ObservationFunction::general(&m, 2, &[0, 1, 1, 0]).unwrap();
        let sigma = PositionalStrategy::uniform(&m, &obs);

        let mut values = alloc::vec![Rat::zero(); t.vars.len()];
        for (i, v) in t.vars.iter().enumerate() {
            match &v.role {
                VarRole::ObsAssign { state, obs: o } => {
                    if obs.label(*state) == ObsLabel::Class(*o) {
                        values[i] = one();
                    }
                }
                VarRole::Strategy { .. } => values[i] = ratio(1, 2),
                VarRole::SensorSwitch { .. } => {}
            }
        }
        let matrix = t.instantiate(&values);
        let chain = induce_chain(&m, &obs, &sigma).unwrap();
        assert_eq!(matrix, chain.rows);
    }
}
