//! Constraint scripts: the rendering of a typed parametric Markov chain as
//! an ordered SMT-LIB assertion sequence, under every encoding regime.
//!
//! Canonical assertion order: declarations, typing, Bellman, budget,
//! threshold. Rendering is deterministic: equal inputs produce byte-equal
//! scripts.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use num_traits::One;

use crate::obs::ObsLabel;
use crate::rational::{Rat, SmtLibReal};
use crate::strategy::StrategyMode;
use crate::tpmc::{GroupKind, TpMc, TpMcKind, VarId, VarRole, YRef};

/// SMT sorts used by the scripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Bool,
    Real,
}

/// Sort-agnostic constraint term.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Var(String),
    BoolConst(bool),
    Num(Rat),
    Add(Vec<Term>),
    Mul(Vec<Term>),
    Eq(alloc::boxed::Box<Term>, alloc::boxed::Box<Term>),
    Le(alloc::boxed::Box<Term>, alloc::boxed::Box<Term>),
    Lt(alloc::boxed::Box<Term>, alloc::boxed::Box<Term>),
    Ge(alloc::boxed::Box<Term>, alloc::boxed::Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Not(alloc::boxed::Box<Term>),
    Implies(alloc::boxed::Box<Term>, alloc::boxed::Box<Term>),
    /// `(ite b 1 0)`.
    Ite01(alloc::boxed::Box<Term>),
    /// Pseudo-boolean `Σ bᵢ = k` with unit weights.
    PbEq { args: Vec<Term>, k: u64 },
    /// Pseudo-boolean `Σ bᵢ ≤ k`.
    PbAtMost { args: Vec<Term>, k: u64 },
}

impl Term {
    fn render_into(&self, out: &mut String) {
        match self {
            Term::Var(name) => out.push_str(name),
            Term::BoolConst(b) => out.push_str(if *b { "true" } else { "false" }),
            Term::Num(q) => {
                let _ = write!(out, "{}", SmtLibReal(q));
            }
            Term::Add(ts) => render_nary(out, "+", ts),
            Term::Mul(ts) => render_nary(out, "*", ts),
            Term::Eq(a, b) => render_bin(out, "=", a, b),
            Term::Le(a, b) => render_bin(out, "<=", a, b),
            Term::Lt(a, b) => render_bin(out, "<", a, b),
            Term::Ge(a, b) => render_bin(out, ">=", a, b),
            Term::And(ts) => render_nary(out, "and", ts),
            Term::Or(ts) => render_nary(out, "or", ts),
            Term::Not(t) => {
                out.push_str("(not ");
                t.render_into(out);
                out.push(')');
            }
            Term::Implies(a, b) => render_bin(out, "=>", a, b),
            Term::Ite01(b) => {
                out.push_str("(ite ");
                b.render_into(out);
                out.push_str(" 1 0)");
            }
            Term::PbEq { args, k } => render_pb(out, "pbeq", args, *k, true),
            Term::PbAtMost { args, k } => render_pb(out, "at-most", args, *k, false),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s);
        s
    }
}

fn render_nary(out: &mut String, op: &str, ts: &[Term]) {
    if ts.is_empty() {
        out.push('0');
        return;
    }
    if ts.len() == 1 {
        ts[0].render_into(out);
        return;
    }
    out.push('(');
    out.push_str(op);
    for t in ts {
        out.push(' ');
        t.render_into(out);
    }
    out.push(')');
}

fn render_bin(out: &mut String, op: &str, a: &Term, b: &Term) {
    out.push('(');
    out.push_str(op);
    out.push(' ');
    a.render_into(out);
    out.push(' ');
    b.render_into(out);
    out.push(')');
}

fn render_pb(out: &mut String, op: &str, args: &[Term], k: u64, weights: bool) {
    out.push_str("((_ ");
    out.push_str(op);
    let _ = write!(out, " {k}");
    if weights {
        for _ in args {
            out.push_str(" 1");
        }
    }
    out.push(')');
    for a in args {
        out.push(' ');
        a.render_into(out);
    }
    out.push(')');
}

fn var(name: impl Into<String>) -> Term {
    Term::Var(name.into())
}

fn num(q: Rat) -> Term {
    Term::Num(q)
}

fn eq(a: Term, b: Term) -> Term {
    Term::Eq(a.into(), b.into())
}

fn ge(a: Term, b: Term) -> Term {
    Term::Ge(a.into(), b.into())
}

fn implies(a: Term, b: Term) -> Term {
    Term::Implies(a.into(), b.into())
}

/// How binary-role variables are typed in the script.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarEncoding {
    /// Reals with `(b = 0 ∨ b = 1)` disjunctions.
    Real,
    /// Native booleans with one-hot cardinality clauses.
    Boolean,
}

/// Bellman constraint shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellmanForm {
    Equality,
    /// The relaxation `v_s ≥ Bellman(v_s)`.
    Inequality,
}

/// Budget constraint shape (location chains only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetForm {
    Exact,
    AtMost,
}

/// All encoding regime switches.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodeOptions {
    pub mode: StrategyMode,
    pub encoding: VarEncoding,
    /// Render cardinalities with solver pseudo-boolean extensions instead of
    /// the portable `Σ ite(b,1,0)` form.
    pub pseudo_boolean: bool,
    pub bellman: BellmanForm,
    pub budget_form: BudgetForm,
    /// Threshold comparison: `<` when set, `≤` otherwise.
    pub strict: bool,
    pub threshold: Rat,
}

impl EncodeOptions {
    pub fn new(mode: StrategyMode, threshold: Rat) -> EncodeOptions {
        EncodeOptions {
            mode,
            encoding: VarEncoding::Real,
            pseudo_boolean: false,
            bellman: BellmanForm::Equality,
            budget_form: BudgetForm::Exact,
            strict: false,
            threshold,
        }
    }

    /// Strategy variables are native booleans only for deterministic
    /// strategies under the boolean encoding.
    pub fn boolean_strategy_vars(&self) -> bool {
        self.encoding == VarEncoding::Boolean && self.mode == StrategyMode::Deterministic
    }
}

/// An ordered constraint script with a deterministic SMT-LIB rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintScript {
    pub decls: Vec<(String, Sort)>,
    /// Assertions emitted with the declarations (goal values fixed to zero).
    pub decl_asserts: Vec<Term>,
    pub typing: Vec<Term>,
    pub bellman: Vec<Term>,
    pub budget: Vec<Term>,
    pub threshold: Vec<Term>,
}

impl ConstraintScript {
    /// Prelude: logic and model production.
    pub fn header() -> &'static str {
        "(set-logic ALL)\n(set-option :produce-models true)\n"
    }

    fn render_decls(&self, out: &mut String) {
        for (name, sort) in &self.decls {
            let s = match sort {
                Sort::Bool => "Bool",
                Sort::Real => "Real",
            };
            let _ = writeln!(out, "(declare-const {name} {s})");
        }
        for t in &self.decl_asserts {
            let _ = writeln!(out, "(assert {})", t.render());
        }
    }

    fn render_asserts(out: &mut String, terms: &[Term]) {
        for t in terms {
            let _ = writeln!(out, "(assert {})", t.render());
        }
    }

    /// Full script in canonical order.
    pub fn render(&self) -> String {
        let mut out = String::from(Self::header());
        self.render_decls(&mut out);
        Self::render_asserts(&mut out, &self.typing);
        Self::render_asserts(&mut out, &self.bellman);
        Self::render_asserts(&mut out, &self.budget);
        Self::render_asserts(&mut out, &self.threshold);
        out
    }

    /// Everything except the budget assertions (the relaxation phase).
    pub fn render_without_budget(&self) -> String {
        let mut out = String::from(Self::header());
        self.render_decls(&mut out);
        Self::render_asserts(&mut out, &self.typing);
        Self::render_asserts(&mut out, &self.bellman);
        Self::render_asserts(&mut out, &self.threshold);
        out
    }

    /// The budget assertions alone (pushed in the repair phase).
    pub fn render_budget_only(&self) -> String {
        let mut out = String::new();
        Self::render_asserts(&mut out, &self.budget);
        out
    }

    /// Declared variable names, in declaration order.
    pub fn var_names(&self) -> Vec<String> {
        self.decls.iter().map(|(n, _)| n.clone()).collect()
    }
}

fn v_name(s: usize) -> String {
    alloc::format!("v_s{s}")
}

struct Encoder<'a> {
    t: &'a TpMc,
    opts: &'a EncodeOptions,
}

impl<'a> Encoder<'a> {
    fn x_term(&self, id: VarId) -> Term {
        var(self.t.vars[id.0].name.clone())
    }

    fn x_is_zero(&self, id: VarId) -> Term {
        if self.opts.boolean_strategy_vars() {
            Term::Not(self.x_term(id).into())
        } else {
            eq(self.x_term(id), num(Rat::from_integer(0.into())))
        }
    }

    /// `v_s ⋈ rhs` per the Bellman form.
    fn bellman_cmp(&self, s: usize, rhs: Term) -> Term {
        match self.opts.bellman {
            BellmanForm::Equality => eq(var(v_name(s)), rhs),
            BellmanForm::Inequality => ge(var(v_name(s)), rhs),
        }
    }

    /// `rew(s) + Σ_t P_M(s,a)(t)·v_t` for one concrete action.
    fn action_rhs(&self, s: usize, a: usize) -> Term {
        let m = &self.t.mdp;
        let mut terms = alloc::vec![num(m.rewards[s].clone())];
        for (t, p) in m.row(s, a) {
            terms.push(Term::Mul(alloc::vec![num(p.clone()), var(v_name(*t))]));
        }
        Term::Add(terms)
    }

    /// `rew(s) + Σ_a x_{row,a} · Σ_t P_M(s,a)(t)·v_t` for one strategy row.
    fn row_rhs(&self, s: usize, row: ObsLabel) -> Term {
        let m = &self.t.mdp;
        let xs = &self.t.x_rows[&row];
        let mut terms = alloc::vec![num(m.rewards[s].clone())];
        for (a, x) in xs.iter().enumerate() {
            let mut inner = Vec::new();
            for (t, p) in m.row(s, a) {
                inner.push(Term::Mul(alloc::vec![num(p.clone()), var(v_name(*t))]));
            }
            if inner.is_empty() {
                continue;
            }
            terms.push(Term::Mul(alloc::vec![self.x_term(*x), Term::Add(inner)]));
        }
        Term::Add(terms)
    }

    /// Polynomial transition entry as a term.
    fn poly_term(&self, poly: &crate::tpmc::Poly) -> Term {
        let monos: Vec<Term> = poly
            .terms
            .iter()
            .map(|mono| {
                let mut factors = Vec::new();
                if !mono.coeff.is_one() || mono.vars.is_empty() {
                    factors.push(num(mono.coeff.clone()));
                }
                for v in &mono.vars {
                    factors.push(var(self.t.vars[v.0].name.clone()));
                }
                Term::Mul(factors)
            })
            .collect();
        Term::Add(monos)
    }
}

/// Renders the tpMC under the given options as an ordered constraint script.
pub fn encode(t: &TpMc, opts: &EncodeOptions) -> ConstraintScript {
    let enc = Encoder { t, opts };
    let m = &t.mdp;
    let n = m.n_states();
    let bool_y = opts.encoding == VarEncoding::Boolean;
    let bool_x = opts.boolean_strategy_vars();
    let zero = num(Rat::from_integer(0.into()));
    let one = num(Rat::one());

    // (1) declarations: y and x in VarId order, then v per state
    let mut decls = Vec::new();
    for v in &t.vars {
        let sort = match v.role {
            VarRole::ObsAssign { .. } | VarRole::SensorSwitch { .. } => {
                if bool_y {
                    Sort::Bool
                } else {
                    Sort::Real
                }
            }
            VarRole::Strategy { .. } => {
                if bool_x {
                    Sort::Bool
                } else {
                    Sort::Real
                }
            }
        };
        decls.push((v.name.clone(), sort));
    }
    for s in 0..n {
        decls.push((v_name(s), Sort::Real));
    }
    let mut decl_asserts = Vec::new();
    for &g in &m.goals {
        decl_asserts.push(eq(var(v_name(g)), zero.clone()));
    }

    // (2) typing
    let mut typing = Vec::new();
    // binary disjunctions for y under the real encoding
    if !bool_y {
        for v in &t.vars {
            if matches!(v.role, VarRole::ObsAssign { .. } | VarRole::SensorSwitch { .. }) {
                typing.push(Term::Or(alloc::vec![
                    eq(var(v.name.clone()), zero.clone()),
                    eq(var(v.name.clone()), one.clone()),
                ]));
            }
        }
    }
    // per-state one-hot over observations
    for g in &t.groups {
        let GroupKind::ObsOneHot { .. } = g.kind else { continue };
        let names: Vec<Term> = g
            .members
            .iter()
            .map(|id| var(t.vars[id.0].name.clone()))
            .collect();
        if bool_y {
            if opts.pseudo_boolean {
                typing.push(Term::PbEq { args: names, k: 1 });
            } else {
                typing.push(Term::Or(names.clone()));
                for (i, y) in names.iter().enumerate() {
                    let others: Vec<Term> = names
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, o)| Term::Not(o.clone().into()))
                        .collect();
                    if !others.is_empty() {
                        typing.push(implies(y.clone(), Term::And(others)));
                    }
                }
            }
        } else {
            typing.push(eq(Term::Add(names), num(g.target.clone())));
        }
    }
    // strategy rows
    for g in &t.groups {
        let GroupKind::StrategyRow { .. } = g.kind else { continue };
        let names: Vec<Term> = g
            .members
            .iter()
            .map(|id| var(t.vars[id.0].name.clone()))
            .collect();
        if bool_x {
            if opts.pseudo_boolean {
                typing.push(Term::PbEq { args: names, k: 1 });
            } else {
                typing.push(Term::Or(names.clone()));
                for (i, x) in names.iter().enumerate() {
                    let others: Vec<Term> = names
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, o)| Term::Not(o.clone().into()))
                        .collect();
                    if !others.is_empty() {
                        typing.push(implies(x.clone(), Term::And(others)));
                    }
                }
            }
        } else {
            if opts.mode == StrategyMode::Deterministic {
                for x in &names {
                    typing.push(Term::Or(alloc::vec![
                        eq(x.clone(), zero.clone()),
                        eq(x.clone(), one.clone()),
                    ]));
                }
            } else {
                for x in &names {
                    typing.push(ge(x.clone(), zero.clone()));
                    typing.push(Term::Le(x.clone().into(), one.clone().into()));
                }
            }
            typing.push(eq(Term::Add(names), num(g.target.clone())));
        }
    }
    // nonnegative values in all regimes
    for s in m.non_goal_states() {
        typing.push(ge(var(v_name(s)), zero.clone()));
    }
    // transitions into states that cannot reach the goal are forbidden;
    // their Bellman rows are omitted below, so without these constraints a
    // model could route probability mass into them for free
    if m.initial.iter().any(|&s| t.doomed[s]) {
        typing.push(Term::BoolConst(false));
    }
    for s in m.non_goal_states() {
        if t.doomed[s] {
            continue;
        }
        for a in 0..m.n_actions() {
            let hits_doomed = m
                .row(s, a)
                .iter()
                .any(|(tgt, p)| t.doomed[*tgt] && !num_traits::Zero::is_zero(p));
            if !hits_doomed {
                continue;
            }
            match t.kind {
                TpMcKind::Observation { budget } => {
                    for o in 0..budget {
                        let x = t.x_rows[&ObsLabel::Class(o)][a];
                        match t.y_obs[s][o] {
                            YRef::Fixed(false) => {}
                            YRef::Fixed(true) => typing.push(enc.x_is_zero(x)),
                            YRef::Var(y) => {
                                let yname = var(t.vars[y.0].name.clone());
                                if bool_y {
                                    typing.push(implies(yname, enc.x_is_zero(x)));
                                } else {
                                    typing.push(eq(
                                        Term::Mul(alloc::vec![yname, enc.x_term(x)]),
                                        zero.clone(),
                                    ));
                                }
                            }
                        }
                    }
                }
                TpMcKind::Location { .. } => {
                    let x_on = t.x_rows[&ObsLabel::At(s)][a];
                    let x_off = t.x_rows[&ObsLabel::Blind][a];
                    match t.y_loc[s] {
                        YRef::Fixed(true) => typing.push(enc.x_is_zero(x_on)),
                        YRef::Fixed(false) => typing.push(enc.x_is_zero(x_off)),
                        YRef::Var(y) => {
                            let yname = var(t.vars[y.0].name.clone());
                            if bool_y {
                                typing.push(implies(yname.clone(), enc.x_is_zero(x_on)));
                                typing.push(implies(
                                    Term::Not(yname.into()),
                                    enc.x_is_zero(x_off),
                                ));
                            } else {
                                typing.push(eq(
                                    Term::Mul(alloc::vec![yname.clone(), enc.x_term(x_on)]),
                                    zero.clone(),
                                ));
                                typing.push(eq(
                                    Term::Mul(alloc::vec![
                                        Term::Add(alloc::vec![
                                            one.clone(),
                                            Term::Mul(alloc::vec![
                                                num(-Rat::one()),
                                                yname,
                                            ]),
                                        ]),
                                        enc.x_term(x_off),
                                    ]),
                                    zero.clone(),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    // (3) Bellman
    let mut bellman = Vec::new();
    match opts.encoding {
        VarEncoding::Real => {
            for s in m.non_goal_states() {
                if t.doomed[s] {
                    continue;
                }
                let mut terms = alloc::vec![num(m.rewards[s].clone())];
                for (tgt, poly) in &t.trans[s] {
                    if poly.is_zero() {
                        continue;
                    }
                    terms.push(Term::Mul(alloc::vec![
                        enc.poly_term(poly),
                        var(v_name(*tgt)),
                    ]));
                }
                bellman.push(enc.bellman_cmp(s, Term::Add(terms)));
            }
        }
        VarEncoding::Boolean => {
            for s in m.non_goal_states() {
                if t.doomed[s] {
                    continue;
                }
                match (t.kind, opts.mode) {
                    (TpMcKind::Observation { budget }, StrategyMode::Deterministic) => {
                        for o in 0..budget {
                            let x_row = &t.x_rows[&ObsLabel::Class(o)];
                            for a in 0..m.n_actions() {
                                let body = enc.bellman_cmp(s, enc.action_rhs(s, a));
                                let x = var(t.vars[x_row[a].0].name.clone());
                                match t.y_obs[s][o] {
                                    YRef::Fixed(false) => {}
                                    YRef::Fixed(true) => bellman.push(implies(x, body)),
                                    YRef::Var(y) => bellman.push(implies(
                                        Term::And(alloc::vec![
                                            var(t.vars[y.0].name.clone()),
                                            x,
                                        ]),
                                        body,
                                    )),
                                }
                            }
                        }
                    }
                    (TpMcKind::Observation { budget }, StrategyMode::Randomized) => {
                        for o in 0..budget {
                            let body = enc.bellman_cmp(s, enc.row_rhs(s, ObsLabel::Class(o)));
                            match t.y_obs[s][o] {
                                YRef::Fixed(false) => {}
                                YRef::Fixed(true) => bellman.push(body),
                                YRef::Var(y) => bellman
                                    .push(implies(var(t.vars[y.0].name.clone()), body)),
                            }
                        }
                    }
                    (TpMcKind::Location { .. }, StrategyMode::Deterministic) => {
                        for a in 0..m.n_actions() {
                            let body = enc.bellman_cmp(s, enc.action_rhs(s, a));
                            let x_on = var(t.vars[t.x_rows[&ObsLabel::At(s)][a].0].name.clone());
                            let x_off = var(t.vars[t.x_rows[&ObsLabel::Blind][a].0].name.clone());
                            let guard = match t.y_loc[s] {
                                YRef::Fixed(true) => x_on,
                                YRef::Fixed(false) => x_off,
                                YRef::Var(y) => {
                                    let yname = var(t.vars[y.0].name.clone());
                                    Term::Or(alloc::vec![
                                        Term::And(alloc::vec![yname.clone(), x_on]),
                                        Term::And(alloc::vec![
                                            Term::Not(yname.into()),
                                            x_off,
                                        ]),
                                    ])
                                }
                            };
                            bellman.push(implies(guard, body));
                        }
                    }
                    (TpMcKind::Location { .. }, StrategyMode::Randomized) => {
                        let body_on = enc.bellman_cmp(s, enc.row_rhs(s, ObsLabel::At(s)));
                        let body_off = enc.bellman_cmp(s, enc.row_rhs(s, ObsLabel::Blind));
                        match t.y_loc[s] {
                            YRef::Fixed(true) => bellman.push(body_on),
                            YRef::Fixed(false) => bellman.push(body_off),
                            YRef::Var(y) => {
                                let yname = var(t.vars[y.0].name.clone());
                                bellman.push(implies(yname.clone(), body_on));
                                bellman.push(implies(Term::Not(yname.into()), body_off));
                            }
                        }
                    }
                }
            }
        }
    }

    // (4) budget (location chains only)
    let mut budget_terms = Vec::new();
    if let TpMcKind::Location { budget } = t.kind {
        let live: Vec<&YRef> = m.non_goal_states().map(|s| &t.y_loc[s]).collect();
        let vars_only: Vec<Term> = live
            .iter()
            .filter_map(|y| match y {
                YRef::Var(id) => Some(var(t.vars[id.0].name.clone())),
                YRef::Fixed(_) => None,
            })
            .collect();
        if vars_only.len() == live.len() {
            // fully symbolic sensor selection
            let k = budget as u64;
            let term = if bool_y {
                if opts.pseudo_boolean {
                    match opts.budget_form {
                        BudgetForm::Exact => Term::PbEq { args: vars_only, k },
                        BudgetForm::AtMost => Term::PbAtMost { args: vars_only, k },
                    }
                } else {
                    let sum = Term::Add(
                        vars_only
                            .into_iter()
                            .map(|y| Term::Ite01(y.into()))
                            .collect(),
                    );
                    match opts.budget_form {
                        BudgetForm::Exact => eq(sum, num(Rat::from_integer((budget as i64).into()))),
                        BudgetForm::AtMost => Term::Le(
                            sum.into(),
                            num(Rat::from_integer((budget as i64).into())).into(),
                        ),
                    }
                }
            } else {
                let sum = Term::Add(vars_only);
                match opts.budget_form {
                    BudgetForm::Exact => eq(sum, num(Rat::from_integer((budget as i64).into()))),
                    BudgetForm::AtMost => Term::Le(
                        sum.into(),
                        num(Rat::from_integer((budget as i64).into())).into(),
                    ),
                }
            };
            budget_terms.push(term);
        } else {
            // substituted chain: the selection is already fixed; reject a
            // selection that violates the budget
            let on = live
                .iter()
                .filter(|y| matches!(y, YRef::Fixed(true)))
                .count();
            let violated = match opts.budget_form {
                BudgetForm::Exact => on != budget,
                BudgetForm::AtMost => on > budget,
            };
            if violated {
                budget_terms.push(Term::BoolConst(false));
            }
        }
    }

    // (5) threshold over the uniform initial distribution
    let sum = Term::Add(m.initial.iter().map(|&s| var(v_name(s))).collect());
    let mean = Term::Mul(alloc::vec![
        num(Rat::new(1.into(), (m.initial.len().max(1) as i64).into())),
        sum,
    ]);
    let threshold_term = if opts.strict {
        Term::Lt(mean.into(), num(opts.threshold.clone()).into())
    } else {
        Term::Le(mean.into(), num(opts.threshold.clone()).into())
    };

    ConstraintScript {
        decls,
        decl_asserts,
        typing,
        bellman,
        budget: budget_terms,
        threshold: alloc::vec![threshold_term],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obs::ObservationFunction;
    use crate::rational::{int, one, ratio};
    use crate::tpmc::{build_location_tpmc, build_observation_tpmc, substitute_observation};
    use crate::worlds;

    #[test]
    fn real_randomized_script_contains_goal_zero_and_threshold() {
        let m = worlds::gen_line(5, one()).unwrap();
        let t = build_observation_tpmc(&m, 2).unwrap();
        let opts = EncodeOptions::new(StrategyMode::Randomized, int(4));
        let script = encode(&t, &opts);
        let text = script.render();
        assert!(text.contains("(assert (= v_s2 0))"), "{text}");
        assert!(
            text.contains("(assert (<= (* (/ 1 4) (+ v_s0 v_s1 v_s3 v_s4)) 4))"),
            "{text}"
        );
    }

    #[test]
    fn deterministic_boolean_pop_has_one_implication_per_state_obs_action() {
        let m = worlds::gen_line(5, one()).unwrap();
        let t = build_observation_tpmc(&m, 2).unwrap();
        let mut opts = EncodeOptions::new(StrategyMode::Deterministic, int(4));
        opts.encoding = VarEncoding::Boolean;
        let script = encode(&t, &opts);
        // |S∖G| · B · |Act| = 4 · 2 · 2
        assert_eq!(script.bellman.len(), 16);
    }

    #[test]
    fn rendering_is_deterministic() {
        let m = worlds::gen_maze(5, None).unwrap();
        let t = build_location_tpmc(&m, 3).unwrap();
        let mut opts = EncodeOptions::new(StrategyMode::Randomized, ratio(84, 15));
        opts.encoding = VarEncoding::Boolean;
        opts.pseudo_boolean = true;
        let a = encode(&t, &opts).render();
        let b = encode(&t, &opts).render();
        assert_eq!(a, b);
    }

    #[test]
    fn strict_threshold_renders_as_lt() {
        let m = worlds::gen_line(5, one()).unwrap();
        let t = build_observation_tpmc(&m, 2).unwrap();
        let mut opts = EncodeOptions::new(StrategyMode::Randomized, ratio(125, 2));
        opts.strict = true;
        let text = encode(&t, &opts).render();
        assert!(text.contains("(assert (< (* (/ 1 4)"), "{text}");
    }

    #[test]
    fn budget_section_is_separable_for_relax_and_repair() {
        let m = worlds::gen_line(5, one()).unwrap();
        let t = build_location_tpmc(&m, 2).unwrap();
        let opts = EncodeOptions::new(StrategyMode::Randomized, int(4));
        let script = encode(&t, &opts);
        assert_eq!(script.budget.len(), 1);
        let base = script.render_without_budget();
        assert!(!base.contains(&script.render_budget_only()));
        let full = script.render();
        assert!(full.contains(script.render_budget_only().trim()));
    }

    #[test]
    fn substituted_script_has_no_y_variables() {
        let m = worlds::gen_line(5, one()).unwrap();
        let t = build_observation_tpmc(&m, 2).unwrap();
        let obs = ObservationFunction::general(&m, 2, &[0, 0, 1, 1]).unwrap();
        let sub = substitute_observation(&t, &obs).unwrap();
        let opts = EncodeOptions::new(StrategyMode::Randomized, int(4));
        let text = encode(&sub, &opts).render();
        assert!(!text.contains("y_s"), "{text}");
        assert!(text.contains("x_o0_a1"), "{text}");
    }

    #[test]
    fn trap_encoding_bans_transitions_into_the_trap() {
        let m = worlds::trap();
        let t = build_observation_tpmc(&m, 2).unwrap();
        let opts = EncodeOptions::new(StrategyMode::Randomized, int(2));
        let script = encode(&t, &opts);
        let text = script.render();
        // the trap state's Bellman row is omitted
        assert!(!text.contains("(assert (= v_s2 ("), "{text}");
        // s0 reaches the trap under action b (index 1): banned per observation
        assert!(
            text.contains("(assert (= (* y_s0_o0 x_o0_a1) 0))"),
            "{text}"
        );
    }
}
