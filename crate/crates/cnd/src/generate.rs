//! Deterministic random generation of valid deductions, and desk-scale
//! enumeration of normal closed proofs.
//!
//! The generator builds deductions top-down by rule schema. Wherever a
//! premise must conclude a particular formula, or must contain occurrences
//! of classes discharged further down, it falls back on chains of negation
//! eliminations: `notE` concludes anything from fresh assumptions, so every
//! discharged class receives exactly one occurrence and the vacuous
//! discharge ban holds by construction. Formulas are drawn from a pool of
//! four atoms plus depth-bounded connectives, with fixed one-variable
//! shapes for the quantifiers; eigenparameters come from a separate name
//! pool that the formula generator never touches, which keeps the
//! parameter conditions on existential elimination and universal
//! introduction satisfied by construction.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::is_normal;
use crate::deduction::{check, leaf, node, Deduction, RuleId, System};
use crate::logic::{Formula, Name, Term};
use crate::syntax::render_sexpr;

const ATOMS: [&str; 4] = ["p", "q", "r", "s"];
const PREDICATES: [&str; 2] = ["P", "Q"];
const CONSTANTS: [&str; 2] = ["c", "d"];

/// Classes an enclosing application will discharge, which the subtree under
/// construction must therefore contain exactly one occurrence of each.
type Owed = Vec<(u32, Formula)>;

/// A valid deduction with at most `budget` tree nodes; the same seed,
/// budget and system always produce the same tree.
pub fn gen_deduction(seed: u64, budget: usize, system: System) -> Deduction {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        system,
        next_label: 1,
        next_param: 1,
    };
    let target = g.formula(2);
    g.derive(&target, Vec::new(), budget.max(1))
}

struct Gen {
    rng: ChaCha8Rng,
    system: System,
    next_label: u32,
    next_param: u32,
}

/// Smallest size of a tree that concludes an arbitrary formula while using
/// each of `must` once: a lone assumption, or a negation elimination chain
/// with one link per class. When every owed formula mentions an
/// eigenparameter the chain derives its first major premise instead of
/// assuming it, which costs two extra nodes.
fn chain_cost(must: &[(u32, Formula)]) -> usize {
    if must.is_empty() {
        1
    } else if must.iter().all(|(_, f)| mentions_param(f)) {
        2 * must.len() + 3
    } else {
        2 * must.len() + 1
    }
}

/// Whether the formula mentions a name from the eigenparameter pool. The
/// generator draws parameters from `b1, b2, ...` and keeps every other
/// name out of that range, so a leading `b` identifies them.
fn mentions_param(f: &Formula) -> bool {
    fn in_term(t: &Term) -> bool {
        match t {
            Term::Sym(n) => n.starts_with('b'),
            Term::Fn(_, args) => args.iter().any(in_term),
        }
    }
    match f {
        Formula::Atom(_, args) => args.iter().any(in_term),
        Formula::Bottom => false,
        Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => mentions_param(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            mentions_param(a) || mentions_param(b)
        }
    }
}

fn with(mut must: Owed, class: (u32, Formula)) -> Owed {
    must.push(class);
    must
}

impl Gen {
    fn label(&mut self) -> u32 {
        let l = self.next_label;
        self.next_label += 1;
        l
    }

    fn param(&mut self) -> Name {
        let p = format!("b{}", self.next_param);
        self.next_param += 1;
        p
    }

    fn pick(&mut self, options: &[&str]) -> String {
        options[self.rng.gen_range(0..options.len())].to_string()
    }

    fn atom(&mut self) -> Formula {
        let name = self.pick(&ATOMS);
        Formula::Atom(name, Vec::new())
    }

    fn quantified(&mut self) -> (Name, Formula) {
        let var = "x".to_string();
        let body = Formula::Atom(self.pick(&PREDICATES), vec![Term::Sym(var.clone())]);
        (var, body)
    }

    fn formula(&mut self, depth: usize) -> Formula {
        if depth == 0 {
            return if self.rng.gen_range(0..8) == 0 {
                Formula::Bottom
            } else {
                self.atom()
            };
        }
        match self.rng.gen_range(0..10) {
            0..=3 => self.formula(0),
            4 => Formula::Not(Box::new(self.formula(depth - 1))),
            5 => Formula::And(
                Box::new(self.formula(depth - 1)),
                Box::new(self.formula(depth - 1)),
            ),
            6 => Formula::Or(
                Box::new(self.formula(depth - 1)),
                Box::new(self.formula(depth - 1)),
            ),
            7 | 8 => Formula::Imp(
                Box::new(self.formula(depth - 1)),
                Box::new(self.formula(depth - 1)),
            ),
            _ => match self.system {
                System::C => self.formula(0),
                System::CEx => {
                    let (var, body) = self.quantified();
                    Formula::Exists(var, Box::new(body))
                }
                System::CExAll => {
                    let (var, body) = self.quantified();
                    if self.rng.gen() {
                        Formula::Exists(var, Box::new(body))
                    } else {
                        Formula::Forall(var, Box::new(body))
                    }
                }
            },
        }
    }

    /// The minimal tree concluding `target` with one occurrence of each
    /// owed class: an assumption when nothing is owed, otherwise a chain of
    /// negation eliminations whose minor premises consume the classes and
    /// whose intermediate conclusions feed the next link's major premise.
    ///
    /// Classes mentioning an eigenparameter must never leave a matching
    /// negated assumption open, or the discharging application's parameter
    /// condition would fail. Parameter-free classes are consumed first so
    /// the lone assumed major is safe; if there are none, the first major
    /// is itself concluded by a negation elimination on a fresh atom.
    fn chain(&mut self, target: &Formula, mut must: Owed) -> Deduction {
        if must.is_empty() {
            return leaf(self.label(), target.clone());
        }
        must.sort_by_key(|(_, f)| mentions_param(f));
        let mut current: Option<Deduction> = None;
        let count = must.len();
        for (i, (l, f)) in must.iter().enumerate() {
            let major = match current.take() {
                Some(d) => d,
                None if mentions_param(f) => {
                    let x = self.atom();
                    node(
                        RuleId::NotE,
                        vec![
                            leaf(self.label(), Formula::Not(Box::new(x.clone()))),
                            leaf(self.label(), x),
                        ],
                        Vec::new(),
                        None,
                        Some(Formula::Not(Box::new(f.clone()))),
                    )
                }
                None => leaf(self.label(), Formula::Not(Box::new(f.clone()))),
            };
            let concl = if i + 1 == count {
                target.clone()
            } else {
                Formula::Not(Box::new(must[i + 1].1.clone()))
            };
            current = Some(node(
                RuleId::NotE,
                vec![major, leaf(*l, f.clone())],
                Vec::new(),
                None,
                Some(concl),
            ));
        }
        current.expect("the chain has at least one link")
    }

    /// Like `chain`, but guaranteed to leave eigenparameters out of every
    /// open assumption, as the specific premise of a universal introduction
    /// requires. The owed formulas never mention the parameter, so only the
    /// no-owes case needs care: a bare assumption of the target would be an
    /// open occurrence of it, so a negation elimination on a fresh atom
    /// concludes the target instead.
    fn parameter_free_chain(&mut self, target: &Formula, must: Owed) -> Deduction {
        if must.is_empty() {
            let x = self.atom();
            return node(
                RuleId::NotE,
                vec![
                    leaf(self.label(), Formula::Not(Box::new(x.clone()))),
                    leaf(self.label(), x),
                ],
                Vec::new(),
                None,
                Some(target.clone()),
            );
        }
        self.chain(target, must)
    }

    fn split(&mut self, must: Owed, ways: usize) -> [Owed; 3] {
        let mut out = [Vec::new(), Vec::new(), Vec::new()];
        for pair in must {
            let slot = self.rng.gen_range(0..ways);
            out[slot].push(pair);
        }
        out
    }

    /// Splits `total` among premises, giving each at least the chain cost
    /// of its owed classes and scattering the surplus.
    fn budgets(&mut self, total: usize, musts: &[&Owed]) -> Vec<usize> {
        let mut out: Vec<usize> = musts.iter().map(|m| chain_cost(m)).collect();
        let mut surplus = total.saturating_sub(out.iter().sum());
        while surplus > 0 {
            let take = self.rng.gen_range(1..=surplus);
            let slot = self.rng.gen_range(0..out.len());
            out[slot] += take;
            surplus -= take;
        }
        out
    }

    fn derive(&mut self, target: &Formula, must: Owed, budget: usize) -> Deduction {
        let floor = chain_cost(&must);
        if budget < floor + 8 || self.rng.gen_range(0..5) == 0 {
            return self.chain(target, must);
        }
        // Sometimes consume an owed compound as the major premise of the
        // matching elimination, so that discharged assumptions turn up in
        // major position and the tree contains genuine detours.
        let consumable: Vec<usize> = must
            .iter()
            .enumerate()
            .filter(|(_, (_, f))| self.major_shape(f))
            .map(|(i, _)| i)
            .collect();
        if !consumable.is_empty() && self.rng.gen() {
            let at = consumable[self.rng.gen_range(0..consumable.len())];
            let mut rest = must;
            let pair = rest.remove(at);
            return self.consume_as_major(target, pair, rest, budget);
        }
        let quantifiers = self.system != System::C;
        let universals = self.system == System::CExAll;
        let mut menu: Vec<u32> = vec![0, 1, 2, 3, 4, 5, 6, 7, 8];
        if quantifiers {
            menu.extend([9, 10]);
        }
        if universals {
            menu.extend([11, 12]);
        }
        let choice = menu[self.rng.gen_range(0..menu.len())];
        match choice {
            0 => {
                let a = self.formula(1);
                let b = self.formula(1);
                let class = (
                    self.label(),
                    Formula::And(Box::new(a.clone()), Box::new(b.clone())),
                );
                let [m0, m1, m2] = self.split(must, 3);
                let arb_must = with(m2, class.clone());
                let budgets = self.budgets(budget - 1, &[&m0, &m1, &arb_must]);
                let p0 = self.derive(&a, m0, budgets[0]);
                let p1 = self.derive(&b, m1, budgets[1]);
                let p2 = self.derive(target, arb_must, budgets[2]);
                node(RuleId::AndI, vec![p0, p1, p2], vec![vec![class]], None, None)
            }
            1 => {
                let a = self.formula(1);
                let b = self.formula(1);
                let major_f = Formula::And(Box::new(a.clone()), Box::new(b.clone()));
                let (take_left, take_right) = match self.rng.gen_range(0..3) {
                    0 => (true, false),
                    1 => (false, true),
                    _ => (true, true),
                };
                let mut g0 = Vec::new();
                let mut g1 = Vec::new();
                if take_left {
                    g0.push((self.label(), a));
                }
                if take_right {
                    g1.push((self.label(), b));
                }
                let [m0, m1, _] = self.split(must, 2);
                let mut arb_must = m1;
                arb_must.extend(g0.iter().cloned());
                arb_must.extend(g1.iter().cloned());
                let budgets = self.budgets(budget - 1, &[&m0, &arb_must]);
                let major = self.derive(&major_f, m0, budgets[0]);
                let arb = self.derive(target, arb_must, budgets[1]);
                node(RuleId::AndE, vec![major, arb], vec![g0, g1], None, None)
            }
            2 | 3 => {
                let a = self.formula(1);
                let b = self.formula(1);
                let disjunction = Formula::Or(Box::new(a.clone()), Box::new(b.clone()));
                let (rule, spec_f) = if choice == 2 {
                    (RuleId::OrIL, a)
                } else {
                    (RuleId::OrIR, b)
                };
                let class = (self.label(), disjunction);
                let [m0, m1, _] = self.split(must, 2);
                let arb_must = with(m1, class.clone());
                let budgets = self.budgets(budget - 1, &[&m0, &arb_must]);
                let p0 = self.derive(&spec_f, m0, budgets[0]);
                let p1 = self.derive(target, arb_must, budgets[1]);
                node(rule, vec![p0, p1], vec![vec![class]], None, None)
            }
            4 => {
                let a = self.formula(1);
                let b = self.formula(1);
                let major_f = Formula::Or(Box::new(a.clone()), Box::new(b.clone()));
                let c1 = (self.label(), a);
                let c2 = (self.label(), b);
                let [m0, m1, m2] = self.split(must, 3);
                let arm1_must = with(m1, c1.clone());
                let arm2_must = with(m2, c2.clone());
                let budgets = self.budgets(budget - 1, &[&m0, &arm1_must, &arm2_must]);
                let major = self.derive(&major_f, m0, budgets[0]);
                let arm1 = self.derive(target, arm1_must, budgets[1]);
                let arm2 = self.derive(target, arm2_must, budgets[2]);
                node(
                    RuleId::OrE,
                    vec![major, arm1, arm2],
                    vec![vec![c1], vec![c2]],
                    None,
                    None,
                )
            }
            5 => {
                let a = self.formula(1);
                let b = self.formula(1);
                let class = (self.label(), Formula::Imp(Box::new(a), Box::new(b.clone())));
                let [m0, m1, _] = self.split(must, 2);
                let arb_must = with(m1, class.clone());
                let budgets = self.budgets(budget - 1, &[&m0, &arb_must]);
                let p0 = self.derive(&b, m0, budgets[0]);
                let p1 = self.derive(target, arb_must, budgets[1]);
                node(RuleId::ImpI, vec![p0, p1], vec![vec![class]], None, None)
            }
            6 => {
                let a = self.formula(1);
                let b = self.formula(1);
                let major_f = Formula::Imp(Box::new(a.clone()), Box::new(b.clone()));
                let class = (self.label(), b);
                let [m0, m1, m2] = self.split(must, 3);
                let arb_must = with(m2, class.clone());
                let budgets = self.budgets(budget - 1, &[&m0, &m1, &arb_must]);
                let major = self.derive(&major_f, m0, budgets[0]);
                let minor = self.derive(&a, m1, budgets[1]);
                let arb = self.derive(target, arb_must, budgets[2]);
                node(
                    RuleId::ImpE,
                    vec![major, minor, arb],
                    vec![vec![class]],
                    None,
                    None,
                )
            }
            7 => {
                let a = self.formula(1);
                let b = self.formula(1);
                let minor_class = (self.label(), a.clone());
                let major_class = (self.label(), Formula::Imp(Box::new(a), Box::new(b)));
                let [m0, m1, _] = self.split(must, 2);
                let s0_must = with(m0, minor_class.clone());
                let s1_must = with(m1, major_class.clone());
                let budgets = self.budgets(budget - 1, &[&s0_must, &s1_must]);
                let s0 = self.derive(target, s0_must, budgets[0]);
                let s1 = self.derive(target, s1_must, budgets[1]);
                node(
                    RuleId::Tr,
                    vec![s0, s1],
                    vec![vec![minor_class], vec![major_class]],
                    None,
                    None,
                )
            }
            8 => {
                let a = self.formula(1);
                let minor_class = (self.label(), a.clone());
                let major_class = (self.label(), Formula::Not(Box::new(a)));
                let [m0, m1, _] = self.split(must, 2);
                let s0_must = with(m0, minor_class.clone());
                let s1_must = with(m1, major_class.clone());
                let budgets = self.budgets(budget - 1, &[&s0_must, &s1_must]);
                let s0 = self.derive(target, s0_must, budgets[0]);
                let s1 = self.derive(target, s1_must, budgets[1]);
                node(
                    RuleId::NotI,
                    vec![s0, s1],
                    vec![vec![minor_class], vec![major_class]],
                    None,
                    None,
                )
            }
            9 => {
                let (var, body) = self.quantified();
                let name = self.pick(&CONSTANTS);
                let instance = body.subst_var(&var, &Term::Sym(name));
                let class = (self.label(), Formula::Exists(var, Box::new(body)));
                let [m0, m1, _] = self.split(must, 2);
                let arb_must = with(m1, class.clone());
                let budgets = self.budgets(budget - 1, &[&m0, &arb_must]);
                let p0 = self.derive(&instance, m0, budgets[0]);
                let p1 = self.derive(target, arb_must, budgets[1]);
                node(RuleId::ExI, vec![p0, p1], vec![vec![class]], None, None)
            }
            10 => {
                let (var, body) = self.quantified();
                let major_f = Formula::Exists(var.clone(), Box::new(body.clone()));
                let a = self.param();
                let class = (self.label(), body.subst_var(&var, &Term::Sym(a.clone())));
                let [m0, m1, _] = self.split(must, 2);
                let side_must = with(m1, class.clone());
                let budgets = self.budgets(budget - 1, &[&m0, &side_must]);
                let major = self.derive(&major_f, m0, budgets[0]);
                let side = self.derive(target, side_must, budgets[1]);
                node(
                    RuleId::ExE,
                    vec![major, side],
                    vec![vec![class]],
                    Some(a),
                    None,
                )
            }
            11 => {
                let (var, body) = self.quantified();
                let major_f = Formula::Forall(var.clone(), Box::new(body.clone()));
                let name = self.pick(&CONSTANTS);
                let class = (self.label(), body.subst_var(&var, &Term::Sym(name)));
                let [m0, m1, _] = self.split(must, 2);
                let arb_must = with(m1, class.clone());
                let budgets = self.budgets(budget - 1, &[&m0, &arb_must]);
                let major = self.derive(&major_f, m0, budgets[0]);
                let arb = self.derive(target, arb_must, budgets[1]);
                node(RuleId::AllE, vec![major, arb], vec![vec![class]], None, None)
            }
            _ => {
                let (var, body) = self.quantified();
                let a = self.param();
                let instance = body.subst_var(&var, &Term::Sym(a.clone()));
                let class = (self.label(), Formula::Forall(var, Box::new(body)));
                let [m0, m1, _] = self.split(must, 2);
                let spec = self.parameter_free_chain(&instance, m0);
                let arb_must = with(m1, class.clone());
                let arb_budget = budget
                    .saturating_sub(1 + spec.size())
                    .max(chain_cost(&arb_must));
                let arb = self.derive(target, arb_must, arb_budget);
                node(
                    RuleId::AllI,
                    vec![spec, arb],
                    vec![vec![class]],
                    Some(a),
                    None,
                )
            }
        }
    }

    fn major_shape(&self, f: &Formula) -> bool {
        match f {
            Formula::And(..) | Formula::Or(..) | Formula::Imp(..) | Formula::Not(..) => true,
            Formula::Exists(..) => self.system != System::C,
            Formula::Forall(..) => self.system == System::CExAll,
            Formula::Atom(..) | Formula::Bottom => false,
        }
    }

    /// Builds the elimination matching the owed formula's connective with
    /// the owed assumption itself as major premise, so the discharge below
    /// turns the occurrence into a maximal formula.
    fn consume_as_major(
        &mut self,
        target: &Formula,
        pair: (u32, Formula),
        rest: Owed,
        budget: usize,
    ) -> Deduction {
        let (l, f) = pair;
        let major = leaf(l, f.clone());
        let inner = budget - 2;
        match f {
            Formula::And(a, b) => {
                let (take_left, take_right) = match self.rng.gen_range(0..3) {
                    0 => (true, false),
                    1 => (false, true),
                    _ => (true, true),
                };
                let mut g0 = Vec::new();
                let mut g1 = Vec::new();
                if take_left {
                    g0.push((self.label(), (*a).clone()));
                }
                if take_right {
                    g1.push((self.label(), (*b).clone()));
                }
                let mut arb_must = rest;
                arb_must.extend(g0.iter().cloned());
                arb_must.extend(g1.iter().cloned());
                let arb = self.derive(target, arb_must, inner + 1);
                node(RuleId::AndE, vec![major, arb], vec![g0, g1], None, None)
            }
            Formula::Or(a, b) => {
                let c1 = (self.label(), (*a).clone());
                let c2 = (self.label(), (*b).clone());
                let [m0, m1, _] = self.split(rest, 2);
                let arm1_must = with(m0, c1.clone());
                let arm2_must = with(m1, c2.clone());
                let budgets = self.budgets(inner, &[&arm1_must, &arm2_must]);
                let arm1 = self.derive(target, arm1_must, budgets[0]);
                let arm2 = self.derive(target, arm2_must, budgets[1]);
                node(
                    RuleId::OrE,
                    vec![major, arm1, arm2],
                    vec![vec![c1], vec![c2]],
                    None,
                    None,
                )
            }
            Formula::Imp(a, b) => {
                let class = (self.label(), (*b).clone());
                let [m0, m1, _] = self.split(rest, 2);
                let arb_must = with(m1, class.clone());
                let budgets = self.budgets(inner, &[&m0, &arb_must]);
                let minor = self.derive(&a, m0, budgets[0]);
                let arb = self.derive(target, arb_must, budgets[1]);
                node(
                    RuleId::ImpE,
                    vec![major, minor, arb],
                    vec![vec![class]],
                    None,
                    None,
                )
            }
            Formula::Not(a) => {
                let minor = self.derive(&a, rest, inner + 1);
                node(
                    RuleId::NotE,
                    vec![major, minor],
                    Vec::new(),
                    None,
                    Some(target.clone()),
                )
            }
            Formula::Exists(var, body) => {
                let a = self.param();
                let class = (self.label(), body.subst_var(&var, &Term::Sym(a.clone())));
                let side_must = with(rest, class.clone());
                let side = self.derive(target, side_must, inner + 1);
                node(
                    RuleId::ExE,
                    vec![major, side],
                    vec![vec![class]],
                    Some(a),
                    None,
                )
            }
            Formula::Forall(var, body) => {
                let name = self.pick(&CONSTANTS);
                let class = (self.label(), body.subst_var(&var, &Term::Sym(name)));
                let arb_must = with(rest, class.clone());
                let arb = self.derive(target, arb_must, inner + 1);
                node(RuleId::AllE, vec![major, arb], vec![vec![class]], None, None)
            }
            Formula::Atom(..) | Formula::Bottom => {
                unreachable!("only compound formulas are consumed as majors")
            }
        }
    }
}

/// All normal closed deductions of `conclusion` with depth at most `k`,
/// found by backward search over the rule schemas in normal shape: every
/// elimination takes its major premise directly from the assumption classes
/// discharged below it, and discharged class formulas are drawn from the
/// subformulas of the goal and their negations. Quantifier rules are not
/// searched, so the result is meaningful for propositional goals.
pub fn enumerate_normal_closed(conclusion: &Formula, k: usize) -> Vec<Deduction> {
    let pool = formula_pool(conclusion);
    let mut memo = HashMap::new();
    let mut next = 1u32;
    let found = search(conclusion, &[], k, &pool, &mut next, &mut memo);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for d in found {
        let report = check(&d, System::C);
        if !report.valid
            || report.conclusion.as_ref() != Some(conclusion)
            || !report.open_assumptions.is_empty()
            || !is_normal(&d)
        {
            continue;
        }
        if seen.insert(render_sexpr(&d.canonical_labels())) {
            out.push(d);
        }
    }
    out
}

/// Subformulas of the goal plus their single negations.
fn formula_pool(goal: &Formula) -> Vec<Formula> {
    fn subformulas(f: &Formula, out: &mut Vec<Formula>) {
        if !out.contains(f) {
            out.push(f.clone());
        }
        match f {
            Formula::Atom(..) | Formula::Bottom => {}
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => subformulas(a, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                subformulas(a, out);
                subformulas(b, out);
            }
        }
    }
    let mut pool = Vec::new();
    subformulas(goal, &mut pool);
    let negated: Vec<Formula> = pool
        .iter()
        .map(|f| Formula::Not(Box::new(f.clone())))
        .filter(|f| !pool.contains(f))
        .collect();
    pool.extend(negated);
    pool
}

type SolveMemo = HashMap<(Formula, Vec<Formula>, usize), bool>;

fn ctx_key(ctx: &[(u32, Formula)]) -> Vec<Formula> {
    let set: BTreeSet<Formula> = ctx.iter().map(|(_, f)| f.clone()).collect();
    set.into_iter().collect()
}

fn push_formula(ctx: &[Formula], f: &Formula) -> Vec<Formula> {
    let mut set: BTreeSet<Formula> = ctx.iter().cloned().collect();
    set.insert(f.clone());
    set.into_iter().collect()
}

/// Whether the backward search could complete a subtree for this goal,
/// ignoring labels and the non-vacuity filter. Memoised so the enumeration
/// only walks branches that can produce a candidate.
fn solvable(
    goal: &Formula,
    ctx: &[Formula],
    depth: usize,
    pool: &[Formula],
    memo: &mut SolveMemo,
) -> bool {
    if depth == 0 {
        return false;
    }
    if ctx.contains(goal) {
        return true;
    }
    if depth == 1 {
        return false;
    }
    let key = (goal.clone(), ctx.to_vec(), depth);
    if let Some(&hit) = memo.get(&key) {
        return hit;
    }
    let inner = depth - 1;
    let mut ok = false;
    for f in pool {
        if ok {
            break;
        }
        match f {
            Formula::And(a, b) => {
                ok = solvable(a, ctx, inner, pool, memo)
                    && solvable(b, ctx, inner, pool, memo)
                    && solvable(goal, &push_formula(ctx, f), inner, pool, memo);
            }
            Formula::Or(a, b) => {
                ok = (solvable(a, ctx, inner, pool, memo) || solvable(b, ctx, inner, pool, memo))
                    && solvable(goal, &push_formula(ctx, f), inner, pool, memo);
            }
            Formula::Imp(a, b) => {
                let arb = push_formula(ctx, f);
                ok = solvable(b, ctx, inner, pool, memo)
                    && solvable(goal, &arb, inner, pool, memo);
                if !ok {
                    ok = solvable(goal, &push_formula(ctx, a), inner, pool, memo)
                        && solvable(goal, &arb, inner, pool, memo);
                }
            }
            Formula::Not(a) => {
                ok = solvable(goal, &push_formula(ctx, a), inner, pool, memo)
                    && solvable(goal, &push_formula(ctx, f), inner, pool, memo);
            }
            _ => {}
        }
    }
    for f in ctx {
        if ok {
            break;
        }
        match f {
            Formula::And(a, b) => {
                ok = solvable(goal, &push_formula(ctx, a), inner, pool, memo)
                    || solvable(goal, &push_formula(ctx, b), inner, pool, memo)
                    || solvable(
                        goal,
                        &push_formula(&push_formula(ctx, a), b),
                        inner,
                        pool,
                        memo,
                    );
            }
            Formula::Or(a, b) => {
                ok = solvable(goal, &push_formula(ctx, a), inner, pool, memo)
                    && solvable(goal, &push_formula(ctx, b), inner, pool, memo);
            }
            Formula::Imp(a, b) => {
                ok = solvable(a, ctx, inner, pool, memo)
                    && solvable(goal, &push_formula(ctx, b), inner, pool, memo);
            }
            Formula::Not(a) => {
                ok = solvable(a, ctx, inner, pool, memo);
            }
            Formula::Bottom => {
                ok = matches!(goal, Formula::Atom(..));
            }
            _ => {}
        }
    }
    memo.insert(key, ok);
    ok
}

fn search(
    goal: &Formula,
    ctx: &[(u32, Formula)],
    depth: usize,
    pool: &[Formula],
    next: &mut u32,
    memo: &mut SolveMemo,
) -> Vec<Deduction> {
    let mut out = Vec::new();
    if depth == 0 {
        return out;
    }
    for (l, f) in ctx {
        if f == goal {
            out.push(leaf(*l, f.clone()));
        }
    }
    if depth == 1 {
        return out;
    }
    let inner = depth - 1;
    let ctx_fs = ctx_key(ctx);

    // General introductions discharging a class drawn from the pool.
    for f in pool {
        match f {
            Formula::And(a, b) => {
                let class = (alloc(next), f.clone());
                let arb_ctx = extend(ctx, &class);
                if !(solvable(a, &ctx_fs, inner, pool, memo)
                    && solvable(b, &ctx_fs, inner, pool, memo)
                    && solvable(goal, &ctx_key(&arb_ctx), inner, pool, memo))
                {
                    continue;
                }
                for p0 in search(a, ctx, inner, pool, next, memo) {
                    for p1 in search(b, ctx, inner, pool, next, memo) {
                        for p2 in search(goal, &arb_ctx, inner, pool, next, memo) {
                            out.push(node(
                                RuleId::AndI,
                                vec![p0.clone(), p1.clone(), p2],
                                vec![vec![class.clone()]],
                                None,
                                None,
                            ));
                        }
                    }
                }
            }
            Formula::Or(a, b) => {
                for (rule, spec) in [(RuleId::OrIL, &**a), (RuleId::OrIR, &**b)] {
                    let class = (alloc(next), f.clone());
                    let arb_ctx = extend(ctx, &class);
                    if !(solvable(spec, &ctx_fs, inner, pool, memo)
                        && solvable(goal, &ctx_key(&arb_ctx), inner, pool, memo))
                    {
                        continue;
                    }
                    for p0 in search(spec, ctx, inner, pool, next, memo) {
                        for p1 in search(goal, &arb_ctx, inner, pool, next, memo) {
                            out.push(node(
                                rule,
                                vec![p0.clone(), p1],
                                vec![vec![class.clone()]],
                                None,
                                None,
                            ));
                        }
                    }
                }
            }
            Formula::Imp(a, b) => {
                let class = (alloc(next), f.clone());
                let arb_ctx = extend(ctx, &class);
                if solvable(b, &ctx_fs, inner, pool, memo)
                    && solvable(goal, &ctx_key(&arb_ctx), inner, pool, memo)
                {
                    for p0 in search(b, ctx, inner, pool, next, memo) {
                        for p1 in search(goal, &arb_ctx, inner, pool, next, memo) {
                            out.push(node(
                                RuleId::ImpI,
                                vec![p0.clone(), p1],
                                vec![vec![class.clone()]],
                                None,
                                None,
                            ));
                        }
                    }
                }
                let minor = (alloc(next), (**a).clone());
                let major = (alloc(next), f.clone());
                let s0_ctx = extend(ctx, &minor);
                let s1_ctx = extend(ctx, &major);
                if solvable(goal, &ctx_key(&s0_ctx), inner, pool, memo)
                    && solvable(goal, &ctx_key(&s1_ctx), inner, pool, memo)
                {
                    for s0 in search(goal, &s0_ctx, inner, pool, next, memo) {
                        for s1 in search(goal, &s1_ctx, inner, pool, next, memo) {
                            out.push(node(
                                RuleId::Tr,
                                vec![s0.clone(), s1],
                                vec![vec![minor.clone()], vec![major.clone()]],
                                None,
                                None,
                            ));
                        }
                    }
                }
            }
            Formula::Not(a) => {
                let minor = (alloc(next), (**a).clone());
                let major = (alloc(next), f.clone());
                let s0_ctx = extend(ctx, &minor);
                let s1_ctx = extend(ctx, &major);
                if solvable(goal, &ctx_key(&s0_ctx), inner, pool, memo)
                    && solvable(goal, &ctx_key(&s1_ctx), inner, pool, memo)
                {
                    for s0 in search(goal, &s0_ctx, inner, pool, next, memo) {
                        for s1 in search(goal, &s1_ctx, inner, pool, next, memo) {
                            out.push(node(
                                RuleId::NotI,
                                vec![s0.clone(), s1],
                                vec![vec![minor.clone()], vec![major.clone()]],
                                None,
                                None,
                            ));
                        }
                    }
                }
            }
            _ => {}
        }
    }

    // Eliminations whose major premise is an assumption from the context.
    for (l, f) in ctx {
        match f {
            Formula::And(a, b) => {
                let choices: [(Option<&Formula>, Option<&Formula>); 3] =
                    [(Some(a), None), (None, Some(b)), (Some(a), Some(b))];
                for (left, right) in choices {
                    let g0: Vec<(u32, Formula)> = left
                        .map(|x| vec![(alloc(next), x.clone())])
                        .unwrap_or_default();
                    let g1: Vec<(u32, Formula)> = right
                        .map(|x| vec![(alloc(next), x.clone())])
                        .unwrap_or_default();
                    let mut arb_ctx = ctx.to_vec();
                    arb_ctx.extend(g0.iter().cloned());
                    arb_ctx.extend(g1.iter().cloned());
                    if !solvable(goal, &ctx_key(&arb_ctx), inner, pool, memo) {
                        continue;
                    }
                    for arb in search(goal, &arb_ctx, inner, pool, next, memo) {
                        out.push(node(
                            RuleId::AndE,
                            vec![leaf(*l, f.clone()), arb],
                            vec![g0.clone(), g1.clone()],
                            None,
                            None,
                        ));
                    }
                }
            }
            Formula::Or(a, b) => {
                let c1 = (alloc(next), (**a).clone());
                let c2 = (alloc(next), (**b).clone());
                let ctx1 = extend(ctx, &c1);
                let ctx2 = extend(ctx, &c2);
                if solvable(goal, &ctx_key(&ctx1), inner, pool, memo)
                    && solvable(goal, &ctx_key(&ctx2), inner, pool, memo)
                {
                    for arm1 in search(goal, &ctx1, inner, pool, next, memo) {
                        for arm2 in search(goal, &ctx2, inner, pool, next, memo) {
                            out.push(node(
                                RuleId::OrE,
                                vec![leaf(*l, f.clone()), arm1.clone(), arm2],
                                vec![vec![c1.clone()], vec![c2.clone()]],
                                None,
                                None,
                            ));
                        }
                    }
                }
            }
            Formula::Imp(a, b) => {
                let class = (alloc(next), (**b).clone());
                let arb_ctx = extend(ctx, &class);
                if solvable(a, &ctx_fs, inner, pool, memo)
                    && solvable(goal, &ctx_key(&arb_ctx), inner, pool, memo)
                {
                    for minor in search(a, ctx, inner, pool, next, memo) {
                        for arb in search(goal, &arb_ctx, inner, pool, next, memo) {
                            out.push(node(
                                RuleId::ImpE,
                                vec![leaf(*l, f.clone()), minor.clone(), arb],
                                vec![vec![class.clone()]],
                                None,
                                None,
                            ));
                        }
                    }
                }
            }
            Formula::Not(a) => {
                if solvable(a, &ctx_fs, inner, pool, memo) {
                    for minor in search(a, ctx, inner, pool, next, memo) {
                        out.push(node(
                            RuleId::NotE,
                            vec![leaf(*l, f.clone()), minor],
                            Vec::new(),
                            None,
                            Some(goal.clone()),
                        ));
                    }
                }
            }
            Formula::Bottom => {
                if matches!(goal, Formula::Atom(..)) {
                    out.push(node(
                        RuleId::BotE,
                        vec![leaf(*l, f.clone())],
                        Vec::new(),
                        None,
                        Some(goal.clone()),
                    ));
                }
            }
            _ => {}
        }
    }
    out
}

fn alloc(next: &mut u32) -> u32 {
    let l = *next;
    *next += 1;
    l
}

fn extend(ctx: &[(u32, Formula)], class: &(u32, Formula)) -> Vec<(u32, Formula)> {
    let mut out = ctx.to_vec();
    out.push(class.clone());
    out
}
