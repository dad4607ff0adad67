//! Formulas and terms of classical first-order logic.
//!
//! Names share one namespace. A symbol occurrence is bound when an enclosing
//! quantifier binds the same name, otherwise it is a parameter (or constant).
//! There is no alpha-conversion: formula equality is structural.

use std::collections::BTreeSet;
use std::fmt;

pub type Name = String;

/// First-order term: a bare symbol or a function application.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Sym(Name),
    Fn(Name, Vec<Term>),
}

/// Formula of the first-order language with a primitive negation operator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(Name, Vec<Term>),
    Bottom,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Exists(Name, Box<Formula>),
    Forall(Name, Box<Formula>),
}

pub fn sym(n: &str) -> Term {
    Term::Sym(n.to_string())
}

pub fn func(n: &str, args: Vec<Term>) -> Term {
    Term::Fn(n.to_string(), args)
}

pub fn atom(n: &str) -> Formula {
    Formula::Atom(n.to_string(), vec![])
}

pub fn atom1(n: &str, t: Term) -> Formula {
    Formula::Atom(n.to_string(), vec![t])
}

pub fn bot() -> Formula {
    Formula::Bottom
}

pub fn neg(f: Formula) -> Formula {
    Formula::Not(Box::new(f))
}

pub fn and(a: Formula, b: Formula) -> Formula {
    Formula::And(Box::new(a), Box::new(b))
}

pub fn or(a: Formula, b: Formula) -> Formula {
    Formula::Or(Box::new(a), Box::new(b))
}

pub fn imp(a: Formula, b: Formula) -> Formula {
    Formula::Imp(Box::new(a), Box::new(b))
}

pub fn ex(x: &str, f: Formula) -> Formula {
    Formula::Exists(x.to_string(), Box::new(f))
}

pub fn all(x: &str, f: Formula) -> Formula {
    Formula::Forall(x.to_string(), Box::new(f))
}

impl Term {
    /// Collects every symbol name occurring in the term.
    pub fn names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Sym(n) => {
                out.insert(n.clone());
            }
            Term::Fn(n, args) => {
                out.insert(n.clone());
                for a in args {
                    a.names(out);
                }
            }
        }
    }

    fn contains_any(&self, names: &BTreeSet<Name>) -> bool {
        match self {
            Term::Sym(n) => names.contains(n),
            Term::Fn(n, args) => names.contains(n) || args.iter().any(|a| a.contains_any(names)),
        }
    }

    fn subst(&self, from: &str, to: &Term) -> Term {
        match self {
            Term::Sym(n) if n == from => to.clone(),
            Term::Sym(_) => self.clone(),
            Term::Fn(n, args) => {
                Term::Fn(n.clone(), args.iter().map(|a| a.subst(from, to)).collect())
            }
        }
    }
}

impl Formula {
    /// Number of connectives and quantifiers in the formula. Atoms have
    /// degree 0; bottom counts as a connective and has degree 1.
    pub fn degree(&self) -> usize {
        match self {
            Formula::Atom(..) => 0,
            Formula::Bottom => 1,
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => 1 + a.degree(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                1 + a.degree() + b.degree()
            }
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom(..))
    }

    /// Names with at least one free (unbound) occurrence in term position.
    pub fn params(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_params(&self, bound: &mut BTreeSet<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Formula::Atom(_, args) => {
                let mut names = BTreeSet::new();
                for a in args {
                    a.names(&mut names);
                }
                for n in names {
                    if !bound.contains(&n) {
                        out.insert(n);
                    }
                }
            }
            Formula::Bottom => {}
            Formula::Not(a) => a.collect_params(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_params(bound, out);
                b.collect_params(bound, out);
            }
            Formula::Exists(x, a) | Formula::Forall(x, a) => {
                let fresh = bound.insert(x.clone());
                a.collect_params(bound, out);
                if fresh {
                    bound.remove(x);
                }
            }
        }
    }

    /// True when the name has a free occurrence in term position.
    pub fn mentions_param(&self, name: &str) -> bool {
        self.params().contains(name)
    }

    /// Substitutes a term for every free occurrence of a variable. Literal
    /// substitution: binders are never renamed, occurrences under a binder of
    /// the same name are left alone.
    pub fn subst_var(&self, var: &str, t: &Term) -> Formula {
        match self {
            Formula::Atom(n, args) => {
                Formula::Atom(n.clone(), args.iter().map(|a| a.subst(var, t)).collect())
            }
            Formula::Bottom => Formula::Bottom,
            Formula::Not(a) => neg(a.subst_var(var, t)),
            Formula::And(a, b) => and(a.subst_var(var, t), b.subst_var(var, t)),
            Formula::Or(a, b) => or(a.subst_var(var, t), b.subst_var(var, t)),
            Formula::Imp(a, b) => imp(a.subst_var(var, t), b.subst_var(var, t)),
            Formula::Exists(x, _) if x == var => self.clone(),
            Formula::Exists(x, a) => Formula::Exists(x.clone(), Box::new(a.subst_var(var, t))),
            Formula::Forall(x, _) if x == var => self.clone(),
            Formula::Forall(x, a) => Formula::Forall(x.clone(), Box::new(a.subst_var(var, t))),
        }
    }

    /// Every name occurring anywhere: predicate and function heads, symbols,
    /// binder names. Used when inventing fresh parameters.
    pub fn all_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Formula::Atom(n, args) => {
                out.insert(n.clone());
                for a in args {
                    a.names(out);
                }
            }
            Formula::Bottom => {}
            Formula::Not(a) => a.all_names(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Formula::Exists(x, a) | Formula::Forall(x, a) => {
                out.insert(x.clone());
                a.all_names(out);
            }
        }
    }

    /// Immediate subformulas (bodies of quantifiers uninstantiated).
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(..) | Formula::Bottom => vec![],
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => vec![a],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => vec![a, b],
        }
    }
}

/// Tests whether `f` is a subformula of `g`. Quantified formulas count all
/// their substitution instances among their subformulas: `f` is a subformula
/// of `ex x A` when `f` equals it, or `f` is a subformula of some instance
/// `A[x:=t]` with `t` free for `x` in `A`.
pub fn is_subformula(f: &Formula, g: &Formula) -> bool {
    sub_with_wilds(f, g, &BTreeSet::new())
}

/// Subformula test where the names in `wilds` stand for arbitrary terms in
/// `g`: each may be instantiated, consistently across its occurrences.
fn sub_with_wilds(f: &Formula, g: &Formula, wilds: &BTreeSet<Name>) -> bool {
    if matches_instance(g, f, wilds).is_some() {
        return true;
    }
    match g {
        Formula::Atom(..) | Formula::Bottom => false,
        Formula::Not(a) => sub_with_wilds(f, a, wilds),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            sub_with_wilds(f, a, wilds) || sub_with_wilds(f, b, wilds)
        }
        Formula::Exists(x, a) | Formula::Forall(x, a) => {
            let mut inner = wilds.clone();
            inner.insert(x.clone());
            sub_with_wilds(f, a, &inner)
        }
    }
}

#[derive(Default)]
struct MatchState {
    assignment: Vec<(Name, Term)>,
}

impl MatchState {
    fn get(&self, n: &str) -> Option<&Term> {
        self.assignment.iter().find(|(k, _)| k == n).map(|(_, v)| v)
    }
}

/// Matches `pattern` against `target`, treating the names in `wilds` as
/// placeholders for terms. Returns the assignment on success. A placeholder
/// must be instantiated consistently, and the term assigned to it may not
/// contain a name bound at the occurrence (the term must be free for the
/// placeholder). Binder names and shadowed placeholders match literally.
pub fn matches_instance(
    pattern: &Formula,
    target: &Formula,
    wilds: &BTreeSet<Name>,
) -> Option<Vec<(Name, Term)>> {
    let mut st = MatchState::default();
    let mut shadowed = BTreeSet::new();
    if match_formula(pattern, target, wilds, &mut shadowed, &mut st) {
        Some(st.assignment)
    } else {
        None
    }
}

fn match_formula(
    pattern: &Formula,
    target: &Formula,
    wilds: &BTreeSet<Name>,
    bound: &mut BTreeSet<Name>,
    st: &mut MatchState,
) -> bool {
    match (pattern, target) {
        (Formula::Atom(n, args), Formula::Atom(m, brgs)) => {
            n == m
                && args.len() == brgs.len()
                && args
                    .iter()
                    .zip(brgs)
                    .all(|(a, b)| match_term(a, b, wilds, bound, st))
        }
        (Formula::Bottom, Formula::Bottom) => true,
        (Formula::Not(a), Formula::Not(b)) => match_formula(a, b, wilds, bound, st),
        (Formula::And(a1, a2), Formula::And(b1, b2))
        | (Formula::Or(a1, a2), Formula::Or(b1, b2))
        | (Formula::Imp(a1, a2), Formula::Imp(b1, b2)) => {
            match_formula(a1, b1, wilds, bound, st) && match_formula(a2, b2, wilds, bound, st)
        }
        (Formula::Exists(x, a), Formula::Exists(y, b))
        | (Formula::Forall(x, a), Formula::Forall(y, b)) => {
            if x != y {
                return false;
            }
            let fresh = bound.insert(x.clone());
            let ok = match_formula(a, b, wilds, bound, st);
            if fresh {
                bound.remove(x);
            }
            ok
        }
        _ => false,
    }
}

fn match_term(
    pattern: &Term,
    target: &Term,
    wilds: &BTreeSet<Name>,
    bound: &BTreeSet<Name>,
    st: &mut MatchState,
) -> bool {
    match pattern {
        Term::Sym(n) if wilds.contains(n) && !bound.contains(n) => {
            if target.contains_any(bound) {
                return false;
            }
            match st.get(n) {
                Some(prev) => prev == target,
                None => {
                    st.assignment.push((n.clone(), target.clone()));
                    true
                }
            }
        }
        Term::Sym(n) => matches!(target, Term::Sym(m) if m == n),
        Term::Fn(n, args) => match target {
            Term::Fn(m, brgs) => {
                n == m
                    && args.len() == brgs.len()
                    && args
                        .iter()
                        .zip(brgs)
                        .all(|(a, b)| match_term(a, b, wilds, bound, st))
            }
            _ => false,
        },
    }
}

/// Matches `candidate` as an instance `body[var:=t]` and returns the witness
/// term. `Ok(None)` means the variable does not occur free, so the candidate
/// equals the body and any term is a witness.
pub fn instance_witness(body: &Formula, var: &str, candidate: &Formula) -> Option<Option<Term>> {
    let mut wilds = BTreeSet::new();
    wilds.insert(var.to_string());
    let assignment = matches_instance(body, candidate, &wilds)?;
    Some(assignment.into_iter().find(|(n, _)| n == var).map(|(_, t)| t))
}

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Atom(..) | Formula::Bottom | Formula::Not(_) => 4,
        Formula::Exists(..) | Formula::Forall(..) => 4,
        Formula::And(..) => 3,
        Formula::Or(..) => 2,
        Formula::Imp(..) => 1,
    }
}

fn fmt_child(f: &Formula, parent: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(f) <= parent {
        write!(out, "({f})")
    } else {
        write!(out, "{f}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Sym(n) => write!(out, "{n}"),
            Term::Fn(n, args) => {
                write!(out, "{n}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(out, ", ")?;
                    }
                    write!(out, "{a}")?;
                }
                write!(out, ")")
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(n, args) => {
                write!(out, "{n}")?;
                if !args.is_empty() {
                    write!(out, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(out, ", ")?;
                        }
                        write!(out, "{a}")?;
                    }
                    write!(out, ")")?;
                }
                Ok(())
            }
            Formula::Bottom => write!(out, "\u{22a5}"),
            Formula::Not(a) => {
                write!(out, "\u{ac}")?;
                if prec(a) < 4 {
                    write!(out, "({a})")
                } else {
                    write!(out, "{a}")
                }
            }
            Formula::And(a, b) => {
                fmt_child(a, 3, out)?;
                write!(out, " \u{2227} ")?;
                fmt_child(b, 3, out)
            }
            Formula::Or(a, b) => {
                fmt_child(a, 2, out)?;
                write!(out, " \u{2228} ")?;
                fmt_child(b, 2, out)
            }
            Formula::Imp(a, b) => {
                fmt_child(a, 1, out)?;
                write!(out, " \u{2283} ")?;
                fmt_child(b, 1, out)
            }
            Formula::Exists(x, a) => {
                write!(out, "\u{2203}{x} ")?;
                if prec(a) < 4 {
                    write!(out, "({a})")
                } else {
                    write!(out, "{a}")
                }
            }
            Formula::Forall(x, a) => {
                write!(out, "\u{2200}{x} ")?;
                if prec(a) < 4 {
                    write!(out, "({a})")
                } else {
                    write!(out, "{a}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fa() -> Formula {
        atom1("F", sym("a"))
    }

    fn fx() -> Formula {
        atom1("F", sym("x"))
    }

    #[test]
    fn degrees() {
        assert_eq!(atom("p").degree(), 0);
        assert_eq!(fa().degree(), 0);
        assert_eq!(bot().degree(), 1);
        assert_eq!(neg(atom("p")).degree(), 1);
        assert_eq!(imp(atom("p"), neg(atom("q"))).degree(), 2);
        assert_eq!(ex("x", fx()).degree(), 1);
        assert_eq!(all("x", or(fx(), atom("p"))).degree(), 2);
    }

    #[test]
    fn params_respect_binding() {
        let f = ex("x", and(fx(), atom1("G", sym("a"))));
        let ps = f.params();
        assert!(ps.contains("a"));
        assert!(!ps.contains("x"));
        assert!(!ex("x", fx()).mentions_param("x"));
        assert!(atom1("F", func("f", vec![sym("a"), sym("x")])).mentions_param("x"));
    }

    #[test]
    fn subst_var_respects_shadowing() {
        let f = and(fx(), ex("x", fx()));
        let g = f.subst_var("x", &sym("a"));
        assert_eq!(g, and(fa(), ex("x", fx())));
    }

    #[test]
    fn plain_subformulas() {
        let f = imp(atom("p"), and(atom("q"), neg(atom("r"))));
        assert!(is_subformula(&f, &f));
        assert!(is_subformula(&atom("p"), &f));
        assert!(is_subformula(&neg(atom("r")), &f));
        assert!(is_subformula(&atom("r"), &f));
        assert!(!is_subformula(&atom("s"), &f));
        assert!(!is_subformula(&f, &atom("p")));
        assert!(!is_subformula(&neg(atom("p")), &f));
    }

    #[test]
    fn quantifier_instances_are_subformulas() {
        let g = ex("x", fx());
        assert!(is_subformula(&g, &g));
        assert!(is_subformula(&fa(), &g));
        assert!(is_subformula(&atom1("F", func("f", vec![sym("a")])), &g));
        assert!(!is_subformula(&atom1("G", sym("a")), &g));

        let conj = ex("x", and(fx(), atom1("G", sym("x"))));
        assert!(is_subformula(&and(fa(), atom1("G", sym("a"))), &conj));
        assert!(!is_subformula(&and(fa(), atom1("G", sym("b"))), &conj));
        assert!(is_subformula(&fa(), &conj));

        let univ = all("x", or(fx(), atom("p")));
        assert!(is_subformula(&or(fa(), atom("p")), &univ));
        assert!(is_subformula(&atom("p"), &univ));
    }

    #[test]
    fn instance_matching_rejects_capture() {
        let g = ex("x", ex("y", Formula::Atom("R".into(), vec![sym("x"), sym("y")])));
        let captured = ex("y", Formula::Atom("R".into(), vec![sym("y"), sym("y")]));
        assert!(!is_subformula(&captured, &g));
        let ok = ex("y", Formula::Atom("R".into(), vec![sym("a"), sym("y")]));
        assert!(is_subformula(&ok, &g));
    }

    #[test]
    fn shadowed_binder_matches_literally() {
        let g = ex("x", and(fx(), ex("x", fx())));
        assert!(is_subformula(&and(fa(), ex("x", fx())), &g));
        assert!(!is_subformula(&and(fa(), ex("x", fa())), &g));
    }

    #[test]
    fn instance_witnesses() {
        assert_eq!(
            instance_witness(&fx(), "x", &fa()),
            Some(Some(sym("a")))
        );
        assert_eq!(instance_witness(&atom("p"), "x", &atom("p")), Some(None));
        assert_eq!(instance_witness(&fx(), "x", &atom1("G", sym("a"))), None);
        let two = and(fx(), fx());
        assert_eq!(
            instance_witness(&two, "x", &and(fa(), fa())),
            Some(Some(sym("a")))
        );
        assert_eq!(
            instance_witness(&two, "x", &and(fa(), atom1("F", sym("b")))),
            None
        );
    }

    fn formula_strategy() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(atom("p")),
            Just(atom("q")),
            Just(fa()),
            Just(fx()),
            Just(atom1("G", sym("y"))),
            Just(bot()),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(neg),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| imp(a, b)),
                inner.clone().prop_map(|a| ex("x", a)),
                inner.prop_map(|a| all("y", a)),
            ]
        })
    }

    /// Concrete subformula closure, instantiating quantifiers with one term.
    fn closure(f: &Formula, out: &mut Vec<Formula>) {
        if out.contains(f) {
            return;
        }
        out.push(f.clone());
        match f {
            Formula::Exists(x, a) | Formula::Forall(x, a) => {
                closure(&a.subst_var(x, &sym("c")), out);
            }
            _ => {}
        }
        for c in f.children() {
            closure(c, out);
        }
    }

    proptest! {
        #[test]
        fn subformula_reflexive(f in formula_strategy()) {
            prop_assert!(is_subformula(&f, &f));
        }

        #[test]
        fn subformula_transitive_on_closure(f in formula_strategy()) {
            let mut first = Vec::new();
            closure(&f, &mut first);
            for g in &first {
                prop_assert!(is_subformula(g, &f));
                let mut second = Vec::new();
                closure(g, &mut second);
                for h in second {
                    prop_assert!(is_subformula(&h, &f));
                }
            }
        }
    }
}
