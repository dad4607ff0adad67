//! Deduction trees and the correctness checker.
//!
//! Rules come in three families. The general rules pair eliminations that
//! conclude an arbitrary formula with introductions that discharge the
//! compound formula instead of concluding it; Tarski's rule is the second
//! introduction rule for implication. The conventional variants conclude the
//! compound directly. Discharge is tracked by assumption classes: a label
//! names a class, every occurrence of the class is a leaf with that label,
//! and the application that discharges the class lists it in the group keyed
//! to one of its premises.

use crate::logic::{instance_witness, Formula, Name, Term};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Rule identifiers. The `c` suffix marks the conventional variants that
/// conclude the compound formula instead of discharging it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    AndI,
    AndE,
    OrIL,
    OrIR,
    OrE,
    ImpI,
    Tr,
    ImpE,
    NotI,
    NotE,
    ExI,
    ExE,
    AllI,
    AllE,
    BotE,
    AndIc,
    OrILc,
    OrIRc,
    ImpIc,
    ExIc,
}

/// Classification of a premise slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Major,
    Minor,
    Specific,
    Arbitrary,
}

pub const ALL_RULES: [RuleId; 20] = [
    RuleId::AndI,
    RuleId::AndE,
    RuleId::OrIL,
    RuleId::OrIR,
    RuleId::OrE,
    RuleId::ImpI,
    RuleId::Tr,
    RuleId::ImpE,
    RuleId::NotI,
    RuleId::NotE,
    RuleId::ExI,
    RuleId::ExE,
    RuleId::AllI,
    RuleId::AllE,
    RuleId::BotE,
    RuleId::AndIc,
    RuleId::OrILc,
    RuleId::OrIRc,
    RuleId::ImpIc,
    RuleId::ExIc,
];

impl RuleId {
    pub fn name(self) -> &'static str {
        match self {
            RuleId::AndI => "andI",
            RuleId::AndE => "andE",
            RuleId::OrIL => "orIL",
            RuleId::OrIR => "orIR",
            RuleId::OrE => "orE",
            RuleId::ImpI => "impI",
            RuleId::Tr => "tr",
            RuleId::ImpE => "impE",
            RuleId::NotI => "notI",
            RuleId::NotE => "notE",
            RuleId::ExI => "exI",
            RuleId::ExE => "exE",
            RuleId::AllI => "allI",
            RuleId::AllE => "allE",
            RuleId::BotE => "botE",
            RuleId::AndIc => "andIc",
            RuleId::OrILc => "orILc",
            RuleId::OrIRc => "orIRc",
            RuleId::ImpIc => "impIc",
            RuleId::ExIc => "exIc",
        }
    }

    pub fn from_name(name: &str) -> Option<RuleId> {
        ALL_RULES.iter().copied().find(|r| r.name() == name)
    }

    /// Premise slot roles, in order.
    pub fn roles(self) -> &'static [Role] {
        use Role::*;
        match self {
            RuleId::AndI => &[Specific, Specific, Arbitrary],
            RuleId::AndE => &[Major, Arbitrary],
            RuleId::OrIL | RuleId::OrIR => &[Specific, Arbitrary],
            RuleId::OrE => &[Major, Arbitrary, Arbitrary],
            RuleId::ImpI => &[Specific, Arbitrary],
            RuleId::Tr => &[Arbitrary, Arbitrary],
            RuleId::ImpE => &[Major, Minor, Arbitrary],
            RuleId::NotI => &[Arbitrary, Arbitrary],
            RuleId::NotE => &[Major, Minor],
            RuleId::ExI => &[Specific, Arbitrary],
            RuleId::ExE => &[Major, Arbitrary],
            RuleId::AllI => &[Specific, Arbitrary],
            RuleId::AllE => &[Major, Arbitrary],
            RuleId::BotE => &[Major],
            RuleId::AndIc => &[Specific, Specific],
            RuleId::OrILc | RuleId::OrIRc | RuleId::ExIc => &[Specific],
            RuleId::ImpIc => &[Specific],
        }
    }

    pub fn arity(self) -> usize {
        self.roles().len()
    }

    /// Premise slot that each discharge group is keyed to, in group order.
    /// Every occurrence of a class discharged in a group must lie in the
    /// subtree of the keyed premise.
    pub fn discharge_slots(self) -> &'static [usize] {
        match self {
            RuleId::AndI => &[2],
            RuleId::AndE => &[1, 1],
            RuleId::OrIL | RuleId::OrIR => &[1],
            RuleId::OrE => &[1, 2],
            RuleId::ImpI => &[1],
            RuleId::Tr => &[0, 1],
            RuleId::ImpE => &[2],
            RuleId::NotI => &[0, 1],
            RuleId::NotE => &[],
            RuleId::ExI => &[1],
            RuleId::ExE => &[1],
            RuleId::AllI => &[1],
            RuleId::AllE => &[1],
            RuleId::BotE => &[],
            RuleId::AndIc => &[],
            RuleId::OrILc | RuleId::OrIRc | RuleId::ExIc => &[],
            RuleId::ImpIc => &[0],
        }
    }

    /// Whether a discharge group may list no classes at all. Conjunction
    /// elimination may discharge only one of the two conjuncts, and the
    /// conventional implication introduction permits vacuous discharge; every
    /// other group must discharge something (the ban on vacuous discharge
    /// above arbitrary premises).
    pub fn group_may_be_empty(self, _group: usize) -> bool {
        matches!(self, RuleId::AndE | RuleId::ImpIc)
    }

    /// Rules whose conclusion is not determined by their premises and is
    /// therefore written explicitly.
    pub fn has_explicit_conclusion(self) -> bool {
        matches!(
            self,
            RuleId::NotE
                | RuleId::BotE
                | RuleId::OrILc
                | RuleId::OrIRc
                | RuleId::ImpIc
                | RuleId::ExIc
        )
    }

    pub fn needs_eigen(self) -> bool {
        matches!(self, RuleId::ExE | RuleId::AllI)
    }

    pub fn is_elim(self) -> bool {
        matches!(
            self,
            RuleId::AndE
                | RuleId::OrE
                | RuleId::ImpE
                | RuleId::NotE
                | RuleId::ExE
                | RuleId::AllE
                | RuleId::BotE
        )
    }

    pub fn is_general_intro(self) -> bool {
        matches!(
            self,
            RuleId::AndI
                | RuleId::OrIL
                | RuleId::OrIR
                | RuleId::ImpI
                | RuleId::Tr
                | RuleId::NotI
                | RuleId::ExI
                | RuleId::AllI
        )
    }

    pub fn is_conventional(self) -> bool {
        matches!(
            self,
            RuleId::AndIc | RuleId::OrILc | RuleId::OrIRc | RuleId::ImpIc | RuleId::ExIc
        )
    }

    /// For general introductions, the group discharging the major assumption
    /// (the compound formula the rule governs).
    pub fn major_group(self) -> Option<usize> {
        match self {
            RuleId::AndI | RuleId::OrIL | RuleId::OrIR | RuleId::ImpI | RuleId::ExI
            | RuleId::AllI => Some(0),
            RuleId::Tr | RuleId::NotI => Some(1),
            _ => None,
        }
    }

    /// For Tarski's rule and negation introduction, the group discharging the
    /// minor assumption.
    pub fn minor_group(self) -> Option<usize> {
        match self {
            RuleId::Tr | RuleId::NotI => Some(0),
            _ => None,
        }
    }

    pub fn arb_slots(self) -> Vec<usize> {
        self.roles()
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == Role::Arbitrary)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn first_arb_slot(self) -> Option<usize> {
        self.roles().iter().position(|r| *r == Role::Arbitrary)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "{}", self.name())
    }
}

/// A deduction tree. Leaves are assumption occurrences; inner nodes apply a
/// rule to premise subtrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Deduction {
    Leaf { label: u32, formula: Formula },
    Node(Box<NodeData>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeData {
    pub rule: RuleId,
    pub premises: Vec<Deduction>,
    /// One group per discharge slot of the rule, in schema order. Each group
    /// lists the discharged classes as (label, formula) pairs, sorted by
    /// label.
    pub discharges: Vec<Vec<(u32, Formula)>>,
    pub eigen: Option<Name>,
    /// Present exactly for the rules with an explicit conclusion.
    pub concl: Option<Formula>,
}

pub fn leaf(label: u32, formula: Formula) -> Deduction {
    Deduction::Leaf { label, formula }
}

/// Node constructor; normalizes each discharge group to sorted-by-label
/// order so that structurally equal trees compare equal.
pub fn node(
    rule: RuleId,
    premises: Vec<Deduction>,
    mut discharges: Vec<Vec<(u32, Formula)>>,
    eigen: Option<Name>,
    concl: Option<Formula>,
) -> Deduction {
    for group in &mut discharges {
        group.sort();
    }
    Deduction::Node(Box::new(NodeData {
        rule,
        premises,
        discharges,
        eigen,
        concl,
    }))
}

impl Deduction {
    pub fn as_node(&self) -> Option<&NodeData> {
        match self {
            Deduction::Leaf { .. } => None,
            Deduction::Node(n) => Some(n),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Deduction::Leaf { .. })
    }

    /// The formula this deduction derives. `None` when a malformed node has
    /// no premise in the slot that determines the conclusion.
    pub fn conclusion(&self) -> Option<Formula> {
        match self {
            Deduction::Leaf { formula, .. } => Some(formula.clone()),
            Deduction::Node(n) => {
                if n.rule.has_explicit_conclusion() {
                    return n.concl.clone();
                }
                if n.rule == RuleId::AndIc {
                    let a = n.premises.first()?.conclusion()?;
                    let b = n.premises.get(1)?.conclusion()?;
                    return Some(Formula::And(Box::new(a), Box::new(b)));
                }
                let slot = n.rule.first_arb_slot()?;
                n.premises.get(slot)?.conclusion()
            }
        }
    }

    /// Number of nodes, leaves included.
    pub fn size(&self) -> usize {
        match self {
            Deduction::Leaf { .. } => 1,
            Deduction::Node(n) => 1 + n.premises.iter().map(Deduction::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Deduction::Leaf { .. } => 1,
            Deduction::Node(n) => {
                1 + n.premises.iter().map(Deduction::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn at_path(&self, path: &[usize]) -> Option<&Deduction> {
        let mut cur = self;
        for &i in path {
            cur = cur.as_node()?.premises.get(i)?;
        }
        Some(cur)
    }

    /// Rebuilds the tree with the subtree at `path` replaced.
    pub fn replace_at(&self, path: &[usize], replacement: Deduction) -> Deduction {
        match path.split_first() {
            None => replacement,
            Some((&i, rest)) => match self {
                Deduction::Leaf { .. } => self.clone(),
                Deduction::Node(n) => {
                    let mut data = (**n).clone();
                    if let Some(p) = data.premises.get_mut(i) {
                        *p = p.replace_at(rest, replacement);
                    }
                    Deduction::Node(Box::new(data))
                }
            },
        }
    }

    /// Leaf occurrences in preorder: (path, label, formula).
    pub fn leaves(&self) -> Vec<(Vec<usize>, u32, Formula)> {
        let mut out = Vec::new();
        self.walk_leaves(&mut Vec::new(), &mut out);
        out
    }

    fn walk_leaves(&self, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, u32, Formula)>) {
        match self {
            Deduction::Leaf { label, formula } => {
                out.push((path.clone(), *label, formula.clone()));
            }
            Deduction::Node(n) => {
                for (i, p) in n.premises.iter().enumerate() {
                    path.push(i);
                    p.walk_leaves(path, out);
                    path.pop();
                }
            }
        }
    }

    /// Discharge listings in preorder: (node path, group, label, formula).
    pub fn discharge_listings(&self) -> Vec<(Vec<usize>, usize, u32, Formula)> {
        let mut out = Vec::new();
        self.walk_listings(&mut Vec::new(), &mut out);
        out
    }

    fn walk_listings(
        &self,
        path: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, usize, u32, Formula)>,
    ) {
        if let Deduction::Node(n) = self {
            for (i, p) in n.premises.iter().enumerate() {
                path.push(i);
                p.walk_listings(path, out);
                path.pop();
            }
            for (g, group) in n.discharges.iter().enumerate() {
                for (l, f) in group {
                    out.push((path.clone(), g, *l, f.clone()));
                }
            }
        }
    }

    /// Every class label used in the tree, whether at a leaf or a listing.
    pub fn labels(&self) -> BTreeSet<u32> {
        let mut out: BTreeSet<u32> = self.leaves().into_iter().map(|(_, l, _)| l).collect();
        out.extend(self.discharge_listings().into_iter().map(|(_, _, l, _)| l));
        out
    }

    pub fn fresh_label(&self) -> u32 {
        self.labels().iter().max().map_or(1, |m| m + 1)
    }

    /// Applies a label mapping to leaves and listings; unmapped labels stay.
    pub fn relabel(&self, map: &BTreeMap<u32, u32>) -> Deduction {
        match self {
            Deduction::Leaf { label, formula } => leaf(
                map.get(label).copied().unwrap_or(*label),
                formula.clone(),
            ),
            Deduction::Node(n) => node(
                n.rule,
                n.premises.iter().map(|p| p.relabel(map)).collect(),
                n.discharges
                    .iter()
                    .map(|g| {
                        g.iter()
                            .map(|(l, f)| (map.get(l).copied().unwrap_or(*l), f.clone()))
                            .collect()
                    })
                    .collect(),
                n.eigen.clone(),
                n.concl.clone(),
            ),
        }
    }

    /// Relabels classes to 1..n by order of first appearance (leaves in
    /// preorder, then listings). Two trees are equal up to a relabeling of
    /// assumption classes exactly when their canonical forms are equal.
    pub fn canonical_labels(&self) -> Deduction {
        let mut map = BTreeMap::new();
        let mut next = 1u32;
        for (_, l, _) in self.leaves() {
            map.entry(l).or_insert_with(|| {
                let v = next;
                next += 1;
                v
            });
        }
        for (_, _, l, _) in self.discharge_listings() {
            map.entry(l).or_insert_with(|| {
                let v = next;
                next += 1;
                v
            });
        }
        self.relabel(&map)
    }

    /// Substitutes a term for a parameter in every formula of the tree.
    pub fn subst_param(&self, param: &str, t: &Term) -> Deduction {
        match self {
            Deduction::Leaf { label, formula } => leaf(*label, formula.subst_var(param, t)),
            Deduction::Node(n) => node(
                n.rule,
                n.premises.iter().map(|p| p.subst_param(param, t)).collect(),
                n.discharges
                    .iter()
                    .map(|g| {
                        g.iter()
                            .map(|(l, f)| (*l, f.subst_var(param, t)))
                            .collect()
                    })
                    .collect(),
                n.eigen.clone(),
                n.concl.as_ref().map(|c| c.subst_var(param, t)),
            ),
        }
    }

    /// Every name appearing anywhere: in formulas, terms and eigenparameters.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Deduction::Leaf { formula, .. } => formula.all_names(out),
            Deduction::Node(n) => {
                for p in &n.premises {
                    p.collect_names(out);
                }
                for g in &n.discharges {
                    for (_, f) in g {
                        f.all_names(out);
                    }
                }
                if let Some(e) = &n.eigen {
                    out.insert(e.clone());
                }
                if let Some(c) = &n.concl {
                    c.all_names(out);
                }
            }
        }
    }

    /// A parameter name not used anywhere in the tree, of the form `a1`,
    /// `a2`, ...
    pub fn fresh_param(&self) -> Name {
        let used = self.all_names();
        (1..)
            .map(|i| format!("a{i}"))
            .find(|n| !used.contains(n))
            .unwrap()
    }

    /// Classes with an occurrence in this subtree that are not discharged
    /// within it: the undischarged assumptions of the subtree viewed as a
    /// deduction of its own.
    pub fn opens(&self) -> BTreeSet<(u32, Formula)> {
        let discharged: BTreeSet<u32> = self
            .discharge_listings()
            .into_iter()
            .map(|(_, _, l, _)| l)
            .collect();
        self.leaves()
            .into_iter()
            .filter(|(_, l, _)| !discharged.contains(l))
            .map(|(_, l, f)| (l, f))
            .collect()
    }

    pub fn open_formulas(&self) -> BTreeSet<Formula> {
        self.opens().into_iter().map(|(_, f)| f).collect()
    }
}

/// Equality up to a bijective relabeling of assumption classes.
pub fn eq_mod_labels(a: &Deduction, b: &Deduction) -> bool {
    a.canonical_labels() == b.canonical_labels()
}

/// The deductive system in force: the propositional core, the core plus the
/// existential quantifier, or both quantifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum System {
    C,
    CEx,
    CExAll,
}

impl System {
    pub fn from_name(s: &str) -> Option<System> {
        match s {
            "c" => Some(System::C),
            "cex" => Some(System::CEx),
            "cexall" => Some(System::CExAll),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            System::C => "c",
            System::CEx => "cex",
            System::CExAll => "cexall",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Premise-index path from the root to the offending node.
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(out, "at root: {}", self.message)
        } else {
            let p: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
            write!(out, "at {}: {}", p.join("."), self.message)
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub valid: bool,
    pub conclusion: Option<Formula>,
    pub open_assumptions: BTreeSet<(u32, Formula)>,
    pub diagnostics: Vec<Diagnostic>,
}

impl CheckReport {
    pub fn open_formulas(&self) -> BTreeSet<Formula> {
        self.open_assumptions.iter().map(|(_, f)| f.clone()).collect()
    }
}

fn quantifier_content(f: &Formula) -> (bool, bool) {
    match f {
        Formula::Atom(..) | Formula::Bottom => (false, false),
        Formula::Not(a) => quantifier_content(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            let (xa, fa) = quantifier_content(a);
            let (xb, fb) = quantifier_content(b);
            (xa || xb, fa || fb)
        }
        Formula::Exists(_, a) => (true, quantifier_content(a).1),
        Formula::Forall(_, a) => (quantifier_content(a).0, true),
    }
}

struct Checker {
    system: System,
    diagnostics: Vec<Diagnostic>,
}

impl Checker {
    fn report(&mut self, path: &[usize], message: String) {
        self.diagnostics.push(Diagnostic {
            path: path.to_vec(),
            message,
        });
    }

    fn check_formula_system(&mut self, path: &[usize], f: &Formula) {
        let (has_ex, has_all) = quantifier_content(f);
        if has_all && self.system != System::CExAll {
            self.report(
                path,
                format!("formula {f} uses a universal quantifier, not available in system {}", self.system.name()),
            );
        } else if has_ex && self.system == System::C {
            self.report(
                path,
                format!("formula {f} uses an existential quantifier, not available in system {}", self.system.name()),
            );
        }
    }

    /// Structural pass: arity, slot agreement, per-rule formula relations,
    /// eigenparameter conditions. Returns the conclusion when determinable.
    fn check_node(&mut self, d: &Deduction, path: &mut Vec<usize>) -> Option<Formula> {
        let n = match d {
            Deduction::Leaf { formula, .. } => {
                self.check_formula_system(path, formula);
                return Some(formula.clone());
            }
            Deduction::Node(n) => n,
        };
        let rule = n.rule;

        let mut concls = Vec::with_capacity(n.premises.len());
        for (i, p) in n.premises.iter().enumerate() {
            path.push(i);
            concls.push(self.check_node(p, path));
            path.pop();
        }

        match rule {
            RuleId::ExI | RuleId::ExE | RuleId::ExIc => {
                if self.system == System::C {
                    self.report(path, format!("rule {rule} is not available in system c"));
                }
            }
            RuleId::AllI | RuleId::AllE if self.system != System::CExAll => {
                self.report(
                    path,
                    format!("rule {rule} is not available in system {}", self.system.name()),
                );
            }
            _ => {}
        }

        if n.premises.len() != rule.arity() {
            self.report(
                path,
                format!(
                    "rule {rule} takes {} premises, found {}",
                    rule.arity(),
                    n.premises.len()
                ),
            );
            return None;
        }
        if n.discharges.len() != rule.discharge_slots().len() {
            self.report(
                path,
                format!(
                    "rule {rule} has {} discharge groups, found {}",
                    rule.discharge_slots().len(),
                    n.discharges.len()
                ),
            );
            return None;
        }
        if rule.has_explicit_conclusion() && n.concl.is_none() {
            self.report(path, format!("rule {rule} requires an explicit conclusion"));
            return None;
        }
        if !rule.has_explicit_conclusion() && n.concl.is_some() {
            self.report(
                path,
                format!("rule {rule} does not take an explicit conclusion"),
            );
        }
        if rule.needs_eigen() && n.eigen.is_none() {
            self.report(path, format!("rule {rule} requires an eigenparameter"));
            return None;
        }
        if !rule.needs_eigen() && n.eigen.is_some() {
            self.report(path, format!("rule {rule} does not take an eigenparameter"));
        }
        if let Some(c) = &n.concl {
            self.check_formula_system(path, c);
        }
        for g in &n.discharges {
            for (_, f) in g {
                self.check_formula_system(path, f);
            }
        }

        for (g, group) in n.discharges.iter().enumerate() {
            if group.is_empty() && !rule.group_may_be_empty(g) {
                self.report(
                    path,
                    format!("rule {rule} discharge group {g} must discharge at least one class"),
                );
            }
        }
        // A conjunction elimination may leave either class empty, but not both:
        // an application that discharges nothing is vacuous and belongs cleaned
        // away, continuing straight from the arbitrary premise.
        if rule == RuleId::AndE && n.discharges.iter().all(|g| g.is_empty()) {
            self.report(
                path,
                format!("rule {rule} must discharge at least one class"),
            );
        }

        // Arbitrary premises must agree; they carry the conclusion.
        let arbs = rule.arb_slots();
        if arbs.len() == 2 {
            if let (Some(Some(a)), Some(Some(b))) = (concls.get(arbs[0]), concls.get(arbs[1])) {
                if a != b {
                    self.report(
                        path,
                        format!("arbitrary premises disagree: {a} versus {b}"),
                    );
                }
            }
        }

        let concl_of = |i: usize| -> Option<&Formula> { concls.get(i).and_then(|c| c.as_ref()) };

        match rule {
            RuleId::AndI => {
                if let (Some(a), Some(b)) = (concl_of(0), concl_of(1)) {
                    let want = Formula::And(Box::new(a.clone()), Box::new(b.clone()));
                    for (l, f) in &n.discharges[0] {
                        if f != &want {
                            self.report(
                                path,
                                format!("class {l} must be {want}, found {f}"),
                            );
                        }
                    }
                }
                concl_of(2).cloned()
            }
            RuleId::AndE => {
                if let Some(major) = concl_of(0) {
                    if let Formula::And(a, b) = major {
                        for (l, f) in &n.discharges[0] {
                            if f != a.as_ref() {
                                self.report(path, format!("class {l} must be {a}, found {f}"));
                            }
                        }
                        for (l, f) in &n.discharges[1] {
                            if f != b.as_ref() {
                                self.report(path, format!("class {l} must be {b}, found {f}"));
                            }
                        }
                    } else {
                        self.report(
                            path,
                            format!("major premise must be a conjunction, found {major}"),
                        );
                    }
                }
                concl_of(1).cloned()
            }
            RuleId::OrIL | RuleId::OrIR => {
                if let Some(spec) = concl_of(0) {
                    for (l, f) in &n.discharges[0] {
                        let ok = match f {
                            Formula::Or(a, _) if rule == RuleId::OrIL => a.as_ref() == spec,
                            Formula::Or(_, b) if rule == RuleId::OrIR => b.as_ref() == spec,
                            _ => false,
                        };
                        if !ok {
                            let side = if rule == RuleId::OrIL { "left" } else { "right" };
                            self.report(
                                path,
                                format!(
                                    "class {l} must be a disjunction with {side} disjunct {spec}, found {f}"
                                ),
                            );
                        }
                    }
                }
                concl_of(1).cloned()
            }
            RuleId::OrE => {
                if let Some(major) = concl_of(0) {
                    if let Formula::Or(a, b) = major {
                        for (l, f) in &n.discharges[0] {
                            if f != a.as_ref() {
                                self.report(path, format!("class {l} must be {a}, found {f}"));
                            }
                        }
                        for (l, f) in &n.discharges[1] {
                            if f != b.as_ref() {
                                self.report(path, format!("class {l} must be {b}, found {f}"));
                            }
                        }
                    } else {
                        self.report(
                            path,
                            format!("major premise must be a disjunction, found {major}"),
                        );
                    }
                }
                concl_of(1).cloned()
            }
            RuleId::ImpI => {
                if let Some(spec) = concl_of(0) {
                    for (l, f) in &n.discharges[0] {
                        let ok = matches!(f, Formula::Imp(_, b) if b.as_ref() == spec);
                        if !ok {
                            self.report(
                                path,
                                format!(
                                    "class {l} must be an implication with consequent {spec}, found {f}"
                                ),
                            );
                        }
                    }
                }
                concl_of(1).cloned()
            }
            RuleId::Tr => {
                let minor: Option<&Formula> = n.discharges[0].first().map(|(_, f)| f);
                if let Some(a) = minor {
                    for (l, f) in &n.discharges[0] {
                        if f != a {
                            self.report(
                                path,
                                format!("minor classes must agree: class {l} is {f}, expected {a}"),
                            );
                        }
                    }
                    for (l, f) in &n.discharges[1] {
                        let ok = matches!(f, Formula::Imp(x, _) if x.as_ref() == a);
                        if !ok {
                            self.report(
                                path,
                                format!(
                                    "class {l} must be an implication with antecedent {a}, found {f}"
                                ),
                            );
                        }
                    }
                }
                concl_of(0).cloned()
            }
            RuleId::ImpE => {
                if let Some(major) = concl_of(0) {
                    if let Formula::Imp(a, b) = major {
                        if let Some(minor) = concl_of(1) {
                            if minor != a.as_ref() {
                                self.report(
                                    path,
                                    format!("minor premise must be {a}, found {minor}"),
                                );
                            }
                        }
                        for (l, f) in &n.discharges[0] {
                            if f != b.as_ref() {
                                self.report(path, format!("class {l} must be {b}, found {f}"));
                            }
                        }
                    } else {
                        self.report(
                            path,
                            format!("major premise must be an implication, found {major}"),
                        );
                    }
                }
                concl_of(2).cloned()
            }
            RuleId::NotI => {
                let minor: Option<&Formula> = n.discharges[0].first().map(|(_, f)| f);
                if let Some(a) = minor {
                    for (l, f) in &n.discharges[0] {
                        if f != a {
                            self.report(
                                path,
                                format!("minor classes must agree: class {l} is {f}, expected {a}"),
                            );
                        }
                    }
                    let want = Formula::Not(Box::new(a.clone()));
                    for (l, f) in &n.discharges[1] {
                        if f != &want {
                            self.report(path, format!("class {l} must be {want}, found {f}"));
                        }
                    }
                }
                concl_of(0).cloned()
            }
            RuleId::NotE => {
                if let Some(major) = concl_of(0) {
                    if let Formula::Not(a) = major {
                        if let Some(minor) = concl_of(1) {
                            if minor != a.as_ref() {
                                self.report(
                                    path,
                                    format!("minor premise must be {a}, found {minor}"),
                                );
                            }
                        }
                    } else {
                        self.report(
                            path,
                            format!("major premise must be a negation, found {major}"),
                        );
                    }
                }
                n.concl.clone()
            }
            RuleId::BotE => {
                if let Some(major) = concl_of(0) {
                    if major != &Formula::Bottom {
                        self.report(path, format!("major premise must be \u{22a5}, found {major}"));
                    }
                }
                if let Some(c) = &n.concl {
                    if !c.is_atom() {
                        self.report(path, format!("conclusion must be atomic, found {c}"));
                    }
                }
                n.concl.clone()
            }
            RuleId::ExI => {
                if let Some(spec) = concl_of(0) {
                    for (l, f) in &n.discharges[0] {
                        let ok = matches!(f, Formula::Exists(x, body)
                            if instance_witness(body, x, spec).is_some());
                        if !ok {
                            self.report(
                                path,
                                format!(
                                    "class {l} must be an existential with instance {spec}, found {f}"
                                ),
                            );
                        }
                    }
                }
                concl_of(1).cloned()
            }
            RuleId::ExE => {
                let a = n.eigen.clone()?;
                if let Some(major) = concl_of(0) {
                    if let Formula::Exists(x, body) = major {
                        if major.mentions_param(&a) {
                            self.report(
                                path,
                                format!("eigenparameter {a} occurs in the major premise {major}"),
                            );
                        }
                        for (l, f) in &n.discharges[0] {
                            let ok = match instance_witness(body, x, f) {
                                Some(Some(Term::Sym(s))) => s == a,
                                Some(None) => true,
                                _ => false,
                            };
                            if !ok {
                                self.report(
                                    path,
                                    format!(
                                        "class {l} must be the instance of {major} with eigenparameter {a}, found {f}"
                                    ),
                                );
                            }
                        }
                    } else {
                        self.report(
                            path,
                            format!("major premise must be an existential, found {major}"),
                        );
                    }
                }
                let concl = concl_of(1).cloned();
                if let Some(c) = &concl {
                    if c.mentions_param(&a) {
                        self.report(
                            path,
                            format!("eigenparameter {a} occurs in the conclusion {c}"),
                        );
                    }
                }
                let own: BTreeSet<u32> = n.discharges[0].iter().map(|(l, _)| *l).collect();
                for (l, f) in n.premises[1].opens() {
                    if !own.contains(&l) && f.mentions_param(&a) {
                        self.report(
                            path,
                            format!("eigenparameter {a} occurs in open assumption {f} of class {l}"),
                        );
                    }
                }
                concl
            }
            RuleId::AllE => {
                if let Some(major) = concl_of(0) {
                    if let Formula::Forall(x, body) = major {
                        for (l, f) in &n.discharges[0] {
                            if instance_witness(body, x, f).is_none() {
                                self.report(
                                    path,
                                    format!("class {l} must be an instance of {major}, found {f}"),
                                );
                            }
                        }
                    } else {
                        self.report(
                            path,
                            format!("major premise must be a universal, found {major}"),
                        );
                    }
                }
                concl_of(1).cloned()
            }
            RuleId::AllI => {
                let a = n.eigen.clone()?;
                if let Some(spec) = concl_of(0) {
                    for (l, f) in &n.discharges[0] {
                        match f {
                            Formula::Forall(x, body) => {
                                if f.mentions_param(&a) {
                                    self.report(
                                        path,
                                        format!("eigenparameter {a} occurs in the discharged class {f}"),
                                    );
                                }
                                let ok = match instance_witness(body, x, spec) {
                                    Some(Some(Term::Sym(ref s))) => *s == a,
                                    Some(None) => true,
                                    _ => false,
                                };
                                if !ok {
                                    self.report(
                                        path,
                                        format!(
                                            "specific premise {spec} is not the instance of {f} at eigenparameter {a}"
                                        ),
                                    );
                                }
                            }
                            _ => {
                                self.report(
                                    path,
                                    format!("class {l} must be a universal, found {f}"),
                                );
                            }
                        }
                    }
                }
                for (l, f) in n.premises[0].opens() {
                    if f.mentions_param(&a) {
                        self.report(
                            path,
                            format!(
                                "eigenparameter {a} occurs in open assumption {f} of class {l} in the specific premise"
                            ),
                        );
                    }
                }
                concl_of(1).cloned()
            }
            RuleId::AndIc => {
                let a = concl_of(0)?.clone();
                let b = concl_of(1)?.clone();
                Some(Formula::And(Box::new(a), Box::new(b)))
            }
            RuleId::OrILc | RuleId::OrIRc => {
                if let (Some(spec), Some(c)) = (concl_of(0), &n.concl) {
                    let ok = match c {
                        Formula::Or(a, _) if rule == RuleId::OrILc => a.as_ref() == spec,
                        Formula::Or(_, b) if rule == RuleId::OrIRc => b.as_ref() == spec,
                        _ => false,
                    };
                    if !ok {
                        let side = if rule == RuleId::OrILc { "left" } else { "right" };
                        self.report(
                            path,
                            format!(
                                "conclusion must be a disjunction with {side} disjunct {spec}, found {c}"
                            ),
                        );
                    }
                }
                n.concl.clone()
            }
            RuleId::ImpIc => {
                if let (Some(spec), Some(c)) = (concl_of(0), &n.concl) {
                    if let Formula::Imp(a, b) = c {
                        if b.as_ref() != spec {
                            self.report(
                                path,
                                format!("conclusion consequent must be {spec}, found {b}"),
                            );
                        }
                        for (l, f) in &n.discharges[0] {
                            if f != a.as_ref() {
                                self.report(path, format!("class {l} must be {a}, found {f}"));
                            }
                        }
                    } else {
                        self.report(
                            path,
                            format!("conclusion must be an implication, found {c}"),
                        );
                    }
                }
                n.concl.clone()
            }
            RuleId::ExIc => {
                if let (Some(spec), Some(c)) = (concl_of(0), &n.concl) {
                    let ok = matches!(c, Formula::Exists(x, body)
                        if instance_witness(body, x, spec).is_some());
                    if !ok {
                        self.report(
                            path,
                            format!("conclusion must be an existential with instance {spec}, found {c}"),
                        );
                    }
                }
                n.concl.clone()
            }
        }
    }
}

/// Checks a deduction in the given system. The report is total: an invalid
/// tree yields diagnostics, a best-effort conclusion and the open classes.
pub fn check(d: &Deduction, system: System) -> CheckReport {
    let mut checker = Checker {
        system,
        diagnostics: Vec::new(),
    };

    let leaves = d.leaves();
    let listings = d.discharge_listings();

    // Label coherence: one formula per class across leaves and listings.
    let mut formulas: BTreeMap<u32, Formula> = BTreeMap::new();
    for (path, l, f) in &leaves {
        match formulas.get(l) {
            None => {
                formulas.insert(*l, f.clone());
            }
            Some(prev) if prev != f => {
                checker.report(
                    path,
                    format!("class {l} used with formula {f} but previously {prev}"),
                );
            }
            _ => {}
        }
    }
    for (path, _, l, f) in &listings {
        match formulas.get(l) {
            None => {
                formulas.insert(*l, f.clone());
            }
            Some(prev) if prev != f => {
                checker.report(
                    path,
                    format!("class {l} discharged with formula {f} but occurs as {prev}"),
                );
            }
            _ => {}
        }
    }

    // Each class is discharged at most once, and listed classes must occur.
    let mut sites: BTreeMap<u32, Vec<(Vec<usize>, usize)>> = BTreeMap::new();
    for (path, g, l, _) in &listings {
        sites.entry(*l).or_default().push((path.clone(), *g));
    }
    let mut occurrences: BTreeMap<u32, Vec<Vec<usize>>> = BTreeMap::new();
    for (path, l, _) in &leaves {
        occurrences.entry(*l).or_default().push(path.clone());
    }
    for (l, s) in &sites {
        if s.len() > 1 {
            checker.report(
                &s[1].0,
                format!("class {l} is discharged more than once"),
            );
        }
        if !occurrences.contains_key(l) {
            checker.report(
                &s[0].0,
                format!("class {l} is discharged but has no occurrences"),
            );
        }
    }

    // Scope: occurrences of a discharged class lie in the keyed subtree.
    for (l, s) in &sites {
        let (site_path, group) = &s[0];
        if let Some(sub) = d.at_path(site_path) {
            if let Some(n) = sub.as_node() {
                if let Some(&slot) = n.rule.discharge_slots().get(*group) {
                    let mut prefix = site_path.clone();
                    prefix.push(slot);
                    for occ in occurrences.get(l).into_iter().flatten() {
                        if !occ.starts_with(&prefix) {
                            checker.report(
                                occ,
                                format!(
                                    "occurrence of class {l} outside the premise above which it is discharged"
                                ),
                            );
                        }
                    }
                }
            }
        }
    }

    // Duplicate listings within one application.
    let mut by_node: BTreeMap<Vec<usize>, BTreeSet<u32>> = BTreeMap::new();
    for (path, _, l, _) in &listings {
        if !by_node.entry(path.clone()).or_default().insert(*l) {
            checker.report(path, format!("class {l} listed twice at one application"));
        }
    }

    let conclusion = checker.check_node(d, &mut Vec::new());

    let discharged: BTreeSet<u32> = sites.keys().copied().collect();
    let open_assumptions = leaves
        .into_iter()
        .filter(|(_, l, _)| !discharged.contains(l))
        .map(|(_, l, f)| (l, f))
        .collect();

    CheckReport {
        valid: checker.diagnostics.is_empty(),
        conclusion,
        open_assumptions,
        diagnostics: checker.diagnostics,
    }
}
