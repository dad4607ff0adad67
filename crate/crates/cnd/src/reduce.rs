//! Reduction procedures and the normalization driver.
//!
//! A deduction fails to be normal in one of two ways. A *maximal formula*
//! is an assumption that is discharged as the major of an introduction or
//! of Tarski's rule and at the same time consumed as the major premise of
//! an elimination; the detour reductions in this module remove them, one
//! connective each. A *maximal segment* is a chain of occurrences of one
//! formula running through arbitrary premises into the major premise of an
//! elimination; the permutative reduction shortens them by pushing the
//! elimination upwards past the rule concluding the segment. [`normalize`]
//! applies both kinds in an order that strictly decreases the rank until
//! the deduction is normal.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::analysis::{
    self, is_normal, maximal_formulas, maximal_segments, rank, OccurrencePath, Rank,
};
use crate::deduction::{check, node, Deduction, NodeData, RuleId, System};
use crate::logic::{instance_witness, Formula, Name, Term};
use crate::transform::{clean_vacuous, to_unique_discharge};

/// The ways a deduction can fail to be normal, each paired with the
/// reduction that removes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RedexKind {
    /// Conjunction discharged by `andI` and consumed by `andE`.
    DetourAnd,
    /// Disjunction discharged by `orIL` or `orIR` and consumed by `orE`.
    DetourOr,
    /// Implication discharged by `impI` and consumed by `impE`.
    DetourImp,
    /// Implication discharged by Tarski's rule and consumed by `impE`.
    DetourTr,
    /// Negation discharged by `notI` and consumed by `notE`.
    DetourNot,
    /// Existential discharged by `exI` and consumed by `exE`.
    DetourEx,
    /// A maximal segment, tagged with the rule concluding the segment and
    /// the elimination at its sink.
    Permute(RuleId, RuleId),
}

/// A reducible spot: the occurrence path of the offending major premise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Redex {
    pub kind: RedexKind,
    pub site: OccurrencePath,
}

/// One committed step of the normalization strategy.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub redex: Redex,
    pub rank_before: Rank,
    pub rank_after: Rank,
    pub size_before: usize,
    pub size_after: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReduceError {
    /// The site does not match the schema of the requested reduction.
    #[error("no redex at {site:?}: {condition}")]
    SchemaMismatch { site: Vec<usize>, condition: String },
    /// An eigenparameter is shared between applications, so substituting
    /// for it would rewrite formulas it does not belong to.
    #[error(
        "eigenparameter {name} is reused inside the side deduction at {site:?}; \
         rename parameters first"
    )]
    SharedParameter { site: Vec<usize>, name: Name },
}

fn mismatch(site: &[usize], condition: impl Into<String>) -> ReduceError {
    ReduceError::SchemaMismatch {
        site: site.to_vec(),
        condition: condition.into(),
    }
}

/// The elimination whose major premise the site addresses.
fn elim_at<'a>(
    d: &'a Deduction,
    site: &[usize],
) -> Result<(&'a NodeData, Vec<usize>), ReduceError> {
    if site.last() != Some(&0) {
        return Err(mismatch(
            site,
            "the site must address the major premise of an elimination",
        ));
    }
    let elim_path = site[..site.len() - 1].to_vec();
    let n = d
        .at_path(&elim_path)
        .and_then(Deduction::as_node)
        .ok_or_else(|| mismatch(site, "no rule application below the site"))?;
    if !n.rule.is_elim() {
        return Err(mismatch(site, format!("{} is not an elimination", n.rule)));
    }
    Ok((n, elim_path))
}

/// A validated detour: the discharging application, the elimination that
/// consumes the discharged assumption, and how they are positioned.
struct Detour<'a> {
    intro: &'a NodeData,
    intro_path: Vec<usize>,
    /// Premise slot of the intro that the discharged class is keyed to.
    slot: usize,
    elim: &'a NodeData,
    /// Path of the elimination relative to `intro.premises[slot]`.
    rel: Vec<usize>,
}

fn detour_at<'a>(
    d: &'a Deduction,
    site: &[usize],
    intro_rules: &[RuleId],
    elim_rule: RuleId,
) -> Result<Detour<'a>, ReduceError> {
    let (elim, elim_path) = elim_at(d, site)?;
    if elim.rule != elim_rule {
        return Err(mismatch(
            site,
            format!("the consuming elimination is {}, not {}", elim.rule, elim_rule),
        ));
    }
    let label = match elim.premises.first() {
        Some(Deduction::Leaf { label, .. }) => *label,
        _ => return Err(mismatch(site, "the major premise is not an assumption")),
    };
    let dischargers = analysis::discharger_map(d);
    let Some((intro_path, group, rule)) = dischargers.get(&label) else {
        return Err(mismatch(site, "the major premise is an open assumption"));
    };
    if rule.major_group() != Some(*group) {
        return Err(mismatch(
            site,
            format!("class {label} is not discharged as the major of {rule}"),
        ));
    }
    if !intro_rules.contains(rule) {
        return Err(mismatch(
            site,
            format!("class {label} is discharged by {rule}, which this reduction does not cover"),
        ));
    }
    let slot = rule.discharge_slots()[*group];
    let reachable = site.len() > intro_path.len()
        && site[..intro_path.len()] == intro_path[..]
        && site[intro_path.len()] == slot;
    if !reachable {
        return Err(mismatch(
            site,
            "the consumed assumption does not stand above its discharging application",
        ));
    }
    let intro = d
        .at_path(intro_path)
        .and_then(Deduction::as_node)
        .expect("discharge listings address rule applications");
    if intro.discharges[*group].len() != 1 {
        return Err(mismatch(
            site,
            format!(
                "the discharging application lists {} major classes; \
                 expand to unique-discharge form first",
                intro.discharges[*group].len()
            ),
        ));
    }
    let occurrences = intro.premises[slot]
        .leaves()
        .iter()
        .filter(|(_, l, _)| *l == label)
        .count();
    if occurrences != 1 {
        return Err(mismatch(
            site,
            format!(
                "class {label} has {occurrences} occurrences; \
                 expand to unique-discharge form first"
            ),
        ));
    }
    let rel = elim_path[intro_path.len() + 1..].to_vec();
    Ok(Detour {
        intro,
        intro_path: intro_path.clone(),
        slot,
        elim,
        rel,
    })
}

/// Replaces every occurrence of the mapped classes with a copy of the
/// corresponding deduction. The first copy drawn from each source keeps its
/// labels; later copies freshen the classes discharged inside the source,
/// so no class ends up with two discharging applications. Classes
/// discharged outside the source keep their labels in every copy and stay
/// shared.
fn graft(
    target: &Deduction,
    map: &BTreeMap<u32, (usize, Deduction)>,
    next: &mut u32,
) -> Deduction {
    let mut spent: BTreeSet<usize> = BTreeSet::new();
    graft_walk(target, map, next, &mut spent)
}

fn graft_walk(
    d: &Deduction,
    map: &BTreeMap<u32, (usize, Deduction)>,
    next: &mut u32,
    spent: &mut BTreeSet<usize>,
) -> Deduction {
    match d {
        Deduction::Leaf { label, .. } => match map.get(label) {
            Some((source, repl)) if spent.insert(*source) => repl.clone(),
            Some((_, repl)) => freshen_discharged(repl, next),
            None => d.clone(),
        },
        Deduction::Node(n) => node(
            n.rule,
            n.premises
                .iter()
                .map(|p| graft_walk(p, map, next, spent))
                .collect(),
            n.discharges.clone(),
            n.eigen.clone(),
            n.concl.clone(),
        ),
    }
}

/// A copy of `d` in which every class discharged inside it gets a fresh
/// label.
fn freshen_discharged(d: &Deduction, next: &mut u32) -> Deduction {
    let mut map = BTreeMap::new();
    for (_, _, label, _) in d.discharge_listings() {
        map.entry(label).or_insert_with(|| alloc(next));
    }
    d.relabel(&map)
}

fn alloc(next: &mut u32) -> u32 {
    let l = *next;
    *next += 1;
    l
}

/// Replaces the elimination inside the intro's keyed subtree, then the
/// whole introduction by that subtree, and cleans up any discharge left
/// without occurrences by dropped material.
fn splice(d: &Deduction, det: &Detour, replacement: Deduction) -> Deduction {
    let new_keyed = det.intro.premises[det.slot].replace_at(&det.rel, replacement);
    clean_vacuous(&d.replace_at(&det.intro_path, new_keyed))
}

/// Removes a conjunction detour: each specific premise of the introduction
/// is grafted onto the occurrences of the matching class discharged by the
/// elimination, and both applications disappear.
pub fn reduce_and(d: &Deduction, site: &[usize]) -> Result<Deduction, ReduceError> {
    let det = detour_at(d, site, &[RuleId::AndI], RuleId::AndE)?;
    let mut next = d.fresh_label();
    let mut map = BTreeMap::new();
    for (side, group) in det.elim.discharges.iter().enumerate() {
        for (l, _) in group {
            map.insert(*l, (side, det.intro.premises[side].clone()));
        }
    }
    let replacement = graft(&det.elim.premises[1], &map, &mut next);
    Ok(splice(d, &det, replacement))
}

/// Removes a disjunction detour: the introduced disjunct's deduction is
/// grafted into the matching arm of the elimination and the other arm is
/// dropped.
pub fn reduce_or(d: &Deduction, site: &[usize]) -> Result<Deduction, ReduceError> {
    let det = detour_at(d, site, &[RuleId::OrIL, RuleId::OrIR], RuleId::OrE)?;
    let (arm, group) = if det.intro.rule == RuleId::OrIL {
        (1, 0)
    } else {
        (2, 1)
    };
    let mut next = d.fresh_label();
    let mut map = BTreeMap::new();
    for (l, _) in &det.elim.discharges[group] {
        map.insert(*l, (0, det.intro.premises[0].clone()));
    }
    let replacement = graft(&det.elim.premises[arm], &map, &mut next);
    Ok(splice(d, &det, replacement))
}

/// Removes an implication detour: the deduction of the consequent is
/// grafted onto the consequent class discharged by the elimination, whose
/// minor premise is dropped.
pub fn reduce_imp(d: &Deduction, site: &[usize]) -> Result<Deduction, ReduceError> {
    let det = detour_at(d, site, &[RuleId::ImpI], RuleId::ImpE)?;
    let mut next = d.fresh_label();
    let mut map = BTreeMap::new();
    for (l, _) in &det.elim.discharges[0] {
        map.insert(*l, (0, det.intro.premises[0].clone()));
    }
    let replacement = graft(&det.elim.premises[2], &map, &mut next);
    Ok(splice(d, &det, replacement))
}

/// Removes an existential detour: the side deduction of the elimination is
/// instantiated at the introduced witness, the specific premise is grafted
/// onto the instantiated class, and both applications disappear.
pub fn reduce_ex(d: &Deduction, site: &[usize]) -> Result<Deduction, ReduceError> {
    let det = detour_at(d, site, &[RuleId::ExI], RuleId::ExE)?;
    let eigen = det
        .elim
        .eigen
        .as_ref()
        .ok_or_else(|| mismatch(site, "the elimination lacks an eigenparameter"))?;
    if eigen_reused(&det.elim.premises[1], eigen) {
        return Err(ReduceError::SharedParameter {
            site: site.to_vec(),
            name: eigen.clone(),
        });
    }
    let group = det
        .intro
        .rule
        .major_group()
        .expect("the validated discharger has a major group");
    let class = &det.intro.discharges[group][0].1;
    let Formula::Exists(var, body) = class else {
        return Err(mismatch(site, "the discharged class is not an existential"));
    };
    let instance = det.intro.premises[0]
        .conclusion()
        .ok_or_else(|| mismatch(site, "the specific premise has no conclusion"))?;
    let witness = instance_witness(body, var, &instance)
        .ok_or_else(|| mismatch(site, "the specific premise is not an instance of the class"))?;
    let side = match witness {
        Some(t) => det.elim.premises[1].subst_param(eigen, &t),
        None => det.elim.premises[1].clone(),
    };
    let mut next = d.fresh_label();
    let mut map = BTreeMap::new();
    for (l, _) in &det.elim.discharges[0] {
        map.insert(*l, (0, det.intro.premises[0].clone()));
    }
    let replacement = graft(&side, &map, &mut next);
    Ok(splice(d, &det, replacement))
}

fn eigen_reused(d: &Deduction, name: &str) -> bool {
    match d {
        Deduction::Leaf { .. } => false,
        Deduction::Node(n) => {
            n.eigen.as_deref() == Some(name) || n.premises.iter().any(|p| eigen_reused(p, name))
        }
    }
}

/// Removes a detour through Tarski's rule: the minor premise of the
/// consuming `impE` is grafted onto the antecedent classes in the rule's
/// first arbitrary premise, and the applications standing below the `impE`
/// that discharge into that minor premise are rebuilt below the result by
/// [`build_xi_star`].
pub fn reduce_tr(d: &Deduction, site: &[usize]) -> Result<Deduction, ReduceError> {
    reduce_minor_detour(d, site, RuleId::Tr, RuleId::ImpE)
}

/// Removes a negation detour: like [`reduce_tr`], with the minor premise of
/// the consuming `notE` grafted onto the discharged classes of the first
/// arbitrary premise of `notI`.
pub fn reduce_not(d: &Deduction, site: &[usize]) -> Result<Deduction, ReduceError> {
    reduce_minor_detour(d, site, RuleId::NotI, RuleId::NotE)
}

fn reduce_minor_detour(
    d: &Deduction,
    site: &[usize],
    intro_rule: RuleId,
    elim_rule: RuleId,
) -> Result<Deduction, ReduceError> {
    let det = detour_at(d, site, &[intro_rule], elim_rule)?;
    let pi1 = &det.elim.premises[1];
    let mut next = d.fresh_label();
    let mut map = BTreeMap::new();
    for (l, _) in &det.intro.discharges[0] {
        map.insert(*l, (0, pi1.clone()));
    }
    let spine = graft(&det.intro.premises[0], &map, &mut next);
    let spine = build_xi_star(&det.intro.premises[1], &det.rel, pi1, spine, &mut next);
    Ok(clean_vacuous(&d.replace_at(&det.intro_path, spine)))
}

/// Rebuilds below `spine` the applications of `xi` that discharge
/// assumptions occurring in `pi1`, from the one nearest the consumed
/// elimination (at `elim_rel` within `xi`) downwards.
///
/// Each such application is re-applied with its original major, minor and
/// specific premises; its conclusion becomes the conclusion of `spine`. The
/// premise through which the elimination was reached becomes the spine
/// built so far. Any other arbitrary premise becomes the rest of `xi`
/// below the application appended to that premise's own subdeduction, with
/// its classes freshened and the applications that discharge nothing inside
/// it cleaned away.
pub fn build_xi_star(
    xi: &Deduction,
    elim_rel: &[usize],
    pi1: &Deduction,
    spine: Deduction,
    next: &mut u32,
) -> Deduction {
    let pi1_labels: BTreeSet<u32> = pi1.leaves().into_iter().map(|(_, l, _)| l).collect();
    let mut spine = Some(spine);
    for depth in (0..elim_rel.len()).rev() {
        let npath = &elim_rel[..depth];
        let entered = elim_rel[depth];
        let n = xi
            .at_path(npath)
            .and_then(Deduction::as_node)
            .expect("prefixes of a node path address nodes");
        let slots = n.rule.discharge_slots();
        let carries = n.discharges.iter().enumerate().any(|(g, pairs)| {
            slots.get(g) == Some(&entered) && pairs.iter().any(|(l, _)| pi1_labels.contains(l))
        });
        if !carries {
            continue;
        }
        let arbs = n.rule.arb_slots();
        let mut premises = Vec::with_capacity(n.premises.len());
        for (j, p) in n.premises.iter().enumerate() {
            if j == entered {
                premises.push(spine.take().expect("the spine threads through one slot"));
            } else if arbs.contains(&j) {
                let frag = freshen_discharged(&xi.replace_at(npath, p.clone()), next);
                premises.push(clean_vacuous(&frag));
            } else {
                premises.push(p.clone());
            }
        }
        spine = Some(node(
            n.rule,
            premises,
            n.discharges.clone(),
            n.eigen.clone(),
            n.concl.clone(),
        ));
    }
    spine.expect("the spine is threaded through every rebuilt application")
}

/// Shortens a maximal segment by one step. The elimination at the sink is
/// copied onto each arbitrary premise of the rule concluding the segment;
/// when that rule is `notE`, which can conclude anything, the elimination
/// is instead deleted and the `notE` re-concludes each assumption the
/// elimination discharged into its first side deduction.
pub fn permute(d: &Deduction, site: &[usize]) -> Result<Deduction, ReduceError> {
    let (elim, elim_path) = elim_at(d, site)?;
    let feeder = match &elim.premises[0] {
        Deduction::Node(n) => n,
        Deduction::Leaf { .. } => {
            return Err(mismatch(
                site,
                "the major premise is an assumption; apply the matching detour reduction",
            ));
        }
    };
    let mut next = d.fresh_label();
    let new_sub = if feeder.rule == RuleId::NotE {
        permute_past_negation(site, elim, feeder, &mut next)?
    } else {
        let arbs = feeder.rule.arb_slots();
        if arbs.is_empty() {
            return Err(mismatch(
                site,
                format!("{} has no arbitrary premises to permute into", feeder.rule),
            ));
        }
        if feeder.rule.has_explicit_conclusion() {
            return Err(mismatch(
                site,
                format!("{} fixes its conclusion; translate conventional rules first", feeder.rule),
            ));
        }
        let mut used = d.all_names();
        let mut premises = Vec::with_capacity(feeder.premises.len());
        let mut first = true;
        for (j, p) in feeder.premises.iter().enumerate() {
            if arbs.contains(&j) {
                premises.push(copy_elim_onto(elim, p.clone(), first, &mut next, &mut used));
                first = false;
            } else {
                premises.push(p.clone());
            }
        }
        node(
            feeder.rule,
            premises,
            feeder.discharges.clone(),
            feeder.eigen.clone(),
            feeder.concl.clone(),
        )
    };
    Ok(clean_vacuous(&d.replace_at(&elim_path, new_sub)))
}

/// The elimination applied to `major` instead of its original major
/// premise. The first copy keeps its labels and eigenparameter; later
/// copies freshen both.
fn copy_elim_onto(
    elim: &NodeData,
    major: Deduction,
    first: bool,
    next: &mut u32,
    used: &mut BTreeSet<Name>,
) -> Deduction {
    let mut rest: Vec<Deduction> = elim.premises[1..].to_vec();
    let mut discharges = elim.discharges.clone();
    let mut eigen = elim.eigen.clone();
    if !first {
        let mut map = BTreeMap::new();
        for group in &discharges {
            for (l, _) in group {
                map.entry(*l).or_insert_with(|| alloc(next));
            }
        }
        for p in &rest {
            for (_, _, l, _) in p.discharge_listings() {
                map.entry(l).or_insert_with(|| alloc(next));
            }
        }
        rest = rest.iter().map(|p| p.relabel(&map)).collect();
        discharges = discharges
            .iter()
            .map(|g| {
                g.iter()
                    .map(|(l, f)| (map.get(l).copied().unwrap_or(*l), f.clone()))
                    .collect()
            })
            .collect();
        if let Some(old) = eigen {
            let name = fresh_name(used);
            rest = rest
                .iter()
                .map(|p| p.subst_param(&old, &Term::Sym(name.clone())))
                .collect();
            eigen = Some(name);
        }
    }
    let mut premises = vec![major];
    premises.extend(rest);
    node(elim.rule, premises, discharges, eigen, elim.concl.clone())
}

fn permute_past_negation(
    site: &[usize],
    elim: &NodeData,
    feeder: &NodeData,
    next: &mut u32,
) -> Result<Deduction, ReduceError> {
    let retarget = |f: &Formula| {
        node(
            RuleId::NotE,
            feeder.premises.clone(),
            Vec::new(),
            None,
            Some(f.clone()),
        )
    };
    let Some(slot) = elim.rule.first_arb_slot() else {
        // The sink fixes its own conclusion (`notE` or `botE`): the feeder
        // simply concludes it directly.
        let concl = elim
            .concl
            .clone()
            .ok_or_else(|| mismatch(site, "the elimination does not carry its conclusion"))?;
        return Ok(retarget(&concl));
    };
    let slots = elim.rule.discharge_slots();
    let mut map = BTreeMap::new();
    for (g, pairs) in elim.discharges.iter().enumerate() {
        if slots.get(g) != Some(&slot) {
            continue;
        }
        for (l, f) in pairs {
            map.insert(*l, (0, retarget(f)));
        }
    }
    Ok(graft(&elim.premises[slot], &map, next))
}

fn fresh_name(used: &mut BTreeSet<Name>) -> Name {
    (1..)
        .map(|i| format!("a{i}"))
        .find(|n| used.insert(n.clone()))
        .expect("some numbered name is unused")
}

/// Gives every application that binds an eigenparameter its own globally
/// fresh parameter, so that substituting for one can never rewrite material
/// belonging to another.
pub fn rename_eigens(d: &Deduction) -> Deduction {
    let mut used = d.all_names();
    rename_walk(d, &mut used)
}

fn rename_walk(d: &Deduction, used: &mut BTreeSet<Name>) -> Deduction {
    match d {
        Deduction::Leaf { .. } => d.clone(),
        Deduction::Node(n) => {
            let premises: Vec<Deduction> = n.premises.iter().map(|p| rename_walk(p, used)).collect();
            let rebuilt = node(
                n.rule,
                premises,
                n.discharges.clone(),
                n.eigen.clone(),
                n.concl.clone(),
            );
            match &n.eigen {
                None => rebuilt,
                Some(old) => {
                    let name = fresh_name(used);
                    match rebuilt.subst_param(old, &Term::Sym(name.clone())) {
                        Deduction::Node(m) => node(
                            m.rule,
                            m.premises.clone(),
                            m.discharges.clone(),
                            Some(name),
                            m.concl.clone(),
                        ),
                        Deduction::Leaf { .. } => unreachable!("substitution preserves shape"),
                    }
                }
            }
        }
    }
}

fn eigens_pairwise_distinct(d: &Deduction) -> bool {
    fn collect(d: &Deduction, out: &mut Vec<Name>) {
        if let Deduction::Node(n) = d {
            if let Some(e) = &n.eigen {
                out.push(e.clone());
            }
            for p in &n.premises {
                collect(p, out);
            }
        }
    }
    let mut names = Vec::new();
    collect(d, &mut names);
    let set: BTreeSet<&Name> = names.iter().collect();
    set.len() == names.len()
}

fn ensure_distinct_eigens(d: &Deduction) -> Deduction {
    if eigens_pairwise_distinct(d) {
        d.clone()
    } else {
        rename_eigens(d)
    }
}

fn detour_kind(rule: RuleId) -> Option<RedexKind> {
    match rule {
        RuleId::AndI => Some(RedexKind::DetourAnd),
        RuleId::OrIL | RuleId::OrIR => Some(RedexKind::DetourOr),
        RuleId::ImpI => Some(RedexKind::DetourImp),
        RuleId::Tr => Some(RedexKind::DetourTr),
        RuleId::NotI => Some(RedexKind::DetourNot),
        RuleId::ExI => Some(RedexKind::DetourEx),
        _ => None,
    }
}

/// Every reducible spot: a detour per maximal formula, a permutation per
/// maximal segment.
pub fn find_redexes(d: &Deduction) -> Vec<Redex> {
    let dischargers = analysis::discharger_map(d);
    let mut out = Vec::new();
    for site in maximal_formulas(d) {
        let label = match d.at_path(&site) {
            Some(Deduction::Leaf { label, .. }) => *label,
            _ => continue,
        };
        let Some((_, _, rule)) = dischargers.get(&label) else {
            continue;
        };
        let Some(kind) = detour_kind(*rule) else {
            continue;
        };
        out.push(Redex { kind, site });
    }
    let mut seen_sinks = std::collections::BTreeSet::new();
    for seg in maximal_segments(d) {
        let sink = seg.sink().clone();
        // Several chains may merge at one sink; the sink names one redex.
        if !seen_sinks.insert(sink.clone()) {
            continue;
        }
        let feeder = match d.at_path(&sink) {
            Some(Deduction::Node(n)) => n.rule,
            _ => continue,
        };
        let elim = d
            .at_path(&sink[..sink.len() - 1])
            .and_then(Deduction::as_node)
            .map(|n| n.rule)
            .expect("maximal segments sink at eliminations");
        out.push(Redex {
            kind: RedexKind::Permute(feeder, elim),
            site: sink,
        });
    }
    out
}

/// Applies the reduction matching the redex.
pub fn reduce_at(d: &Deduction, redex: &Redex) -> Result<Deduction, ReduceError> {
    match redex.kind {
        RedexKind::DetourAnd => reduce_and(d, &redex.site),
        RedexKind::DetourOr => reduce_or(d, &redex.site),
        RedexKind::DetourImp => reduce_imp(d, &redex.site),
        RedexKind::DetourTr => reduce_tr(d, &redex.site),
        RedexKind::DetourNot => reduce_not(d, &redex.site),
        RedexKind::DetourEx => reduce_ex(d, &redex.site),
        RedexKind::Permute(..) => permute(d, &redex.site),
    }
}

#[derive(Debug, Error)]
pub enum NormalizeError {
    /// Universal-quantifier rules are checked but deliberately left outside
    /// the reduction system.
    #[error(
        "universal-quantifier material at {path:?}: deductions using it can be \
         checked but not normalized"
    )]
    Universal { path: Vec<usize> },
    #[error("conventional introduction {rule} at {path:?}; translate to the general rules first")]
    Conventional { rule: RuleId, path: Vec<usize> },
    #[error("not a valid deduction: {message}")]
    Invalid { message: String },
    /// No applicable reduction strictly decreases the rank. This cannot
    /// happen for valid inputs; it indicates a defect in the reducer.
    #[error("step {step}: no reduction decreases the rank below {rank}")]
    Stuck { step: usize, rank: Rank },
    #[error("budget of {budget} steps exhausted before normal form")]
    Budget { budget: usize, trace: Vec<TraceStep> },
}

/// Default step budget for [`normalize`].
pub const DEFAULT_BUDGET: usize = 1_000_000;

fn formula_universal(f: &Formula) -> bool {
    match f {
        Formula::Forall(..) => true,
        Formula::Atom(..) | Formula::Bottom => false,
        Formula::Not(a) | Formula::Exists(_, a) => formula_universal(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            formula_universal(a) || formula_universal(b)
        }
    }
}

fn refusal_scan(d: &Deduction, path: &mut Vec<usize>) -> Result<(), NormalizeError> {
    match d {
        Deduction::Leaf { formula, .. } => {
            if formula_universal(formula) {
                return Err(NormalizeError::Universal { path: path.clone() });
            }
        }
        Deduction::Node(n) => {
            if matches!(n.rule, RuleId::AllI | RuleId::AllE) {
                return Err(NormalizeError::Universal { path: path.clone() });
            }
            if n.rule.is_conventional() {
                return Err(NormalizeError::Conventional {
                    rule: n.rule,
                    path: path.clone(),
                });
            }
            let listed = n.discharges.iter().flatten().map(|(_, f)| f);
            if listed.chain(n.concl.iter()).any(formula_universal) {
                return Err(NormalizeError::Universal { path: path.clone() });
            }
            for (i, p) in n.premises.iter().enumerate() {
                path.push(i);
                refusal_scan(p, path)?;
                path.pop();
            }
        }
    }
    Ok(())
}

fn redex_degree(d: &Deduction, r: &Redex) -> usize {
    d.at_path(&r.site)
        .and_then(Deduction::conclusion)
        .map(|f| f.degree())
        .unwrap_or(0)
}

/// Highest degree first; at equal degree segments before detours, then
/// innermost sites first, leftmost on ties.
fn order_candidates(d: &Deduction, out: &mut [Redex]) {
    out.sort_by_key(|r| {
        let class = usize::from(!matches!(r.kind, RedexKind::Permute(..)));
        (
            Reverse(redex_degree(d, r)),
            class,
            Reverse(r.site.len()),
            r.site.clone(),
        )
    });
}

/// Reduces to normal form, recording one trace entry per committed step.
///
/// The deduction is first brought to unique-discharge form with every
/// eigenparameter distinct. Each step then applies one reduction, cleans
/// vacuous applications, restores unique discharge and distinct parameters,
/// and must strictly decrease the rank; candidates are tried in the order
/// of [`order_candidates`] until one does.
pub fn normalize(
    d: &Deduction,
    budget: usize,
) -> Result<(Deduction, Vec<TraceStep>), NormalizeError> {
    refusal_scan(d, &mut Vec::new())?;
    let report = check(d, System::CEx);
    if !report.valid {
        let message = report
            .diagnostics
            .first()
            .map(ToString::to_string)
            .unwrap_or_else(|| "no diagnostics".into());
        return Err(NormalizeError::Invalid { message });
    }
    let conclusion = report.conclusion.expect("valid deductions conclude");
    let mut cur = ensure_distinct_eigens(&to_unique_discharge(&clean_vacuous(d)));
    let mut trace = Vec::new();
    loop {
        if is_normal(&cur) {
            return Ok((cur, trace));
        }
        if trace.len() >= budget {
            return Err(NormalizeError::Budget { budget, trace });
        }
        let before = rank(&cur);
        let size_before = cur.size();
        let mut candidates = find_redexes(&cur);
        order_candidates(&cur, &mut candidates);
        let mut committed = None;
        for redex in candidates {
            let Ok(reduced) = reduce_at(&cur, &redex) else {
                continue;
            };
            let step = ensure_distinct_eigens(&to_unique_discharge(&reduced));
            let after = rank(&step);
            if after >= before {
                continue;
            }
            let report = check(&step, System::CEx);
            if !report.valid || report.conclusion.as_ref() != Some(&conclusion) {
                continue;
            }
            trace.push(TraceStep {
                redex,
                rank_before: before,
                rank_after: after,
                size_before,
                size_after: step.size(),
            });
            committed = Some(step);
            break;
        }
        match committed {
            Some(step) => cur = step,
            None => {
                return Err(NormalizeError::Stuck {
                    step: trace.len(),
                    rank: before,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::eq_mod_labels;
    use crate::syntax::parse_deduction;

    const AND_DETOUR: &str = "(andI (assume 5 (at p)) (assume 6 (at q)) \
         (andE (assume 1 (and (at p) (at q))) (assume 2 (at p)) \
          (dis (2 (at p))) (dis)) \
         (dis (1 (and (at p) (at q)))))";

    const DERIVED_IMP_INTRO: &str = "(tr (impI (notE (assume 9 (not (at p))) (assume 2 (at p)) (at q)) \
          (assume 1 (imp (at p) (at q))) (dis (1 (imp (at p) (at q))))) \
         (assume 3 (imp (at p) (at q))) \
         (dis (2 (at p))) (dis (3 (imp (at p) (at q)))))";

    const OR_PERM: &str = "(orE (orE (assume 5 (or (or (at c) (at d)) (or (at c) (at d)))) \
          (assume 1 (or (at c) (at d))) (assume 2 (or (at c) (at d))) \
          (dis (1 (or (at c) (at d)))) (dis (2 (or (at c) (at d))))) \
         (assume 3 (at c)) \
         (notE (assume 6 (not (at d))) (assume 4 (at d)) (at c)) \
         (dis (3 (at c))) (dis (4 (at d))))";

    fn parse(src: &str) -> Deduction {
        parse_deduction(src).expect("test deduction parses")
    }

    fn assert_valid(d: &Deduction) {
        let report = check(d, System::CEx);
        assert!(report.valid, "diagnostics: {:?}", report.diagnostics);
    }

    fn elim_majors_are_assumptions(d: &Deduction) -> bool {
        match d {
            Deduction::Leaf { .. } => true,
            Deduction::Node(n) => {
                let own = !n.rule.is_elim() || n.premises[0].is_leaf();
                own && n.premises.iter().all(elim_majors_are_assumptions)
            }
        }
    }

    #[test]
    fn conjunction_detour_collapses_to_the_specific_premise() {
        let d = parse(AND_DETOUR);
        let redexes = find_redexes(&d);
        assert_eq!(redexes.len(), 1);
        assert_eq!(redexes[0].kind, RedexKind::DetourAnd);
        assert_eq!(redexes[0].site, vec![2, 0]);
        let reduced = reduce_and(&d, &redexes[0].site).unwrap();
        assert_eq!(reduced, parse("(assume 5 (at p))"));
    }

    #[test]
    fn disjunction_detour_duplicates_the_specific_premise() {
        let d = parse(
            "(orIL (orE (assume 8 (or (at p) (at p))) (assume 9 (at p)) (assume 10 (at p)) \
              (dis (9 (at p))) (dis (10 (at p)))) \
             (orE (assume 1 (or (at p) (at q))) \
              (andI (assume 2 (at p)) (assume 2 (at p)) \
               (assume 11 (and (at p) (at p))) (dis (11 (and (at p) (at p))))) \
              (notE (assume 12 (not (at q))) (assume 3 (at q)) (and (at p) (at p))) \
              (dis (2 (at p))) (dis (3 (at q)))) \
             (dis (1 (or (at p) (at q)))))",
        );
        assert_valid(&d);
        let reduced = reduce_or(&d, &[1, 0]).unwrap();
        // The disjunct's deduction is copied onto both occurrences of the
        // discharged class; the copy's internal classes are freshened while
        // its open assumption 8 stays shared.
        let expected = parse(
            "(andI (orE (assume 8 (or (at p) (at p))) (assume 9 (at p)) (assume 10 (at p)) \
              (dis (9 (at p))) (dis (10 (at p)))) \
             (orE (assume 8 (or (at p) (at p))) (assume 13 (at p)) (assume 14 (at p)) \
              (dis (13 (at p))) (dis (14 (at p)))) \
             (assume 11 (and (at p) (at p))) (dis (11 (and (at p) (at p)))))",
        );
        assert_eq!(reduced, expected);
        assert_valid(&reduced);
    }

    #[test]
    fn implication_detour_splices_the_consequent_deduction() {
        let d = parse(
            "(impI (assume 5 (at q)) \
             (impE (assume 1 (imp (at p) (at q))) (assume 6 (at p)) (assume 2 (at q)) \
              (dis (2 (at q)))) \
             (dis (1 (imp (at p) (at q)))))",
        );
        assert_valid(&d);
        let reduced = reduce_imp(&d, &[1, 0]).unwrap();
        assert_eq!(reduced, parse("(assume 5 (at q))"));

        // The same detour with further material below the elimination: only
        // the elimination and the introduction disappear.
        let lower = parse(
            "(impI (assume 5 (at q)) \
             (andI (impE (assume 1 (imp (at p) (at q))) (assume 6 (at p)) (assume 2 (at q)) \
               (dis (2 (at q)))) \
              (assume 7 (at q)) \
              (assume 8 (and (at q) (at q))) (dis (8 (and (at q) (at q))))) \
             (dis (1 (imp (at p) (at q)))))",
        );
        assert_valid(&lower);
        let reduced = reduce_imp(&lower, &[1, 0, 0]).unwrap();
        let expected = parse(
            "(andI (assume 5 (at q)) (assume 7 (at q)) \
             (assume 8 (and (at q) (at q))) (dis (8 (and (at q) (at q)))))",
        );
        assert_eq!(reduced, expected);
        assert_valid(&reduced);
    }

    #[test]
    fn tarski_detour_rebuilds_the_discharging_application() {
        // The conjunction elimination below the consumed implication
        // discharges an assumption standing in the minor premise, so it is
        // re-applied below the grafted first side.
        let d = parse(
            "(tr (notE (assume 11 (not (at p))) (assume 2 (at p)) (at q)) \
             (andE (assume 10 (and (at s) (at v))) \
              (impE (assume 3 (imp (at p) (at q))) \
               (notE (assume 7 (not (at s))) (assume 9 (at s)) (at p)) \
               (assume 4 (at q)) (dis (4 (at q)))) \
              (dis (9 (at s))) (dis)) \
             (dis (2 (at p))) (dis (3 (imp (at p) (at q)))))",
        );
        assert_valid(&d);
        let reduced = reduce_tr(&d, &[1, 1, 0]).unwrap();
        let expected = parse(
            "(andE (assume 10 (and (at s) (at v))) \
             (notE (assume 11 (not (at p))) \
              (notE (assume 7 (not (at s))) (assume 9 (at s)) (at p)) \
              (at q)) \
             (dis (9 (at s))) (dis))",
        );
        assert_eq!(reduced, expected);
        assert_valid(&reduced);
    }

    #[test]
    fn negation_detour_matches_the_disjunction_elimination_shape() {
        // The consumed negation elimination sits in the left arm of a
        // disjunction elimination: the reduct re-applies that elimination
        // with the left arm replaced by the grafted first side and the
        // right arm continued by the applications below it.
        let d = parse(
            "(notI (notE (assume 10 (not (at a))) (assume 3 (at a)) (at f)) \
             (notE (assume 9 (not (at c))) \
              (orE (assume 5 (or (at b) (at e))) \
               (notE (assume 4 (not (at a))) \
                (notE (assume 6 (not (at b))) (assume 1 (at b)) (at a)) \
                (at c)) \
               (notE (assume 7 (not (at e))) (assume 2 (at e)) (at c)) \
               (dis (1 (at b))) (dis (2 (at e)))) \
              (at f)) \
             (dis (3 (at a))) (dis (4 (not (at a)))))",
        );
        assert_valid(&d);
        let reduced = reduce_not(&d, &[1, 1, 1, 0]).unwrap();
        let expected = parse(
            "(orE (assume 5 (or (at b) (at e))) \
             (notE (assume 10 (not (at a))) \
              (notE (assume 6 (not (at b))) (assume 1 (at b)) (at a)) \
              (at f)) \
             (notE (assume 9 (not (at c))) \
              (notE (assume 7 (not (at e))) (assume 2 (at e)) (at c)) \
              (at f)) \
             (dis (1 (at b))) (dis (2 (at e))))",
        );
        assert_eq!(reduced, expected);
        assert_valid(&reduced);
    }

    #[test]
    fn tarski_inside_the_major_side_is_reapplied_below() {
        // Tarski's rule itself discharges into the minor premise of the
        // consumed elimination; its re-application keeps the major side and
        // appends the applications below it, with the class discharged
        // inside that fragment freshened.
        let d = parse(
            "(notI (notE (assume 10 (not (at a))) (assume 3 (at a)) (at f)) \
             (notE (assume 8 (not (at w))) \
              (tr (notE (assume 9 (not (at c))) \
                (notE (assume 4 (not (at a))) \
                 (notE (assume 6 (not (at b))) (assume 1 (at b)) (at a)) \
                 (at c)) \
                (at w)) \
               (impE (assume 2 (imp (at b) (at e))) (assume 12 (at b)) \
                (notE (assume 14 (not (at e))) (assume 13 (at e)) (at w)) \
                (dis (13 (at e)))) \
               (dis (1 (at b))) (dis (2 (imp (at b) (at e))))) \
              (at f)) \
             (dis (3 (at a))) (dis (4 (not (at a)))))",
        );
        assert_valid(&d);
        let reduced = reduce_not(&d, &[1, 1, 0, 1, 0]).unwrap();
        let expected = parse(
            "(tr (notE (assume 10 (not (at a))) \
              (notE (assume 6 (not (at b))) (assume 1 (at b)) (at a)) \
              (at f)) \
             (notE (assume 8 (not (at w))) \
              (impE (assume 2 (imp (at b) (at e))) (assume 12 (at b)) \
               (notE (assume 14 (not (at e))) (assume 15 (at e)) (at w)) \
               (dis (15 (at e)))) \
              (at f)) \
             (dis (1 (at b))) (dis (2 (imp (at b) (at e)))))",
        );
        assert_eq!(reduced, expected);
        assert_valid(&reduced);
    }

    #[test]
    fn existential_detour_substitutes_the_witness() {
        let d = parse(
            "(exI (notE (assume 6 (not (at q))) (assume 7 (at q)) (at P c)) \
             (exE (assume 1 (ex x (at P x))) \
              (exI (assume 2 (at P a)) (assume 10 (ex y (at P y))) \
               (dis (10 (ex y (at P y))))) \
              (dis (2 (at P a))) (eigen a)) \
             (dis (1 (ex x (at P x)))))",
        );
        assert_valid(&d);
        let reduced = reduce_ex(&d, &[1, 0]).unwrap();
        let expected = parse(
            "(exI (notE (assume 6 (not (at q))) (assume 7 (at q)) (at P c)) \
             (assume 10 (ex y (at P y))) (dis (10 (ex y (at P y)))))",
        );
        assert_eq!(reduced, expected);
        assert_valid(&reduced);
    }

    #[test]
    fn existential_detour_requires_distinct_parameters() {
        // The side deduction contains another application binding the same
        // parameter, so substituting the witness would corrupt it.
        let d = parse(
            "(exI (assume 5 (at P c)) \
             (exE (assume 1 (ex x (at P x))) \
              (exE (assume 3 (ex y (at Q y))) (assume 2 (at P a)) \
               (dis (4 (at Q a))) (eigen a)) \
              (dis (2 (at P a))) (eigen a)) \
             (dis (1 (ex x (at P x)))))",
        );
        let err = reduce_ex(&d, &[1, 0]).unwrap_err();
        assert!(matches!(err, ReduceError::SharedParameter { name, .. } if name == "a"));
    }

    #[test]
    fn permutation_pushes_the_elimination_into_both_arms() {
        let d = parse(OR_PERM);
        assert_valid(&d);
        let redexes = find_redexes(&d);
        assert_eq!(redexes.len(), 1);
        assert_eq!(
            redexes[0].kind,
            RedexKind::Permute(RuleId::OrE, RuleId::OrE)
        );
        let reduced = permute(&d, &[0]).unwrap();
        let expected = parse(
            "(orE (assume 5 (or (or (at c) (at d)) (or (at c) (at d)))) \
             (orE (assume 1 (or (at c) (at d))) (assume 3 (at c)) \
              (notE (assume 6 (not (at d))) (assume 4 (at d)) (at c)) \
              (dis (3 (at c))) (dis (4 (at d)))) \
             (orE (assume 2 (or (at c) (at d))) (assume 7 (at c)) \
              (notE (assume 6 (not (at d))) (assume 8 (at d)) (at c)) \
              (dis (7 (at c))) (dis (8 (at d)))) \
             (dis (1 (or (at c) (at d)))) (dis (2 (or (at c) (at d)))))",
        );
        assert_eq!(reduced, expected);
        assert_valid(&reduced);
        assert!(is_normal(&reduced));
    }

    #[test]
    fn negation_conclusion_segments_retarget_the_negation_elimination() {
        // A negation elimination concluding a disjunction that is
        // immediately eliminated: the disjunction elimination disappears
        // and the negation elimination concludes the assumption discharged
        // into the first arm instead.
        let d = parse(
            "(orE (notE (assume 1 (not (at a))) (assume 2 (at a)) (or (at b) (at c))) \
             (notE (assume 7 (not (at b))) (assume 3 (at b)) (at d)) \
             (notE (assume 8 (not (at c))) (assume 4 (at c)) (at d)) \
             (dis (3 (at b))) (dis (4 (at c))))",
        );
        assert_valid(&d);
        let reduced = permute(&d, &[0]).unwrap();
        let expected = parse(
            "(notE (assume 7 (not (at b))) \
             (notE (assume 1 (not (at a))) (assume 2 (at a)) (at b)) \
             (at d))",
        );
        assert_eq!(reduced, expected);
        assert_valid(&reduced);
        assert!(is_normal(&reduced));
    }

    #[test]
    fn negation_elimination_chains_collapse_to_one_application() {
        let fed_not = parse(
            "(notE (notE (assume 1 (not (at a))) (assume 2 (at a)) (not (at z))) \
             (assume 3 (at z)) (at y))",
        );
        assert_valid(&fed_not);
        let reduced = permute(&fed_not, &[0]).unwrap();
        assert_eq!(
            reduced,
            parse("(notE (assume 1 (not (at a))) (assume 2 (at a)) (at y))")
        );

        let fed_bot = parse(
            "(botE (notE (assume 1 (not (at a))) (assume 2 (at a)) (bot)) (at p))",
        );
        assert_valid(&fed_bot);
        let reduced = permute(&fed_bot, &[0]).unwrap();
        assert_eq!(
            reduced,
            parse("(notE (assume 1 (not (at a))) (assume 2 (at a)) (at p))")
        );
    }

    #[test]
    fn eigenparameters_become_pairwise_distinct() {
        let d = parse(
            "(andI (exE (assume 1 (ex x (at P x))) \
              (exI (assume 2 (at P a)) (assume 3 (ex y (at P y))) \
               (dis (3 (ex y (at P y))))) \
              (dis (2 (at P a))) (eigen a)) \
             (exE (assume 4 (ex x (at P x))) \
              (exI (assume 5 (at P a)) (assume 6 (ex y (at P y))) \
               (dis (6 (ex y (at P y))))) \
              (dis (5 (at P a))) (eigen a)) \
             (assume 7 (and (ex y (at P y)) (ex y (at P y)))) \
             (dis (7 (and (ex y (at P y)) (ex y (at P y))))))",
        );
        assert_valid(&d);
        let renamed = rename_eigens(&d);
        let expected = parse(
            "(andI (exE (assume 1 (ex x (at P x))) \
              (exI (assume 2 (at P a1)) (assume 3 (ex y (at P y))) \
               (dis (3 (ex y (at P y))))) \
              (dis (2 (at P a1))) (eigen a1)) \
             (exE (assume 4 (ex x (at P x))) \
              (exI (assume 5 (at P a2)) (assume 6 (ex y (at P y))) \
               (dis (6 (ex y (at P y))))) \
              (dis (5 (at P a2))) (eigen a2)) \
             (assume 7 (and (ex y (at P y)) (ex y (at P y)))) \
             (dis (7 (and (ex y (at P y)) (ex y (at P y))))))",
        );
        assert_eq!(renamed, expected);
        assert_valid(&renamed);
    }

    #[test]
    fn reduction_errors_name_the_failed_condition() {
        let open_major = parse(
            "(andE (assume 1 (and (at p) (at q))) (assume 2 (at p)) (dis (2 (at p))) (dis))",
        );
        let err = reduce_and(&open_major, &[0]).unwrap_err();
        assert!(err.to_string().contains("open assumption"), "{err}");

        let d = parse(DERIVED_IMP_INTRO);
        let err = reduce_and(&d, &[1]).unwrap_err();
        assert!(err.to_string().contains("major premise"), "{err}");

        // A discharging application listing two major classes must be
        // expanded before reducing.
        let wide = parse(
            "(andI (assume 5 (at p)) (assume 6 (at q)) \
             (andE (assume 1 (and (at p) (at q))) (assume 2 (at p)) \
              (dis (2 (at p))) (dis)) \
             (dis (1 (and (at p) (at q))) (9 (and (at p) (at q)))))",
        );
        let err = reduce_and(&wide, &[2, 0]).unwrap_err();
        assert!(err.to_string().contains("expand"), "{err}");
    }

    #[test]
    fn normalize_removes_a_conjunction_detour_in_one_step() {
        let d = parse(AND_DETOUR);
        let (normal, trace) = normalize(&d, DEFAULT_BUDGET).unwrap();
        assert_eq!(normal, parse("(assume 5 (at p))"));
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].redex.kind, RedexKind::DetourAnd);
        assert_eq!(trace[0].rank_before, Rank { d: 1, l: 1 });
        assert_eq!(trace[0].rank_after, Rank::ZERO);
    }

    #[test]
    fn normalize_leaves_normal_deductions_alone() {
        let d = parse(DERIVED_IMP_INTRO);
        let (normal, trace) = normalize(&d, DEFAULT_BUDGET).unwrap();
        assert!(trace.is_empty());
        assert_eq!(normal, d);
    }

    #[test]
    fn normalize_straightens_permutable_segments() {
        let d = parse(OR_PERM);
        let (normal, trace) = normalize(&d, DEFAULT_BUDGET).unwrap();
        assert_eq!(trace.len(), 1);
        assert!(matches!(trace[0].redex.kind, RedexKind::Permute(..)));
        assert!(is_normal(&normal));
        assert!(elim_majors_are_assumptions(&normal));
    }

    #[test]
    fn normalize_clears_nested_detours() {
        let d = parse(
            "(andI (andI (assume 5 (at p)) (assume 6 (at q)) \
              (andE (assume 1 (and (at p) (at q))) (assume 2 (at p)) \
               (dis (2 (at p))) (dis)) \
              (dis (1 (and (at p) (at q))))) \
             (assume 9 (at q)) \
             (andE (assume 3 (and (at p) (at q))) (assume 4 (at p)) \
              (dis (4 (at p))) (dis)) \
             (dis (3 (and (at p) (at q)))))",
        );
        assert_valid(&d);
        let (normal, trace) = normalize(&d, DEFAULT_BUDGET).unwrap();
        assert_eq!(normal, parse("(assume 5 (at p))"));
        assert_eq!(trace.len(), 2);
        for step in &trace {
            assert!(step.rank_after < step.rank_before);
        }
    }

    #[test]
    fn normalize_rejects_universal_quantifier_material() {
        let d = parse(
            "(allE (assume 1 (all x (at P x))) (assume 2 (at P c)) (dis (2 (at P c))))",
        );
        assert!(check(&d, System::CExAll).valid);
        let err = normalize(&d, DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(err, NormalizeError::Universal { .. }));

        let leaf_only = parse("(assume 1 (all x (at P x)))");
        let err = normalize(&leaf_only, DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(err, NormalizeError::Universal { .. }));
    }

    #[test]
    fn normalize_rejects_conventional_introductions() {
        let d = parse("(andIc (assume 1 (at p)) (assume 2 (at q)))");
        let err = normalize(&d, DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(
            err,
            NormalizeError::Conventional {
                rule: RuleId::AndIc,
                ..
            }
        ));
    }

    #[test]
    fn normalize_rejects_invalid_deductions() {
        let d = parse(
            "(andI (assume 1 (at p)) (assume 2 (at q)) (assume 3 (at r)) (dis (3 (at r))))",
        );
        let err = normalize(&d, DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(err, NormalizeError::Invalid { .. }));
    }

    #[test]
    fn exhausted_budgets_carry_the_partial_trace() {
        let d = parse(AND_DETOUR);
        let err = normalize(&d, 0).unwrap_err();
        match err {
            NormalizeError::Budget { budget, trace } => {
                assert_eq!(budget, 0);
                assert!(trace.is_empty());
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn normalization_battery_reaches_normal_form() {
        let sources = [
            AND_DETOUR,
            OR_PERM,
            "(orIL (orE (assume 8 (or (at p) (at p))) (assume 9 (at p)) (assume 10 (at p)) \
              (dis (9 (at p))) (dis (10 (at p)))) \
             (orE (assume 1 (or (at p) (at q))) \
              (andI (assume 2 (at p)) (assume 2 (at p)) \
               (assume 11 (and (at p) (at p))) (dis (11 (and (at p) (at p))))) \
              (notE (assume 12 (not (at q))) (assume 3 (at q)) (and (at p) (at p))) \
              (dis (2 (at p))) (dis (3 (at q)))) \
             (dis (1 (or (at p) (at q)))))",
            "(notI (notE (assume 10 (not (at a))) (assume 3 (at a)) (at f)) \
             (notE (assume 9 (not (at c))) \
              (orE (assume 5 (or (at b) (at e))) \
               (notE (assume 4 (not (at a))) \
                (notE (assume 6 (not (at b))) (assume 1 (at b)) (at a)) \
                (at c)) \
               (notE (assume 7 (not (at e))) (assume 2 (at e)) (at c)) \
               (dis (1 (at b))) (dis (2 (at e)))) \
              (at f)) \
             (dis (3 (at a))) (dis (4 (not (at a)))))",
            "(exI (notE (assume 6 (not (at q))) (assume 7 (at q)) (at P c)) \
             (exE (assume 1 (ex x (at P x))) \
              (exI (assume 2 (at P a)) (assume 10 (ex y (at P y))) \
               (dis (10 (ex y (at P y))))) \
              (dis (2 (at P a))) (eigen a)) \
             (dis (1 (ex x (at P x)))))",
        ];
        for src in sources {
            let d = parse(src);
            assert_valid(&d);
            let before = check(&d, System::CEx).conclusion.unwrap();
            let (normal, trace) = normalize(&d, DEFAULT_BUDGET).unwrap();
            assert!(is_normal(&normal), "not normal for {src}");
            assert!(elim_majors_are_assumptions(&normal));
            let report = check(&normal, System::CEx);
            assert!(report.valid);
            assert_eq!(report.conclusion.unwrap(), before);
            for pair in trace.windows(2) {
                assert!(pair[1].rank_before < pair[0].rank_before);
            }
            for step in &trace {
                assert!(step.rank_after < step.rank_before);
            }
        }
    }

    #[test]
    fn grafting_keeps_shared_classes_coherent() {
        // Equality up to relabeling must hold between the two side premise
        // copies after a disjunction reduction.
        let d = parse(
            "(orIL (orE (assume 8 (or (at p) (at p))) (assume 9 (at p)) (assume 10 (at p)) \
              (dis (9 (at p))) (dis (10 (at p)))) \
             (orE (assume 1 (or (at p) (at q))) \
              (andI (assume 2 (at p)) (assume 2 (at p)) \
               (assume 11 (and (at p) (at p))) (dis (11 (and (at p) (at p))))) \
              (notE (assume 12 (not (at q))) (assume 3 (at q)) (and (at p) (at p))) \
              (dis (2 (at p))) (dis (3 (at q)))) \
             (dis (1 (or (at p) (at q)))))",
        );
        let reduced = reduce_or(&d, &[1, 0]).unwrap();
        let n = reduced.as_node().unwrap();
        assert!(eq_mod_labels(&n.premises[0], &n.premises[1]));
        assert_ne!(n.premises[0], n.premises[1]);
    }
}
