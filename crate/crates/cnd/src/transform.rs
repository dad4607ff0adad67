//! Rewrites that change how a deduction is presented without changing what
//! it proves: removal of vacuous discharge, expansion to unique-discharge
//! form and its inverse, and translation between the general and the
//! conventional introduction rules.
//!
//! All operations preserve check-validity, the conclusion, and the set of
//! open assumption formulas. `clean_vacuous` is the identity on valid trees
//! and exists to tidy malformed input and the by-products of reductions.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::deduction::{
    check, eq_mod_labels, leaf, node, Deduction, NodeData, RuleId, System,
};
use crate::logic::Formula;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error(
        "introduction at {path:?} discharges {count} major occurrences; \
         expand to unique-discharge form first"
    )]
    NotUniqueDischarge { path: Vec<usize>, count: usize },
}

fn label_occurs(d: &Deduction, label: u32) -> bool {
    match d {
        Deduction::Leaf { label: l, .. } => *l == label,
        Deduction::Node(n) => n.premises.iter().any(|p| label_occurs(p, label)),
    }
}

fn next_label(next: &mut u32) -> u32 {
    let v = *next;
    *next += 1;
    v
}

/// Removes rule applications whose discharge above an arbitrary premise has
/// become empty, continuing the deduction straight from that premise.
/// Listed classes without any occurrence in their keyed premise subtree are
/// dropped first; if that empties every group keyed to some arbitrary slot,
/// the whole application is replaced by the subtree at that slot.
///
/// On checker-valid trees this is the identity, since the checker already
/// bans vacuous discharge above arbitrary premises. A single bottom-up pass
/// reaches a fixpoint, so the operation is idempotent, and it never grows
/// the tree.
pub fn clean_vacuous(d: &Deduction) -> Deduction {
    match d {
        Deduction::Leaf { .. } => d.clone(),
        Deduction::Node(n) => {
            let premises: Vec<Deduction> = n.premises.iter().map(clean_vacuous).collect();
            let slots = n.rule.discharge_slots();
            let discharges: Vec<Vec<(u32, Formula)>> = n
                .discharges
                .iter()
                .enumerate()
                .map(|(g, group)| {
                    group
                        .iter()
                        .filter(|(l, _)| match slots.get(g) {
                            Some(&s) => {
                                premises.get(s).is_some_and(|p| label_occurs(p, *l))
                            }
                            None => false,
                        })
                        .cloned()
                        .collect()
                })
                .collect();
            for s in n.rule.arb_slots() {
                let keyed: Vec<usize> = slots
                    .iter()
                    .enumerate()
                    .filter(|&(_, &k)| k == s)
                    .map(|(g, _)| g)
                    .collect();
                let all_empty = !keyed.is_empty()
                    && keyed
                        .iter()
                        .all(|&g| discharges.get(g).is_none_or(Vec::is_empty));
                if all_empty {
                    if let Some(p) = premises.get(s) {
                        return p.clone();
                    }
                }
            }
            node(n.rule, premises, discharges, n.eigen.clone(), n.concl.clone())
        }
    }
}

/// Expands every introduction (including Tarski's rule and negation
/// introduction) that discharges more than one major-assumption occurrence
/// into a stack of applications, each discharging exactly one occurrence.
///
/// Occurrences are taken in leftmost-first order over the premise above
/// which they are discharged; the leftmost occurrence is discharged by the
/// topmost application of the stack. The other premises of the application
/// are duplicated once per occurrence. The first copy keeps its labels;
/// later copies get fresh labels for the classes discharged inside the copy
/// or by the new application itself, while classes discharged further down
/// or left open keep their shared label.
pub fn to_unique_discharge(d: &Deduction) -> Deduction {
    let mut next = d.fresh_label();
    expand_unique(d, &mut next)
}

fn expand_unique(d: &Deduction, next: &mut u32) -> Deduction {
    let n = match d {
        Deduction::Leaf { .. } => return d.clone(),
        Deduction::Node(n) => n,
    };
    let premises: Vec<Deduction> = n.premises.iter().map(|p| expand_unique(p, next)).collect();
    let rebuilt = |premises: Vec<Deduction>| {
        node(
            n.rule,
            premises,
            n.discharges.clone(),
            n.eigen.clone(),
            n.concl.clone(),
        )
    };
    let Some(g) = n.rule.major_group() else {
        return rebuilt(premises);
    };
    let m = n.rule.discharge_slots()[g];
    let mut occs: Vec<(Vec<usize>, Formula)> = Vec::new();
    for (l, f) in n.discharges.get(g).map_or(&[][..], Vec::as_slice) {
        for (path, ll, _) in premises[m].leaves() {
            if ll == *l {
                occs.push((path, f.clone()));
            }
        }
    }
    if occs.len() <= 1 {
        return rebuilt(premises);
    }
    occs.sort();

    let mut pi = premises[m].clone();
    let mut tagged: Vec<(u32, Formula)> = Vec::new();
    for (path, f) in &occs {
        let l = next_label(next);
        pi = pi.replace_at(path, leaf(l, f.clone()));
        tagged.push((l, f.clone()));
    }

    let minor_pairs: Vec<(u32, Formula)> = n
        .rule
        .minor_group()
        .and_then(|mg| n.discharges.get(mg))
        .cloned()
        .unwrap_or_default();

    let mut t = pi;
    for (i, (l, f)) in tagged.into_iter().enumerate() {
        let mut sides: BTreeMap<usize, Deduction> = BTreeMap::new();
        let mut minors: Vec<(u32, Formula)> = Vec::new();
        if i == 0 {
            for (j, p) in premises.iter().enumerate() {
                if j != m {
                    sides.insert(j, p.clone());
                }
            }
            minors = minor_pairs.clone();
        } else {
            let mut map: BTreeMap<u32, u32> = BTreeMap::new();
            for (j, p) in premises.iter().enumerate() {
                if j == m {
                    continue;
                }
                for (_, _, l2, _) in p.discharge_listings() {
                    map.entry(l2).or_insert_with(|| next_label(next));
                }
            }
            for (l2, mf) in &minor_pairs {
                let fresh = *map.entry(*l2).or_insert_with(|| next_label(next));
                minors.push((fresh, mf.clone()));
            }
            for (j, p) in premises.iter().enumerate() {
                if j != m {
                    sides.insert(j, p.relabel(&map));
                }
            }
        }
        let mut prem_i = Vec::with_capacity(premises.len());
        for j in 0..premises.len() {
            if j == m {
                prem_i.push(std::mem::replace(&mut t, leaf(0, Formula::Bottom)));
            } else {
                prem_i.push(sides.remove(&j).expect("side premise"));
            }
        }
        let mut groups: Vec<Vec<(u32, Formula)>> = vec![Vec::new(); n.discharges.len()];
        groups[g] = vec![(l, f)];
        if let Some(mg) = n.rule.minor_group() {
            groups[mg] = minors;
        }
        t = node(n.rule, prem_i, groups, n.eigen.clone(), n.concl.clone());
    }
    t
}

/// Inverse of [`to_unique_discharge`]: merges stacks of same-rule
/// introductions whose side premises are equal up to relabeling into single
/// applications discharging several occurrences. Merged classes of the same
/// formula are re-unified under one label. Partial merges are possible when
/// only part of a stack has equal side premises.
pub fn collapse_unique_discharge(d: &Deduction) -> Deduction {
    let mut cur = d.clone();
    loop {
        let mut sites: Vec<Vec<usize>> = Vec::new();
        collect_node_paths(&cur, &mut Vec::new(), &mut sites);
        let mut committed = false;
        for path in sites {
            if let Some(merged) = merge_stack_at(&cur, &path) {
                if check(&merged, System::CExAll).valid {
                    cur = merged;
                    committed = true;
                    break;
                }
            }
        }
        if !committed {
            return cur;
        }
    }
}

fn collect_node_paths(d: &Deduction, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if let Deduction::Node(n) = d {
        out.push(path.clone());
        for (i, p) in n.premises.iter().enumerate() {
            path.push(i);
            collect_node_paths(p, path, out);
            path.pop();
        }
    }
}

/// Merges the introduction at `path` with its arbitrary-premise child when
/// both apply the same rule to side premises equal up to relabeling. Returns
/// the whole rewritten tree, or `None` when the shape does not match.
fn merge_stack_at(d: &Deduction, path: &[usize]) -> Option<Deduction> {
    let outer = d.at_path(path)?.as_node()?;
    let g = outer.rule.major_group()?;
    let m = outer.rule.discharge_slots()[g];
    let inner = outer.premises.get(m)?.as_node()?;
    if inner.rule != outer.rule {
        return None;
    }
    if outer.rule.needs_eigen() && outer.eigen != inner.eigen {
        return None;
    }
    for j in 0..outer.premises.len() {
        if j != m && !eq_mod_labels(&outer.premises[j], inner.premises.get(j)?) {
            return None;
        }
    }
    if let Some(mg) = outer.rule.minor_group() {
        let formulas = |pairs: &[(u32, Formula)]| -> Vec<Formula> {
            let mut fs: Vec<Formula> = pairs.iter().map(|(_, f)| f.clone()).collect();
            fs.sort();
            fs.dedup();
            fs
        };
        if formulas(&outer.discharges[mg]) != formulas(&inner.discharges[mg]) {
            return None;
        }
    }

    // Union the major groups, re-unifying classes of the same formula under
    // the first label seen. The inner application's side premises survive.
    let mut kept: BTreeMap<Formula, u32> = BTreeMap::new();
    let mut map: BTreeMap<u32, u32> = BTreeMap::new();
    let mut major: Vec<(u32, Formula)> = Vec::new();
    for (l, f) in inner.discharges[g].iter().chain(outer.discharges[g].iter()) {
        match kept.get(f) {
            Some(&k) => {
                map.insert(*l, k);
            }
            None => {
                kept.insert(f.clone(), *l);
                major.push((*l, f.clone()));
            }
        }
    }
    let premises: Vec<Deduction> = inner.premises.iter().map(|p| p.relabel(&map)).collect();
    let mut groups = inner.discharges.clone();
    groups[g] = major;
    let merged = node(
        inner.rule,
        premises,
        groups,
        inner.eigen.clone(),
        inner.concl.clone(),
    );
    Some(d.replace_at(path, merged))
}

/// Total major-assumption occurrences discharged by the introduction at each
/// node, for the unique-discharge precondition of [`to_conventional`].
fn unique_violation(d: &Deduction, path: &mut Vec<usize>) -> Option<(Vec<usize>, usize)> {
    let n = d.as_node()?;
    if matches!(
        n.rule,
        RuleId::AndI | RuleId::OrIL | RuleId::OrIR | RuleId::ImpI | RuleId::ExI | RuleId::AllI
    ) {
        let g = n.rule.major_group().expect("intro has a major group");
        let m = n.rule.discharge_slots()[g];
        let count: usize = n.discharges.get(g).map_or(0, |pairs| {
            pairs
                .iter()
                .map(|(l, _)| {
                    n.premises[m]
                        .leaves()
                        .iter()
                        .filter(|(_, ll, _)| ll == l)
                        .count()
                })
                .sum()
        });
        if count != 1 {
            return Some((path.clone(), count));
        }
    }
    for (i, p) in n.premises.iter().enumerate() {
        path.push(i);
        if let Some(v) = unique_violation(p, path) {
            return Some(v);
        }
        path.pop();
    }
    None
}

/// Rewrites introductions in the shape produced by [`from_conventional`]
/// back into conventional ones: an introduction whose single discharged
/// major occurrence is the arbitrary premise itself becomes the
/// corresponding conventional rule, and the implication template (Tarski's
/// rule applied to a general implication introduction over an assumption of
/// the implication) becomes the conventional implication introduction,
/// keeping its discharged antecedent class.
///
/// Tarski's rule and negation introduction otherwise stay as they are, and
/// so do introductions whose discharged occurrence sits deeper than the
/// arbitrary premise; the checker accepts general and conventional rules
/// side by side. Requires unique-discharge form for the specific-premise
/// introductions.
pub fn to_conventional(d: &Deduction) -> Result<Deduction, TransformError> {
    if let Some((path, count)) = unique_violation(d, &mut Vec::new()) {
        return Err(TransformError::NotUniqueDischarge { path, count });
    }
    Ok(conv(d))
}

fn conv(d: &Deduction) -> Deduction {
    let n = match d {
        Deduction::Leaf { .. } => return d.clone(),
        Deduction::Node(n) => n,
    };
    if let Some(out) = imp_template(n) {
        return out;
    }
    if let Some(out) = conv_intro(n) {
        return out;
    }
    node(
        n.rule,
        n.premises.iter().map(conv).collect(),
        n.discharges.clone(),
        n.eigen.clone(),
        n.concl.clone(),
    )
}

/// Matches Tarski's rule over a general implication introduction whose
/// discharged majors are both assumptions of the implication itself, the
/// shape [`from_conventional`] gives a conventional implication
/// introduction with a non-empty antecedent class.
fn imp_template(n: &NodeData) -> Option<Deduction> {
    if n.rule != RuleId::Tr {
        return None;
    }
    let Deduction::Leaf { label: l2, formula: f2 } = n.premises.get(1)? else {
        return None;
    };
    let Formula::Imp(ante, _) = f2 else {
        return None;
    };
    let major = n.discharges.get(1)?;
    if major.len() != 1 || major[0].0 != *l2 {
        return None;
    }
    let inner = n.premises.first()?.as_node()?;
    if inner.rule != RuleId::ImpI {
        return None;
    }
    let Deduction::Leaf { label: l1, formula: f1 } = inner.premises.get(1)? else {
        return None;
    };
    if f1 != f2 {
        return None;
    }
    let im = inner.discharges.first()?;
    if im.len() != 1 || im[0].0 != *l1 {
        return None;
    }
    let minors = n.discharges.first()?;
    if minors.iter().any(|(_, f)| f != ante.as_ref()) {
        return None;
    }
    Some(node(
        RuleId::ImpIc,
        vec![conv(inner.premises.first()?)],
        vec![minors.clone()],
        None,
        Some(f2.clone()),
    ))
}

/// Converts an introduction whose single discharged major occurrence is the
/// arbitrary premise itself into the corresponding conventional rule.
fn conv_intro(n: &NodeData) -> Option<Deduction> {
    let conv_rule = match n.rule {
        RuleId::AndI => RuleId::AndIc,
        RuleId::OrIL => RuleId::OrILc,
        RuleId::OrIR => RuleId::OrIRc,
        RuleId::ImpI => RuleId::ImpIc,
        RuleId::ExI => RuleId::ExIc,
        _ => return None,
    };
    let g = n.rule.major_group().expect("intro has a major group");
    let m = n.rule.discharge_slots()[g];
    let pairs = n.discharges.get(g)?;
    let Deduction::Leaf { label, formula } = n.premises.get(m)? else {
        return None;
    };
    if pairs.len() != 1 || pairs[0].0 != *label {
        return None;
    }
    let sides: Vec<Deduction> = n
        .premises
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != m)
        .map(|(_, p)| conv(p))
        .collect();
    let (groups, concl) = if conv_rule == RuleId::ImpIc {
        (vec![Vec::new()], Some(formula.clone()))
    } else if conv_rule == RuleId::AndIc {
        (Vec::new(), None)
    } else {
        (Vec::new(), Some(formula.clone()))
    };
    Some(node(conv_rule, sides, groups, None, concl))
}

/// Replaces every conventional introduction by its general counterpart,
/// discharging a freshly labeled assumption of the introduced formula that
/// becomes the arbitrary premise. A conventional implication introduction
/// with a non-empty antecedent class becomes Tarski's rule applied to a
/// general implication introduction, with the antecedent class discharged
/// by Tarski's rule; with an empty class, the general implication
/// introduction alone suffices.
pub fn from_conventional(d: &Deduction) -> Deduction {
    let mut next = d.fresh_label();
    unconv(d, &mut next)
}

fn unconv(d: &Deduction, next: &mut u32) -> Deduction {
    let n = match d {
        Deduction::Leaf { .. } => return d.clone(),
        Deduction::Node(n) => n,
    };
    let general = match n.rule {
        RuleId::AndIc => Some(RuleId::AndI),
        RuleId::OrILc => Some(RuleId::OrIL),
        RuleId::OrIRc => Some(RuleId::OrIR),
        RuleId::ExIc => Some(RuleId::ExI),
        _ => None,
    };
    if let Some(rule) = general {
        let formula = match d.conclusion() {
            Some(f) => f,
            None => {
                return node(
                    n.rule,
                    n.premises.iter().map(|p| unconv(p, next)).collect(),
                    n.discharges.clone(),
                    n.eigen.clone(),
                    n.concl.clone(),
                )
            }
        };
        let l = next_label(next);
        let mut premises: Vec<Deduction> =
            n.premises.iter().map(|p| unconv(p, next)).collect();
        premises.push(leaf(l, formula.clone()));
        return node(rule, premises, vec![vec![(l, formula)]], None, None);
    }
    if n.rule == RuleId::ImpIc {
        if let Some(formula) = n.concl.clone() {
            let sigma = unconv(n.premises.first().expect("premise"), next);
            let l1 = next_label(next);
            let imp_intro = node(
                RuleId::ImpI,
                vec![sigma, leaf(l1, formula.clone())],
                vec![vec![(l1, formula.clone())]],
                None,
                None,
            );
            let antecedents = n.discharges.first().cloned().unwrap_or_default();
            if antecedents.is_empty() {
                return imp_intro;
            }
            let l2 = next_label(next);
            return node(
                RuleId::Tr,
                vec![imp_intro, leaf(l2, formula.clone())],
                vec![antecedents, vec![(l2, formula)]],
                None,
                None,
            );
        }
    }
    node(
        n.rule,
        n.premises.iter().map(|p| unconv(p, next)).collect(),
        n.discharges.clone(),
        n.eigen.clone(),
        n.concl.clone(),
    )
}
