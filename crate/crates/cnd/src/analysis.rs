//! Structure detection on checked deductions: maximal formulas, segments,
//! rank, normal form, branches with orders, and the subformula audit.
//!
//! A maximal formula is an assumption occurrence that is at once the major
//! premise of an elimination and the major assumption discharged by an
//! introduction (counting Tarski's rule as an introduction for implication):
//! the formula is broken down right where it was taken apart for discharge,
//! a detour. A segment is a chain of same-shaped occurrences running from an
//! assumption in arbitrary-premise position, or from a negation-elimination
//! conclusion, down through arbitrary premises to the first place that is
//! not an arbitrary premise; when that final place is an elimination's major
//! premise the segment is maximal and calls for a permutative reduction.
//! Chains that share their final occurrence are reported as one segment
//! whose occurrence list is the longest chain into that sink.

use crate::deduction::{Deduction, Role, RuleId};
use crate::logic::{is_subformula, Formula};
use std::collections::BTreeMap;
use std::fmt;

/// Path of child indices addressing a formula occurrence: the conclusion of
/// the subtree at that path (for a leaf, the assumption itself).
pub type OccurrencePath = Vec<usize>;

/// A chain of same-shaped formula occurrences through arbitrary premises.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub occurrences: Vec<OccurrencePath>,
    pub formula: Formula,
    pub degree: usize,
}

impl Segment {
    pub fn length(&self) -> usize {
        self.occurrences.len()
    }

    /// Final occurrence: the first position that is not an arbitrary premise.
    pub fn sink(&self) -> &OccurrencePath {
        self.occurrences.last().expect("segments are non-empty")
    }
}

/// Lexicographically ordered measure driving normalization: highest degree
/// of a maximal formula or segment, then the amount of material of that
/// degree still to be removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rank {
    pub d: usize,
    pub l: usize,
}

impl Rank {
    pub const ZERO: Rank = Rank { d: 0, l: 0 };
}

impl fmt::Display for Rank {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "\u{27e8}{}, {}\u{27e9}", self.d, self.l)
    }
}

/// A thread through the deduction from an assumption to the conclusion or
/// to a minor premise, following discharge for eliminations and specific
/// premises for introductions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub occurrences: Vec<OccurrencePath>,
    /// 0 for branches ending at the conclusion; n+1 for branches ending at
    /// a minor premise whose major premise lies on a branch of order n;
    /// None when no such branch exists.
    pub order: Option<u32>,
}

/// Partition of a branch of a normal deduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EiSplit {
    /// Leading occurrences standing as elimination major premises.
    pub e_part: Vec<OccurrencePath>,
    /// The minimal formula or segment separating the two parts.
    pub minimal: Vec<OccurrencePath>,
    /// Trailing occurrences: segments of introduction-discharged assumptions.
    pub i_part: Vec<OccurrencePath>,
}

fn role_of(d: &Deduction, path: &[usize]) -> Option<Role> {
    if path.is_empty() {
        return None;
    }
    let parent = d.at_path(&path[..path.len() - 1])?;
    let node = parent.as_node()?;
    node.rule.roles().get(*path.last().unwrap()).copied()
}

fn is_arb_position(d: &Deduction, path: &[usize]) -> bool {
    role_of(d, path) == Some(Role::Arbitrary)
}

/// Map from class label to (discharging node path, group index, rule).
pub(crate) fn discharger_map(d: &Deduction) -> BTreeMap<u32, (Vec<usize>, usize, RuleId)> {
    d.discharge_listings()
        .into_iter()
        .map(|(path, group, label, _)| {
            let rule = rule_at(d, &path);
            (label, (path, group, rule))
        })
        .collect()
}

fn rule_at(d: &Deduction, path: &[usize]) -> RuleId {
    d.at_path(path)
        .and_then(|s| s.as_node())
        .map(|n| n.rule)
        .expect("discharge listings address rule applications")
}

/// Occurrences that are simultaneously the major premise of an elimination
/// and the major assumption discharged by an introduction or Tarski's rule.
pub fn maximal_formulas(d: &Deduction) -> Vec<OccurrencePath> {
    let dischargers = discharger_map(d);
    let mut hits = Vec::new();
    walk_nodes(d, &mut Vec::new(), &mut |node, path| {
        if !node.rule.is_elim() {
            return;
        }
        if let Some(Deduction::Leaf { label, .. }) = node.premises.first() {
            if let Some((_, group, rule)) = dischargers.get(label) {
                if rule.major_group() == Some(*group) {
                    let mut p = path.to_vec();
                    p.push(0);
                    hits.push(p);
                }
            }
        }
    });
    hits
}

fn walk_nodes(
    d: &Deduction,
    path: &mut Vec<usize>,
    visit: &mut impl FnMut(&crate::deduction::NodeData, &[usize]),
) {
    if let Some(node) = d.as_node() {
        visit(node, path);
        for (i, p) in node.premises.iter().enumerate() {
            path.push(i);
            walk_nodes(p, path, visit);
            path.pop();
        }
    }
}

fn chain_down(d: &Deduction, start: Vec<usize>) -> Vec<OccurrencePath> {
    let mut occurrences = vec![start];
    loop {
        let cur = occurrences.last().unwrap();
        if !is_arb_position(d, cur) {
            return occurrences;
        }
        let parent = cur[..cur.len() - 1].to_vec();
        occurrences.push(parent);
    }
}

/// All segments, one per source occurrence, in source order. Chains that
/// merge at a shared arbitrary premise stay separate, so summing their
/// lengths weighs a branched segment by every path through it.
pub fn segments(d: &Deduction) -> Vec<Segment> {
    let mut sources: Vec<Vec<usize>> = Vec::new();
    for (path, _, _) in d.leaves() {
        if is_arb_position(d, &path) {
            sources.push(path);
        }
    }
    walk_nodes(d, &mut Vec::new(), &mut |node, path| {
        if node.rule == RuleId::NotE {
            sources.push(path.to_vec());
        }
    });
    sources.sort();
    sources.dedup();
    sources
        .into_iter()
        .map(|source| {
            let occurrences = chain_down(d, source);
            let formula = d
                .at_path(occurrences.last().unwrap())
                .and_then(|s| s.conclusion())
                .expect("segment sink resolves to a formula");
            let degree = formula.degree();
            Segment {
                occurrences,
                formula,
                degree,
            }
        })
        .collect()
}

/// Segments whose sink stands as the major premise of an elimination.
pub fn maximal_segments(d: &Deduction) -> Vec<Segment> {
    segments(d)
        .into_iter()
        .filter(|s| {
            let sink = s.sink();
            if sink.is_empty() {
                return false;
            }
            *sink.last().unwrap() == 0
                && d.at_path(&sink[..sink.len() - 1])
                    .and_then(|p| p.as_node())
                    .is_some_and(|n| n.rule.is_elim())
        })
        .collect()
}

pub fn rank(d: &Deduction) -> Rank {
    let formulas: Vec<usize> = maximal_formulas(d)
        .iter()
        .map(|p| {
            d.at_path(p)
                .and_then(|s| s.conclusion())
                .expect("maximal formula path resolves")
                .degree()
        })
        .collect();
    let segs = maximal_segments(d);
    let degree = formulas
        .iter()
        .copied()
        .chain(segs.iter().map(|s| s.degree))
        .max()
        .unwrap_or(0);
    if degree == 0 {
        return Rank::ZERO;
    }
    let l = segs
        .iter()
        .filter(|s| s.degree == degree)
        .map(Segment::length)
        .sum::<usize>()
        + formulas.iter().filter(|&&f| f == degree).count();
    Rank { d: degree, l }
}

pub fn is_normal(d: &Deduction) -> bool {
    maximal_formulas(d).is_empty() && maximal_segments(d).is_empty()
}

/// All branches in the deduction, depth-first and leftmost-first.
pub fn branches(d: &Deduction) -> Vec<Branch> {
    let dischargers = discharger_map(d);
    let mut leaf_paths: BTreeMap<u32, Vec<Vec<usize>>> = BTreeMap::new();
    for (path, label, _) in d.leaves() {
        leaf_paths.entry(label).or_default().push(path);
    }
    let cap = 2 * d.size() + 2;
    let mut sequences: Vec<Vec<OccurrencePath>> = Vec::new();
    for (path, label, _) in d.leaves() {
        let eligible = match dischargers.get(&label) {
            None => true,
            Some((_, group, rule)) => {
                !rule.is_elim()
                    && (rule.major_group() != Some(*group)
                        || matches!(rule, RuleId::Tr | RuleId::NotI))
            }
        };
        if eligible {
            extend_branch(d, &dischargers, &leaf_paths, cap, vec![path], &mut sequences);
        }
    }
    assign_orders(sequences)
}

fn extend_branch(
    d: &Deduction,
    dischargers: &BTreeMap<u32, (Vec<usize>, usize, RuleId)>,
    leaf_paths: &BTreeMap<u32, Vec<Vec<usize>>>,
    cap: usize,
    seq: Vec<OccurrencePath>,
    out: &mut Vec<Vec<OccurrencePath>>,
) {
    if seq.len() > cap {
        return;
    }
    let cur = seq.last().unwrap().clone();
    if cur.is_empty() {
        out.push(seq);
        return;
    }
    let parent_path = cur[..cur.len() - 1].to_vec();
    let idx = *cur.last().unwrap();
    let parent = d
        .at_path(&parent_path)
        .and_then(|p| p.as_node())
        .expect("non-root occurrence has a parent application");
    match parent.rule.roles()[idx] {
        Role::Major if parent.rule == RuleId::NotE => {
            step_to(d, dischargers, leaf_paths, cap, seq, parent_path, out);
        }
        Role::Major => {
            let mut continued = false;
            for group in &parent.discharges {
                for (label, _) in group {
                    for occ in leaf_paths.get(label).into_iter().flatten() {
                        continued = true;
                        let mut next = seq.clone();
                        next.push(occ.clone());
                        extend_branch(d, dischargers, leaf_paths, cap, next, out);
                    }
                }
            }
            // BotE (and a fully vacuous AndE) discharges nothing: the
            // sequence dead-ends and is not a branch.
            let _ = continued;
        }
        Role::Minor => out.push(seq),
        Role::Specific => match parent.rule.major_group() {
            Some(group) => {
                for (label, _) in &parent.discharges[group] {
                    for occ in leaf_paths.get(label).into_iter().flatten() {
                        let mut next = seq.clone();
                        next.push(occ.clone());
                        extend_branch(d, dischargers, leaf_paths, cap, next, out);
                    }
                }
            }
            None => step_to(d, dischargers, leaf_paths, cap, seq, parent_path, out),
        },
        Role::Arbitrary => {
            step_to(d, dischargers, leaf_paths, cap, seq, parent_path, out);
        }
    }
}

fn step_to(
    d: &Deduction,
    dischargers: &BTreeMap<u32, (Vec<usize>, usize, RuleId)>,
    leaf_paths: &BTreeMap<u32, Vec<Vec<usize>>>,
    cap: usize,
    mut seq: Vec<OccurrencePath>,
    to: OccurrencePath,
    out: &mut Vec<Vec<OccurrencePath>>,
) {
    seq.push(to);
    extend_branch(d, dischargers, leaf_paths, cap, seq, out);
}

fn assign_orders(sequences: Vec<Vec<OccurrencePath>>) -> Vec<Branch> {
    let mut orders: Vec<Option<u32>> = sequences
        .iter()
        .map(|s| if s.last().unwrap().is_empty() { Some(0) } else { None })
        .collect();
    loop {
        let mut changed = false;
        for i in 0..sequences.len() {
            if orders[i].is_some() {
                continue;
            }
            let last = sequences[i].last().unwrap();
            let mut major = last[..last.len() - 1].to_vec();
            major.push(0);
            let candidate = sequences
                .iter()
                .zip(&orders)
                .filter(|(s, _)| s.contains(&major))
                .filter_map(|(_, o)| *o)
                .min();
            if let Some(n) = candidate {
                orders[i] = Some(n + 1);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    sequences
        .into_iter()
        .zip(orders)
        .map(|(occurrences, order)| Branch { occurrences, order })
        .collect()
}

/// Split a branch of a normal deduction into E-part, minimal segment and
/// I-part.
pub fn ei_split(d: &Deduction, branch: &Branch) -> EiSplit {
    let occs = &branch.occurrences;
    let mut i = 0;
    while i < occs.len() && is_elim_major_position(d, &occs[i]) {
        i += 1;
    }
    let e_part = occs[..i].to_vec();
    let mut minimal = Vec::new();
    if i < occs.len() {
        minimal.push(occs[i].clone());
        while i + 1 < occs.len() && is_arb_position(d, &occs[i]) {
            i += 1;
            minimal.push(occs[i].clone());
        }
    }
    let i_part = occs[(i + 1).min(occs.len())..].to_vec();
    EiSplit {
        e_part,
        minimal,
        i_part,
    }
}

fn is_elim_major_position(d: &Deduction, path: &[usize]) -> bool {
    if path.is_empty() || *path.last().unwrap() != 0 {
        return false;
    }
    d.at_path(&path[..path.len() - 1])
        .and_then(|p| p.as_node())
        .is_some_and(|n| n.rule.is_elim())
}

/// Paths of occurrences that are subformulas neither of the conclusion nor
/// of any open assumption. Empty on deductions with the subformula property.
pub fn subformula_audit(d: &Deduction) -> Vec<OccurrencePath> {
    let conclusion = match d.conclusion() {
        Some(c) => c,
        None => return Vec::new(),
    };
    let opens = d.open_formulas();
    let mut violations = Vec::new();
    audit_walk(d, &conclusion, &opens, &mut Vec::new(), &mut violations);
    violations
}

fn audit_walk(
    d: &Deduction,
    conclusion: &Formula,
    opens: &std::collections::BTreeSet<Formula>,
    path: &mut Vec<usize>,
    out: &mut Vec<OccurrencePath>,
) {
    if let Some(f) = d.conclusion() {
        let covered = is_subformula(&f, conclusion) || opens.iter().any(|g| is_subformula(&f, g));
        if !covered {
            out.push(path.clone());
        }
    }
    if let Some(node) = d.as_node() {
        for (i, p) in node.premises.iter().enumerate() {
            path.push(i);
            audit_walk(p, conclusion, opens, path, out);
            path.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::{check, System};
    use crate::syntax::parse_deduction;

    fn checked(src: &str) -> Deduction {
        let d = parse_deduction(src).unwrap();
        let report = check(&d, System::C);
        assert!(report.valid, "{:?}", report.diagnostics);
        d
    }

    const AND_DETOUR: &str = "(andI (assume 5 (at p)) (assume 6 (at q)) (andE (assume 1 (and (at p) (at q))) (assume 2 (at p)) (dis (2 (at p))) (dis)) (dis (1 (and (at p) (at q)))))";

    const OR_PERM: &str = "(orE (orE (assume 5 (or (or (at c) (at d)) (or (at c) (at d)))) (assume 1 (or (at c) (at d))) (assume 2 (or (at c) (at d))) (dis (1 (or (at c) (at d)))) (dis (2 (or (at c) (at d))))) (assume 3 (at c)) (notE (assume 6 (not (at d))) (assume 4 (at d)) (at c)) (dis (3 (at c))) (dis (4 (at d))))";

    const IMP_REFL: &str = "(tr (impI (assume 2 (at p)) (assume 1 (imp (at p) (at p))) (dis (1 (imp (at p) (at p))))) (assume 3 (imp (at p) (at p))) (dis (2 (at p))) (dis (3 (imp (at p) (at p)))))";

    const DERIVED_IMP_INTRO: &str = "(tr (impI (notE (assume 9 (not (at p))) (assume 2 (at p)) (at q)) (assume 1 (imp (at p) (at q))) (dis (1 (imp (at p) (at q))))) (assume 3 (imp (at p) (at q))) (dis (2 (at p))) (dis (3 (imp (at p) (at q)))))";

    #[test]
    fn and_detour_has_one_maximal_formula() {
        let d = checked(AND_DETOUR);
        assert_eq!(maximal_formulas(&d), vec![vec![2, 0]]);
        assert!(maximal_segments(&d).is_empty());
        assert_eq!(rank(&d), Rank { d: 1, l: 1 });
        assert!(!is_normal(&d));
    }

    #[test]
    fn or_perm_has_a_maximal_segment_through_each_arm() {
        let d = checked(OR_PERM);
        assert!(maximal_formulas(&d).is_empty());
        let segs = maximal_segments(&d);
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].occurrences, vec![vec![0, 1], vec![0]]);
        assert_eq!(segs[1].occurrences, vec![vec![0, 2], vec![0]]);
        assert_eq!(segs[0].formula.to_string(), "c \u{2228} d");
        assert_eq!(rank(&d), Rank { d: 1, l: 4 });
        assert!(!is_normal(&d));
    }

    #[test]
    fn segments_keep_chains_through_separate_arms_apart() {
        let d = checked(OR_PERM);
        let all = segments(&d);
        // Two chains meet at the inner orE conclusion and two at the root.
        assert_eq!(all.len(), 4);
        assert_eq!(all[0].sink(), &vec![0]);
        assert_eq!(all[0].length(), 2);
        assert_eq!(all[1].sink(), &vec![0]);
        assert_eq!(all[2].sink(), &Vec::<usize>::new());
        assert_eq!(all[3].sink(), &Vec::<usize>::new());
    }

    #[test]
    fn note_conclusion_forms_a_segment_of_length_one() {
        let d = checked("(notE (assume 1 (not (at p))) (assume 2 (at p)) (at q))");
        let all = segments(&d);
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].length(), 1);
        assert_eq!(all[0].occurrences, vec![Vec::<usize>::new()]);
        assert!(maximal_segments(&d).is_empty());
        assert!(is_normal(&d));
        assert_eq!(rank(&d), Rank::ZERO);
    }

    #[test]
    fn derived_imp_intro_is_normal() {
        let d = checked(DERIVED_IMP_INTRO);
        assert!(maximal_formulas(&d).is_empty());
        assert!(maximal_segments(&d).is_empty());
        assert!(is_normal(&d));
        // The negE conclusion chain and the two arb chains to the root.
        let all = segments(&d);
        assert_eq!(all.len(), 3);
        assert_eq!(all[0].occurrences, vec![vec![0, 0]]);
        assert_eq!(all[1].occurrences, vec![vec![0, 1], vec![0], vec![]]);
        assert_eq!(all[2].occurrences, vec![vec![1], vec![]]);
        assert!(subformula_audit(&d).is_empty());
    }

    #[test]
    fn branch_orders_on_derived_imp_intro() {
        let d = checked(DERIVED_IMP_INTRO);
        let bs = branches(&d);
        assert_eq!(bs.len(), 3);
        assert_eq!(
            bs[0].occurrences,
            vec![vec![0, 0, 0], vec![0, 0], vec![0, 1], vec![0], vec![]]
        );
        assert_eq!(bs[0].order, Some(0));
        // The negE minor premise ends a branch of order 1.
        assert_eq!(bs[1].occurrences, vec![vec![0, 0, 1]]);
        assert_eq!(bs[1].order, Some(1));
        assert_eq!(bs[2].occurrences, vec![vec![1], vec![]]);
        assert_eq!(bs[2].order, Some(0));
    }

    #[test]
    fn imp_refl_is_normal_with_two_main_branches() {
        let d = checked(IMP_REFL);
        assert!(is_normal(&d));
        assert_eq!(rank(&d), Rank::ZERO);
        let bs = branches(&d);
        assert_eq!(bs.len(), 2);
        assert!(bs.iter().all(|b| b.order == Some(0)));
        let split = ei_split(&d, &bs[0]);
        assert!(split.e_part.is_empty());
        assert_eq!(split.minimal, vec![vec![0, 0]]);
        assert_eq!(split.i_part, vec![vec![0, 1], vec![0], vec![]]);
        assert!(subformula_audit(&d).is_empty());
    }

    #[test]
    fn single_assumption_branch() {
        let d = checked("(assume 1 (at p))");
        let bs = branches(&d);
        assert_eq!(bs.len(), 1);
        assert_eq!(bs[0].occurrences, vec![Vec::<usize>::new()]);
        assert_eq!(bs[0].order, Some(0));
        let split = ei_split(&d, &bs[0]);
        assert!(split.e_part.is_empty());
        assert_eq!(split.minimal.len(), 1);
        assert!(split.i_part.is_empty());
    }

    #[test]
    fn elimination_branch_has_e_part() {
        let d = checked(AND_DETOUR);
        let bs = branches(&d);
        // Starts: open p, open q; [p&q]1 is discharged by andI's major
        // group, [p]2 by an elimination: neither starts a branch.
        assert_eq!(bs.len(), 2);
        assert_eq!(
            bs[0].occurrences,
            vec![vec![0], vec![2, 0], vec![2, 1], vec![2], vec![]]
        );
        assert_eq!(bs[0].order, Some(0));
        assert_eq!(bs[1].occurrences, vec![vec![1], vec![2, 0], vec![2, 1], vec![2], vec![]]);
    }

    #[test]
    fn audit_flags_unrelated_note_conclusions() {
        let src = "(impI (assume 0 (at c)) (impE (assume 8 (imp (at r) (at c))) (notE (assume 6 (not (at p))) (assume 7 (at p)) (at r)) (assume 5 (at c)) (dis (5 (at c)))) (dis (8 (imp (at r) (at c)))))";
        let d = checked(src);
        assert!(!is_normal(&d));
        assert_eq!(maximal_formulas(&d), vec![vec![1, 0]]);
        let audit = subformula_audit(&d);
        assert!(audit.contains(&vec![1, 0]), "{audit:?}");
        assert!(audit.contains(&vec![1, 1]), "{audit:?}");
    }

    #[test]
    fn rank_orders_lexicographically() {
        assert!(Rank { d: 1, l: 9 } < Rank { d: 2, l: 0 });
        assert!(Rank { d: 2, l: 1 } < Rank { d: 2, l: 3 });
        assert_eq!(Rank::ZERO.to_string(), "\u{27e8}0, 0\u{27e9}");
    }
}
