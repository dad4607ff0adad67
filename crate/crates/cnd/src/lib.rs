//! Proof kernel, analyzer and normalizer for classical natural deduction
//! with general introduction and elimination rules.
//!
//! The system pairs general elimination rules, which conclude an arbitrary
//! formula from side deductions discharging the components of the major
//! premise, with general introduction rules, which discharge the compound
//! formula instead of concluding it. Tarski's rule serves as a second
//! introduction rule for implication, which makes the logic classical.
//! Deductions convert into normal form, and normal deductions have the
//! subformula property.

pub mod analysis;
pub mod deduction;
pub mod generate;
pub mod logic;
pub mod reduce;
pub mod syntax;
pub mod transform;

pub use analysis::{
    branches, ei_split, is_normal, maximal_formulas, maximal_segments, rank, segments,
    subformula_audit, Branch, EiSplit, OccurrencePath, Rank, Segment,
};
pub use deduction::{
    check, eq_mod_labels, leaf, node, CheckReport, Deduction, Diagnostic, NodeData, Role, RuleId,
    System,
};
pub use generate::{enumerate_normal_closed, gen_deduction};
pub use logic::{Formula, Name, Term};
pub use reduce::{
    build_xi_star, find_redexes, normalize, permute, reduce_and, reduce_at, reduce_ex, reduce_imp,
    reduce_not, reduce_or, reduce_tr, rename_eigens, NormalizeError, Redex, RedexKind, ReduceError,
    TraceStep, DEFAULT_BUDGET,
};
pub use transform::{
    clean_vacuous, collapse_unique_discharge, from_conventional, to_conventional,
    to_unique_discharge, TransformError,
};
pub use syntax::{
    parse_deduction, parse_formula, render_ascii, render_latex, render_sexpr, ParseError,
    SourceSpan,
};
