//! Textual proof format: s-expression parser and renderers.
//!
//! Grammar:
//!
//! ```text
//! deduction := (assume INT formula)
//!            | (RULE premise* formula? (dis (INT formula)*)* (eigen NAME)?)
//! formula   := (at NAME term*) | (bot) | (not f) | (and f f) | (or f f)
//!            | (imp f f) | (ex NAME f) | (all NAME f)
//! term      := NAME | (fn NAME term+)
//! ```
//!
//! The optional formula after the premises is the explicit conclusion,
//! required for exactly the rules whose conclusion is not determined by
//! their premises (notE, botE, orILc, orIRc, impIc, exIc). Formula heads and
//! rule names are disjoint, so the grammar stays unambiguous. `;` starts a
//! line comment. The parser checks syntax only; rule arities and discharge
//! shapes are the checker's business. Nesting is capped at a depth far
//! beyond real proofs so that hostile input cannot exhaust the stack here
//! or in any later pass over the tree.

use crate::deduction::{leaf, node, Deduction, RuleId};
use crate::logic::{Formula, Term};
use std::fmt::Write as _;
use thiserror::Error;

/// Position of a token or error in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub begin: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, Error)]
#[error("{}:{}: {}", span.line, span.column, message)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

const MAX_DEPTH: usize = 512;

const FORMULA_HEADS: [&str; 8] = ["at", "bot", "not", "and", "or", "imp", "ex", "all"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Atom(String),
}

struct Lexer {
    tokens: Vec<(Tok, usize)>,
    line_starts: Vec<usize>,
    len: usize,
}

fn lex(src: &str) -> Lexer {
    let mut tokens = Vec::new();
    let mut line_starts = vec![0];
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'\n' => {
                line_starts.push(i + 1);
                i += 1;
            }
            b' ' | b'\t' | b'\r' => i += 1,
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                tokens.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                tokens.push((Tok::RParen, i));
                i += 1;
            }
            _ => {
                let start = i;
                while i < bytes.len()
                    && !matches!(bytes[i], b'(' | b')' | b' ' | b'\t' | b'\r' | b'\n' | b';')
                {
                    i += 1;
                }
                let text = String::from_utf8_lossy(&bytes[start..i]).into_owned();
                tokens.push((Tok::Atom(text), start));
            }
        }
    }
    Lexer {
        tokens,
        line_starts,
        len: src.len(),
    }
}

struct Parser {
    lexer: Lexer,
    pos: usize,
}

impl Parser {
    fn span_at(&self, offset: usize) -> SourceSpan {
        let line = self
            .lexer
            .line_starts
            .partition_point(|&s| s <= offset);
        let start = self.lexer.line_starts[line - 1];
        SourceSpan {
            begin: offset,
            end: offset,
            line,
            column: offset - start + 1,
        }
    }

    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            span: self.span_at(offset),
            message: message.into(),
        })
    }

    fn here(&self) -> usize {
        self.lexer
            .tokens
            .get(self.pos)
            .map_or(self.lexer.len, |(_, o)| *o)
    }

    fn peek(&self) -> Option<&Tok> {
        self.lexer.tokens.get(self.pos).map(|(t, _)| t)
    }

    /// Head atom of an immediately following list, without consuming.
    fn peek_head(&self) -> Option<&str> {
        match (
            self.lexer.tokens.get(self.pos),
            self.lexer.tokens.get(self.pos + 1),
        ) {
            (Some((Tok::LParen, _)), Some((Tok::Atom(s), _))) => Some(s),
            _ => None,
        }
    }

    fn expect_lparen(&mut self, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(self.here(), format!("expected {what}")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(self.here(), "expected closing parenthesis"),
        }
    }

    fn expect_atom(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Atom(_)) => {
                let offset = self.pos;
                self.pos += 1;
                match &self.lexer.tokens[offset].0 {
                    Tok::Atom(s) => Ok(s.clone()),
                    _ => unreachable!(),
                }
            }
            _ => self.err(self.here(), format!("expected {what}")),
        }
    }

    fn parse_term(&mut self, depth: usize) -> Result<Term, ParseError> {
        if depth == 0 {
            return self.err(self.here(), "nesting too deep");
        }
        match self.peek() {
            Some(Tok::Atom(_)) => Ok(Term::Sym(self.expect_atom("term")?)),
            Some(Tok::LParen) => {
                self.pos += 1;
                let head = self.expect_atom("fn")?;
                if head != "fn" {
                    return self.err(self.here(), format!("expected fn, found {head}"));
                }
                let name = self.expect_atom("function name")?;
                let mut args = Vec::new();
                while !matches!(self.peek(), Some(Tok::RParen) | None) {
                    args.push(self.parse_term(depth - 1)?);
                }
                if args.is_empty() {
                    return self.err(self.here(), "fn requires at least one argument");
                }
                self.expect_rparen()?;
                Ok(Term::Fn(name, args))
            }
            _ => self.err(self.here(), "expected term"),
        }
    }

    fn parse_formula(&mut self, depth: usize) -> Result<Formula, ParseError> {
        if depth == 0 {
            return self.err(self.here(), "nesting too deep");
        }
        self.expect_lparen("formula")?;
        let head_off = self.here();
        let head = self.expect_atom("formula head")?;
        let f = match head.as_str() {
            "at" => {
                let name = self.expect_atom("predicate name")?;
                let mut args = Vec::new();
                while !matches!(self.peek(), Some(Tok::RParen) | None) {
                    args.push(self.parse_term(depth - 1)?);
                }
                Formula::Atom(name, args)
            }
            "bot" => Formula::Bottom,
            "not" => Formula::Not(Box::new(self.parse_formula(depth - 1)?)),
            "and" | "or" | "imp" => {
                let a = self.parse_formula(depth - 1)?;
                let b = self.parse_formula(depth - 1)?;
                match head.as_str() {
                    "and" => Formula::And(Box::new(a), Box::new(b)),
                    "or" => Formula::Or(Box::new(a), Box::new(b)),
                    _ => Formula::Imp(Box::new(a), Box::new(b)),
                }
            }
            "ex" | "all" => {
                let var = self.expect_atom("variable name")?;
                let body = self.parse_formula(depth - 1)?;
                if head == "ex" {
                    Formula::Exists(var, Box::new(body))
                } else {
                    Formula::Forall(var, Box::new(body))
                }
            }
            other => {
                return self.err(head_off, format!("unknown formula head {other}"));
            }
        };
        self.expect_rparen()?;
        Ok(f)
    }

    fn parse_label(&mut self) -> Result<u32, ParseError> {
        let offset = self.here();
        let s = self.expect_atom("assumption class label")?;
        s.parse::<u32>()
            .map_err(|_| ParseError {
                span: self.span_at(offset),
                message: format!("expected a class label (small integer), found {s}"),
            })
    }

    fn parse_deduction(&mut self, depth: usize) -> Result<Deduction, ParseError> {
        if depth == 0 {
            return self.err(self.here(), "nesting too deep");
        }
        self.expect_lparen("deduction")?;
        let head_off = self.here();
        let head = self.expect_atom("rule name or assume")?;
        if head == "assume" {
            let label = self.parse_label()?;
            let formula = self.parse_formula(depth - 1)?;
            self.expect_rparen()?;
            return Ok(leaf(label, formula));
        }
        let rule = match RuleId::from_name(&head) {
            Some(r) => r,
            None => return self.err(head_off, format!("unknown rule {head}")),
        };
        let mut premises = Vec::new();
        while let Some(h) = self.peek_head() {
            if h == "assume" || RuleId::from_name(h).is_some() {
                premises.push(self.parse_deduction(depth - 1)?);
            } else {
                break;
            }
        }
        let mut concl = None;
        if let Some(h) = self.peek_head() {
            if FORMULA_HEADS.contains(&h) {
                concl = Some(self.parse_formula(depth - 1)?);
            }
        }
        let mut discharges = Vec::new();
        while self.peek_head() == Some("dis") {
            self.pos += 2;
            let mut group = Vec::new();
            while matches!(self.peek(), Some(Tok::LParen)) {
                self.pos += 1;
                let label = self.parse_label()?;
                let formula = self.parse_formula(depth - 1)?;
                self.expect_rparen()?;
                group.push((label, formula));
            }
            self.expect_rparen()?;
            discharges.push(group);
        }
        let mut eigen = None;
        if self.peek_head() == Some("eigen") {
            self.pos += 2;
            eigen = Some(self.expect_atom("eigenparameter name")?);
            self.expect_rparen()?;
        }
        if let Some(h) = self.peek_head() {
            return self.err(self.here(), format!("unexpected {h}"));
        }
        self.expect_rparen()?;
        Ok(node(rule, premises, discharges, eigen, concl))
    }
}

pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        lexer: lex(src),
        pos: 0,
    };
    let f = p.parse_formula(MAX_DEPTH)?;
    if p.peek().is_some() {
        return p.err(p.here(), "trailing input after formula");
    }
    Ok(f)
}

pub fn parse_deduction(src: &str) -> Result<Deduction, ParseError> {
    let mut p = Parser {
        lexer: lex(src),
        pos: 0,
    };
    let d = p.parse_deduction(MAX_DEPTH)?;
    if p.peek().is_some() {
        return p.err(p.here(), "trailing input after deduction");
    }
    Ok(d)
}

fn write_term(t: &Term, out: &mut String) {
    match t {
        Term::Sym(n) => out.push_str(n),
        Term::Fn(n, args) => {
            let _ = write!(out, "(fn {n}");
            for a in args {
                out.push(' ');
                write_term(a, out);
            }
            out.push(')');
        }
    }
}

fn write_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::Atom(n, args) => {
            let _ = write!(out, "(at {n}");
            for a in args {
                out.push(' ');
                write_term(a, out);
            }
            out.push(')');
        }
        Formula::Bottom => out.push_str("(bot)"),
        Formula::Not(a) => {
            out.push_str("(not ");
            write_formula(a, out);
            out.push(')');
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            out.push_str(match f {
                Formula::And(..) => "(and ",
                Formula::Or(..) => "(or ",
                _ => "(imp ",
            });
            write_formula(a, out);
            out.push(' ');
            write_formula(b, out);
            out.push(')');
        }
        Formula::Exists(x, a) | Formula::Forall(x, a) => {
            let _ = write!(
                out,
                "({} {x} ",
                if matches!(f, Formula::Exists(..)) { "ex" } else { "all" }
            );
            write_formula(a, out);
            out.push(')');
        }
    }
}

fn write_deduction(d: &Deduction, out: &mut String) {
    match d {
        Deduction::Leaf { label, formula } => {
            let _ = write!(out, "(assume {label} ");
            write_formula(formula, out);
            out.push(')');
        }
        Deduction::Node(n) => {
            let _ = write!(out, "({}", n.rule.name());
            for p in &n.premises {
                out.push(' ');
                write_deduction(p, out);
            }
            if let Some(c) = &n.concl {
                out.push(' ');
                write_formula(c, out);
            }
            for group in &n.discharges {
                out.push_str(" (dis");
                for (l, f) in group {
                    let _ = write!(out, " ({l} ");
                    write_formula(f, out);
                    out.push(')');
                }
                out.push(')');
            }
            if let Some(e) = &n.eigen {
                let _ = write!(out, " (eigen {e})");
            }
            out.push(')');
        }
    }
}

/// Canonical single-line form; reparses to an identical tree.
pub fn render_sexpr(d: &Deduction) -> String {
    let mut out = String::new();
    write_deduction(d, &mut out);
    out.push('\n');
    out
}

pub fn render_formula_sexpr(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

/// Indented tree with discharge superscripts: discharged assumption
/// occurrences render as `[A]^i`, open ones as `A^i`, applications as the
/// rule name with the labels it discharges and its conclusion.
pub fn render_ascii(d: &Deduction) -> String {
    let discharged: std::collections::BTreeSet<u32> = d
        .discharge_listings()
        .into_iter()
        .map(|(_, _, l, _)| l)
        .collect();
    let mut out = String::new();
    ascii_walk(d, &discharged, "", "", &mut out);
    out
}

fn ascii_walk(
    d: &Deduction,
    discharged: &std::collections::BTreeSet<u32>,
    lead: &str,
    child_lead: &str,
    out: &mut String,
) {
    out.push_str(lead);
    match d {
        Deduction::Leaf { label, formula } => {
            if discharged.contains(label) {
                let _ = writeln!(out, "[{formula}]^{label}");
            } else {
                let _ = writeln!(out, "{formula}^{label}");
            }
        }
        Deduction::Node(n) => {
            out.push_str(n.rule.name());
            let labels: Vec<String> = n
                .discharges
                .iter()
                .flatten()
                .map(|(l, _)| l.to_string())
                .collect();
            if !labels.is_empty() {
                let _ = write!(out, " {}", labels.join(","));
            }
            if let Some(e) = &n.eigen {
                let _ = write!(out, " eigen {e}");
            }
            match d.conclusion() {
                Some(c) => {
                    let _ = writeln!(out, " \u{22a2} {c}");
                }
                None => out.push('\n'),
            }
            for (i, p) in n.premises.iter().enumerate() {
                let last = i + 1 == n.premises.len();
                let branch = if last { "\u{2514}\u{2500} " } else { "\u{251c}\u{2500} " };
                let cont = if last { "   " } else { "\u{2502}  " };
                ascii_walk(
                    p,
                    discharged,
                    &format!("{child_lead}{branch}"),
                    &format!("{child_lead}{cont}"),
                    out,
                );
            }
        }
    }
}

fn latex_term(t: &Term, out: &mut String) {
    match t {
        Term::Sym(n) => out.push_str(n),
        Term::Fn(n, args) => {
            let _ = write!(out, "{n}(");
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                latex_term(a, out);
            }
            out.push(')');
        }
    }
}

fn latex_formula(f: &Formula, out: &mut String) {
    fn prec(f: &Formula) -> u8 {
        match f {
            Formula::Atom(..)
            | Formula::Bottom
            | Formula::Not(_)
            | Formula::Exists(..)
            | Formula::Forall(..) => 4,
            Formula::And(..) => 3,
            Formula::Or(..) => 2,
            Formula::Imp(..) => 1,
        }
    }
    fn child(f: &Formula, parent: u8, out: &mut String) {
        if prec(f) <= parent {
            out.push('(');
            latex_formula(f, out);
            out.push(')');
        } else {
            latex_formula(f, out);
        }
    }
    match f {
        Formula::Atom(n, args) => {
            out.push_str(n);
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    latex_term(a, out);
                }
                out.push(')');
            }
        }
        Formula::Bottom => out.push_str("\\bot"),
        Formula::Not(a) => {
            out.push_str("\\neg ");
            if prec(a) < 4 {
                out.push('(');
                latex_formula(a, out);
                out.push(')');
            } else {
                latex_formula(a, out);
            }
        }
        Formula::And(a, b) => {
            child(a, 3, out);
            out.push_str(" \\land ");
            child(b, 3, out);
        }
        Formula::Or(a, b) => {
            child(a, 2, out);
            out.push_str(" \\lor ");
            child(b, 2, out);
        }
        Formula::Imp(a, b) => {
            child(a, 1, out);
            out.push_str(" \\supset ");
            child(b, 1, out);
        }
        Formula::Exists(x, a) | Formula::Forall(x, a) => {
            let _ = write!(
                out,
                "{}{x} ",
                if matches!(f, Formula::Exists(..)) { "\\exists " } else { "\\forall " }
            );
            if prec(a) < 4 {
                out.push('(');
                latex_formula(a, out);
                out.push(')');
            } else {
                latex_formula(a, out);
            }
        }
    }
}

fn latex_rule_symbol(rule: RuleId) -> &'static str {
    match rule {
        RuleId::AndI | RuleId::AndIc => "\\land I",
        RuleId::AndE => "\\land E",
        RuleId::OrIL | RuleId::OrIR | RuleId::OrILc | RuleId::OrIRc => "\\lor I",
        RuleId::OrE => "\\lor E",
        RuleId::ImpI | RuleId::ImpIc => "\\supset I",
        RuleId::Tr => "TR",
        RuleId::ImpE => "\\supset E",
        RuleId::NotI => "\\neg I",
        RuleId::NotE => "\\neg E",
        RuleId::ExI | RuleId::ExIc => "\\exists I",
        RuleId::ExE => "\\exists E",
        RuleId::AllI => "\\forall I",
        RuleId::AllE => "\\forall E",
        RuleId::BotE => "\\bot E",
    }
}

/// Proof-tree markup in the style of the bussproofs package.
pub fn render_latex(d: &Deduction) -> String {
    let discharged: std::collections::BTreeSet<u32> = d
        .discharge_listings()
        .into_iter()
        .map(|(_, _, l, _)| l)
        .collect();
    let mut out = String::from("\\begin{prooftree}\n");
    latex_walk(d, &discharged, &mut out);
    out.push_str("\\end{prooftree}\n");
    out
}

fn latex_walk(d: &Deduction, discharged: &std::collections::BTreeSet<u32>, out: &mut String) {
    match d {
        Deduction::Leaf { label, formula } => {
            let mut f = String::new();
            latex_formula(formula, &mut f);
            if discharged.contains(label) {
                let _ = writeln!(out, "\\AxiomC{{$[{f}]^{{{label}}}$}}");
            } else {
                let _ = writeln!(out, "\\AxiomC{{${f}^{{{label}}}$}}");
            }
        }
        Deduction::Node(n) => {
            for p in &n.premises {
                latex_walk(p, discharged, out);
            }
            let labels: Vec<String> = n
                .discharges
                .iter()
                .flatten()
                .map(|(l, _)| l.to_string())
                .collect();
            if labels.is_empty() {
                let _ = writeln!(out, "\\RightLabel{{$_{{{}}}$}}", latex_rule_symbol(n.rule));
            } else {
                let _ = writeln!(
                    out,
                    "\\RightLabel{{$_{{{} \\ {}}}$}}",
                    latex_rule_symbol(n.rule),
                    labels.join(", ")
                );
            }
            let mut c = String::new();
            match d.conclusion() {
                Some(f) => latex_formula(&f, &mut c),
                None => c.push('?'),
            }
            let cmd = match n.premises.len() {
                0 => "\\AxiomC",
                1 => "\\UnaryInfC",
                2 => "\\BinaryInfC",
                _ => "\\TrinaryInfC",
            };
            let _ = writeln!(out, "{cmd}{{${c}$}}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::{check, eq_mod_labels, System};
    use crate::logic::*;

    const DERIVED_IMP_INTRO: &str = "(tr (impI (notE (assume 9 (not (at p))) (assume 2 (at p)) (at q)) (assume 1 (imp (at p) (at q))) (dis (1 (imp (at p) (at q))))) (assume 3 (imp (at p) (at q))) (dis (2 (at p))) (dis (3 (imp (at p) (at q)))))\n";

    #[test]
    fn parse_formulas() {
        assert_eq!(parse_formula("(imp (at P) (at P))").unwrap(), imp(atom("P"), atom("P")));
        assert_eq!(
            parse_formula("(ex x (at F x (fn s x)))").unwrap(),
            ex("x", Formula::Atom("F".into(), vec![sym("x"), func("s", vec![sym("x")])]))
        );
        assert_eq!(parse_formula("(bot)").unwrap(), bot());
        assert!(parse_formula("(imp (at P))").is_err());
        assert!(parse_formula("(widget)").is_err());
        assert!(parse_formula("(at P) junk").is_err());
    }

    #[test]
    fn parse_leaf() {
        let d = parse_deduction("(assume 1 (at A))").unwrap();
        assert_eq!(d, leaf(1, atom("A")));
    }

    #[test]
    fn parse_derived_imp_intro() {
        let d = parse_deduction(DERIVED_IMP_INTRO).unwrap();
        let report = check(&d, System::C);
        assert!(report.valid, "{:?}", report.diagnostics);
        assert_eq!(report.conclusion, Some(imp(atom("p"), atom("q"))));
        assert_eq!(render_sexpr(&d), DERIVED_IMP_INTRO);
    }

    #[test]
    fn roundtrip_is_identity() {
        for src in [
            "(assume 7 (and (at p) (or (at q) (bot))))",
            DERIVED_IMP_INTRO,
            "(notE (assume 1 (not (at p))) (assume 2 (at p)) (at q))",
            "(exE (assume 1 (ex x (at F x))) (exI (assume 2 (at F a)) (assume 3 (ex x (at F x))) (dis (3 (ex x (at F x))))) (dis (2 (at F a))) (eigen a))",
            "(botE (assume 1 (bot)) (at p))",
            "(impIc (assume 1 (at q)) (imp (at p) (at q)) (dis))",
        ] {
            let d = parse_deduction(src).unwrap();
            let rendered = render_sexpr(&d);
            let d2 = parse_deduction(&rendered).unwrap();
            assert_eq!(d, d2);
            assert_eq!(render_sexpr(&d2), rendered);
        }
    }

    #[test]
    fn discharge_groups_are_sorted_on_parse() {
        let src = "(orE (assume 1 (or (at p) (at p))) (assume 3 (at p)) (assume 2 (at p)) (dis (3 (at p))) (dis (2 (at p))))";
        let d = parse_deduction(src).unwrap();
        let rendered = render_sexpr(&d);
        assert_eq!(parse_deduction(&rendered).unwrap(), d);
    }

    #[test]
    fn error_positions() {
        let err = parse_deduction("(assume x (at p))").unwrap_err();
        assert_eq!(err.span.line, 1);
        assert_eq!(err.span.column, 9);
        let err = parse_deduction("(andI\n  (assume 1 (at p))\n  (frob))").unwrap_err();
        assert_eq!(err.span.line, 3);
        assert!(err.message.contains("frob"));
    }

    #[test]
    fn deep_nesting_is_rejected_not_fatal() {
        let bomb = "(".repeat(100_000);
        assert!(parse_deduction(&bomb).is_err());
        let deep = format!("{}{}{}", "(not ".repeat(10_000), "(bot)", ")".repeat(10_000));
        assert!(parse_formula(&deep).is_err());
    }

    #[test]
    fn comments_and_whitespace() {
        let src = "; leading comment\n(assume 1 ; the label\n  (at p))\n";
        assert_eq!(parse_deduction(src).unwrap(), leaf(1, atom("p")));
    }

    #[test]
    fn ascii_render_shows_discharges() {
        let d = parse_deduction(DERIVED_IMP_INTRO).unwrap();
        let text = render_ascii(&d);
        assert!(text.contains("[p \u{2283} q]^1"));
        assert!(text.contains("\u{ac}p^9"));
        assert!(text.contains("tr 2,3"));
    }

    #[test]
    fn latex_render_mirrors_prooftrees() {
        let d = parse_deduction(DERIVED_IMP_INTRO).unwrap();
        let text = render_latex(&d);
        assert!(text.starts_with("\\begin{prooftree}"));
        assert!(text.contains("\\AxiomC{$[p \\supset q]^{1}$}"));
        assert!(text.contains("\\RightLabel{$_{TR \\ 2, 3}$}"));
        assert!(text.contains("\\BinaryInfC{$p \\supset q$}"));
    }

    #[test]
    fn explicit_conclusion_only_on_parse_when_given() {
        let d = parse_deduction("(notE (assume 1 (not (at p))) (assume 2 (at p)) (at q))").unwrap();
        assert_eq!(d.conclusion(), Some(atom("q")));
        let d = parse_deduction("(andI (assume 1 (at p)) (assume 2 (at q)) (assume 3 (and (at p) (at q))) (dis (3 (and (at p) (at q)))))").unwrap();
        assert!(check(&d, System::C).valid);
    }

    #[test]
    fn label_relabeling_respected_by_comparison() {
        let a = parse_deduction(DERIVED_IMP_INTRO).unwrap();
        let b_src = DERIVED_IMP_INTRO
            .replace(" 9 ", " 90 ")
            .replace("(assume 2 ", "(assume 20 ")
            .replace("(dis (2 ", "(dis (20 ");
        let b = parse_deduction(&b_src).unwrap();
        assert!(eq_mod_labels(&a, &b));
    }
}
