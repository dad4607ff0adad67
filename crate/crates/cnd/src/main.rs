//! Batch command-line frontend: check, normalize, analyze, render,
//! translate and generate deductions stored as s-expression `.cnd` files.
//!
//! Exit codes: 0 on success, 1 for parse or check failures (positioned
//! diagnostics on the error stream), 2 when normalization is refused
//! because the deduction uses universal-quantifier rules. With several
//! files the worst code wins. Identical inputs and flags produce
//! byte-identical output; the `CND_COLOR` variable (`0` or `1`) switches
//! color on the error stream.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cnd::syntax::render_formula_sexpr;
use cnd::{
    branches, check, ei_split, from_conventional, gen_deduction, is_normal, maximal_formulas,
    maximal_segments, normalize, parse_deduction, rank, render_ascii, render_latex, render_sexpr,
    subformula_audit, to_conventional, to_unique_discharge, Deduction, NormalizeError, RedexKind,
    System, TraceStep, DEFAULT_BUDGET,
};

#[derive(Parser)]
#[command(
    name = "cnd",
    version,
    about = "Check, normalize and analyze classical natural deduction proofs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that each file holds a valid deduction and report its shape.
    Check {
        /// Deduction files in s-expression form.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Deductive system to check against.
        #[arg(long, value_enum, default_value_t = SystemArg::Cexall)]
        system: SystemArg,
    },
    /// Reduce each deduction to normal form and print it.
    Normalize {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Print one reduction step per line before the normal form.
        #[arg(long)]
        trace: bool,
        /// Give up after this many reduction steps.
        #[arg(long, value_name = "N")]
        max_steps: Option<usize>,
        /// Write the normal form here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Report rank, maximal formulas and segments, branches and the
    /// subformula audit.
    Analyze {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Emit one machine-readable JSON report per file.
        #[arg(long)]
        json: bool,
    },
    /// Pretty-print each deduction.
    Render {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum)]
        format: Format,
    },
    /// Rewrite between the general rules and the conventional
    /// introductions.
    Translate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum)]
        to: Direction,
    },
    /// Generate pseudorandom valid deductions, one per line.
    Gen {
        /// Seed for the first deduction; later ones use seed+1, seed+2, ...
        #[arg(long)]
        seed: u64,
        /// Upper bound on the number of assumptions and rule applications.
        #[arg(long, value_name = "N")]
        size: usize,
        /// How many deductions to emit.
        #[arg(long, value_name = "M", default_value_t = 1)]
        count: usize,
        /// Deductive system whose rules the generator may use.
        #[arg(long, value_enum, default_value_t = SystemArg::C)]
        system: SystemArg,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemArg {
    C,
    Cex,
    Cexall,
}

impl From<SystemArg> for System {
    fn from(a: SystemArg) -> System {
        match a {
            SystemArg::C => System::C,
            SystemArg::Cex => System::CEx,
            SystemArg::Cexall => System::CExAll,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Ascii,
    Latex,
    Sexpr,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    Conventional,
    General,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { files, system } => for_each(&files, |p, d| cmd_check(p, d, system.into())),
        Command::Normalize {
            files,
            trace,
            max_steps,
            out,
        } => {
            if out.is_some() && files.len() > 1 {
                error("--out needs exactly one FILE");
                return ExitCode::from(1);
            }
            for_each(&files, |p, d| {
                cmd_normalize(p, d, trace, max_steps, out.as_deref())
            })
        }
        Command::Analyze { files, json } => for_each(&files, |p, d| cmd_analyze(p, d, json)),
        Command::Render { files, format } => for_each(&files, |_, d| {
            match format {
                Format::Ascii => print!("{}", render_ascii(&d)),
                Format::Latex => print!("{}", render_latex(&d)),
                Format::Sexpr => print!("{}", render_sexpr(&d)),
            }
            0
        }),
        Command::Translate { files, to } => for_each(&files, |p, d| cmd_translate(p, &d, to)),
        Command::Gen {
            seed,
            size,
            count,
            system,
        } => {
            for s in seed..seed + count as u64 {
                print!("{}", render_sexpr(&gen_deduction(s, size, system.into())));
            }
            0
        }
    };
    ExitCode::from(code)
}

/// Parses every file and folds the worst per-file exit code.
fn for_each(files: &[PathBuf], mut run: impl FnMut(&Path, Deduction) -> u8) -> u8 {
    let mut worst = 0;
    for path in files {
        let code = match fs::read_to_string(path) {
            Ok(src) => match parse_deduction(&src) {
                Ok(d) => run(path, d),
                Err(e) => {
                    error(&format!("{}:{}", path.display(), e));
                    1
                }
            },
            Err(e) => {
                error(&format!("{}: {}", path.display(), e));
                1
            }
        };
        worst = worst.max(code);
    }
    worst
}

fn error(message: &str) {
    if std::env::var("CND_COLOR").as_deref() == Ok("1") {
        eprintln!("\u{1b}[31merror:\u{1b}[0m {message}");
    } else {
        eprintln!("error: {message}");
    }
}

fn cmd_check(path: &Path, d: Deduction, system: System) -> u8 {
    let report = check(&d, system);
    if !report.valid {
        for diag in &report.diagnostics {
            error(&format!("{}: {}", path.display(), diag));
        }
        return 1;
    }
    let opens = report.open_formulas();
    let mut line = format!("{}: valid in {}", path.display(), system.name());
    if let Some(c) = &report.conclusion {
        let _ = write!(line, ", concludes {c}");
    }
    if opens.is_empty() {
        line.push_str(", closed");
    } else {
        let listed: Vec<String> = opens.iter().map(|f| f.to_string()).collect();
        let _ = write!(line, ", open: {}", listed.join("; "));
    }
    println!("{line}");
    0
}

fn cmd_normalize(
    path: &Path,
    d: Deduction,
    trace: bool,
    max_steps: Option<usize>,
    out: Option<&Path>,
) -> u8 {
    match normalize(&d, max_steps.unwrap_or(DEFAULT_BUDGET)) {
        Ok((normal, steps)) => {
            if trace {
                for (i, step) in steps.iter().enumerate() {
                    println!("{}", trace_line(i, step));
                }
            }
            let text = render_sexpr(&normal);
            match out {
                Some(target) => {
                    if let Err(e) = fs::write(target, text) {
                        error(&format!("{}: {}", target.display(), e));
                        return 1;
                    }
                }
                None => print!("{text}"),
            }
            0
        }
        Err(e @ NormalizeError::Universal { .. }) => {
            error(&format!("{}: {}", path.display(), e));
            2
        }
        Err(e) => {
            error(&format!("{}: {}", path.display(), e));
            1
        }
    }
}

fn trace_line(index: usize, step: &TraceStep) -> String {
    format!(
        "step {index}: {} at {}: {} -> {}",
        kind_label(&step.redex.kind),
        path_label(&step.redex.site),
        step.rank_before,
        step.rank_after,
    )
}

fn kind_label(kind: &RedexKind) -> String {
    match kind {
        RedexKind::DetourAnd => "and-detour".into(),
        RedexKind::DetourOr => "or-detour".into(),
        RedexKind::DetourImp => "imp-detour".into(),
        RedexKind::DetourTr => "tr-detour".into(),
        RedexKind::DetourNot => "not-detour".into(),
        RedexKind::DetourEx => "ex-detour".into(),
        RedexKind::Permute(feeder, sink) => format!("permute {feeder}/{sink}"),
    }
}

fn path_label(path: &[usize]) -> String {
    if path.is_empty() {
        "root".into()
    } else {
        let parts: Vec<String> = path.iter().map(|i| i.to_string()).collect();
        parts.join(".")
    }
}

fn cmd_analyze(path: &Path, d: Deduction, json: bool) -> u8 {
    let report = check(&d, System::CExAll);
    if !report.valid {
        for diag in &report.diagnostics {
            error(&format!("{}: {}", path.display(), diag));
        }
        return 1;
    }
    if json {
        println!("{}", analyze_json(path, &d));
    } else {
        print!("{}", analyze_text(path, &d));
    }
    0
}

fn analyze_text(path: &Path, d: &Deduction) -> String {
    let mut out = String::new();
    let r = rank(d);
    let shape = if is_normal(d) { "normal" } else { "not normal" };
    let _ = writeln!(out, "{}: rank {r}, {shape}", path.display());

    let formulas = maximal_formulas(d);
    let _ = writeln!(out, "  maximal formulas ({}):", formulas.len());
    for p in &formulas {
        let f = d.at_path(p).and_then(|s| s.conclusion());
        let shown = f.map_or_else(|| "?".into(), |f| f.to_string());
        let _ = writeln!(out, "    at {}: {shown}", path_label(p));
    }

    let segments = maximal_segments(d);
    let _ = writeln!(out, "  maximal segments ({}):", segments.len());
    for s in &segments {
        let from = path_label(&s.occurrences[0]);
        let to = path_label(s.sink());
        let _ = writeln!(
            out,
            "    {} -> {} (length {}): {}",
            from,
            to,
            s.length(),
            s.formula
        );
    }

    let all = branches(d);
    let _ = writeln!(out, "  branches ({}):", all.len());
    for b in &all {
        let split = ei_split(d, b);
        let order = b
            .order
            .map_or_else(|| "none".into(), |o| o.to_string());
        let ends = path_label(b.occurrences.last().expect("branches are non-empty"));
        let _ = writeln!(
            out,
            "    order {order}, {} occurrences ending at {ends}: E-part {}, minimal {}, I-part {}",
            b.occurrences.len(),
            split.e_part.len(),
            split.minimal.len(),
            split.i_part.len(),
        );
    }

    let audit = subformula_audit(d);
    if audit.is_empty() {
        let _ = writeln!(out, "  subformula audit: clean");
    } else {
        let _ = writeln!(out, "  subformula audit ({} violations):", audit.len());
        for p in &audit {
            let f = d.at_path(p).and_then(|s| s.conclusion());
            let shown = f.map_or_else(|| "?".into(), |f| f.to_string());
            let _ = writeln!(out, "    at {}: {shown}", path_label(p));
        }
    }
    out
}

fn analyze_json(path: &Path, d: &Deduction) -> String {
    let r = rank(d);
    let formulas: Vec<serde_json::Value> = maximal_formulas(d)
        .iter()
        .map(|p| {
            let f = d.at_path(p).and_then(|s| s.conclusion());
            serde_json::json!({
                "path": p,
                "formula": f.map(|f| render_formula_sexpr(&f)),
            })
        })
        .collect();
    let segments: Vec<serde_json::Value> = maximal_segments(d)
        .iter()
        .map(|s| {
            serde_json::json!({
                "occurrences": s.occurrences,
                "formula": render_formula_sexpr(&s.formula),
                "degree": s.degree,
                "length": s.length(),
            })
        })
        .collect();
    let branch_reports: Vec<serde_json::Value> = branches(d)
        .iter()
        .map(|b| {
            let split = ei_split(d, b);
            serde_json::json!({
                "order": b.order,
                "occurrences": b.occurrences,
                "e_part": split.e_part,
                "minimal": split.minimal,
                "i_part": split.i_part,
            })
        })
        .collect();
    serde_json::json!({
        "schema": 1,
        "file": path.display().to_string(),
        "rank": {"d": r.d, "l": r.l},
        "normal": is_normal(d),
        "maximal_formulas": formulas,
        "maximal_segments": segments,
        "branches": branch_reports,
        "subformula_audit": subformula_audit(d),
    })
    .to_string()
}

fn cmd_translate(path: &Path, d: &Deduction, to: Direction) -> u8 {
    let translated = match to {
        Direction::Conventional => match to_conventional(&to_unique_discharge(d)) {
            Ok(t) => t,
            Err(e) => {
                error(&format!("{}: {}", path.display(), e));
                return 1;
            }
        },
        Direction::General => from_conventional(d),
    };
    print!("{}", render_sexpr(&translated));
    0
}
