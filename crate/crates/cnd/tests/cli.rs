//! End-to-end tests of the command-line interface: exit codes, exact
//! output bytes, diagnostics placement and environment handling.

use std::path::PathBuf;
use std::process::{Command, Output};

use cnd::{check, eq_mod_labels, parse_deduction, RuleId, System};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Invocation with color disabled so the byte-level assertions are stable.
fn cnd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cnd"))
        .args(args)
        .current_dir(fixtures())
        .env("CND_COLOR", "0")
        .output()
        .expect("the binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

#[test]
fn check_reports_the_judgement() {
    let out = cnd(&["check", "imp_refl.cnd"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "imp_refl.cnd: valid in cexall, concludes p ⊃ p, closed\n",
    );

    let out = cnd(&["check", "and_detour.cnd", "--system", "c"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "and_detour.cnd: valid in c, concludes p, open: p; q\n",
    );
}

#[test]
fn check_rejects_with_positioned_diagnostics() {
    let dir = tempfile::tempdir().expect("tempdir");
    let bad = dir.path().join("bad.cnd");
    std::fs::write(&bad, "(andI (assume 1 (at p))").expect("write");
    let out = cnd(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "");
    let err = stderr(&out);
    assert!(
        err.contains("1:24: expected closing parenthesis"),
        "stderr: {err}",
    );

    let out = cnd(&["check", "forall_instance.cnd", "--system", "c"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("at root: rule allE is not available in system c"), "stderr: {err}");
}

#[test]
fn normalize_prints_the_normal_form() {
    let out = cnd(&["normalize", "and_detour.cnd"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "(assume 5 (at p))\n");

    let again = cnd(&["normalize", "and_detour.cnd"]);
    assert_eq!(out.stdout, again.stdout, "output is byte-identical across runs");
}

#[test]
fn normalize_trace_narrates_each_step() {
    let out = cnd(&["normalize", "and_detour.cnd", "--trace"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "step 0: and-detour at 2.0: ⟨1, 1⟩ -> ⟨0, 0⟩\n(assume 5 (at p))\n",
    );
}

#[test]
fn normalize_refuses_universal_quantifier_material() {
    let out = cnd(&["normalize", "forall_instance.cnd"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout(&out), "");
    let err = stderr(&out);
    assert!(
        err.contains("universal-quantifier material")
            && err.contains("can be checked but not normalized"),
        "stderr: {err}",
    );
}

#[test]
fn normalize_respects_the_step_budget() {
    let out = cnd(&["normalize", "and_detour.cnd", "--max-steps", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("budget of 0 steps exhausted"), "stderr: {err}");

    // An already-normal deduction needs no steps at all.
    let out = cnd(&["normalize", "imp_refl.cnd", "--max-steps", "0"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn normalize_out_writes_the_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    let target = dir.path().join("nf.cnd");
    let out = cnd(&["normalize", "and_detour.cnd", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "");
    assert_eq!(
        std::fs::read_to_string(&target).expect("output file exists"),
        "(assume 5 (at p))\n",
    );

    let out = cnd(&[
        "normalize",
        "and_detour.cnd",
        "imp_refl.cnd",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--out needs exactly one FILE"));
}

#[test]
fn analyze_json_is_machine_readable() {
    let out = cnd(&["analyze", "and_detour.cnd", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1, "one compact line per file");
    let v: serde_json::Value = serde_json::from_str(&text).expect("valid json");
    assert_eq!(v["schema"], 1);
    assert_eq!(v["file"], "and_detour.cnd");
    assert_eq!(v["normal"], false);
    assert_eq!(v["rank"]["d"], 1);
    assert_eq!(v["rank"]["l"], 1);
    assert_eq!(v["maximal_formulas"][0]["path"], serde_json::json!([2, 0]));
    assert!(v["branches"].as_array().is_some_and(|b| !b.is_empty()));
}

#[test]
fn render_formats() {
    let out = cnd(&["render", "imp_refl.cnd", "--format", "latex"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("\\begin{prooftree}\n"), "got: {text}");
    assert!(text.ends_with("\\end{prooftree}\n"), "got: {text}");

    let out = cnd(&["render", "and_detour.cnd", "--format", "ascii"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("andI") && text.contains("└─"), "got: {text}");

    let out = cnd(&["render", "and_detour.cnd", "--format", "sexpr"]);
    assert_eq!(out.status.code(), Some(0));
    let fixture = std::fs::read_to_string(fixtures().join("and_detour.cnd")).expect("fixture");
    assert_eq!(
        parse_deduction(&stdout(&out)).expect("rendered form parses"),
        parse_deduction(&fixture).expect("fixture parses"),
    );
}

#[test]
fn translate_both_directions() {
    let out = cnd(&["translate", "derived_imp_intro.cnd", "--to", "conventional"]);
    assert_eq!(out.status.code(), Some(0));
    let conventional = parse_deduction(&stdout(&out)).expect("translation parses");
    assert_eq!(conventional.as_node().expect("an application").rule, RuleId::ImpIc);
    assert!(check(&conventional, System::C).valid);

    let dir = tempfile::tempdir().expect("tempdir");
    let file = dir.path().join("conventional.cnd");
    std::fs::write(&file, stdout(&out)).expect("write");
    let back = cnd(&["translate", file.to_str().unwrap(), "--to", "general"]);
    assert_eq!(back.status.code(), Some(0));
    let general = parse_deduction(&stdout(&back)).expect("translation parses");
    let original = parse_deduction(
        &std::fs::read_to_string(fixtures().join("derived_imp_intro.cnd")).expect("fixture"),
    )
    .expect("fixture parses");
    assert!(
        eq_mod_labels(&general, &original),
        "round trip differs from the original up to labels:\n{}",
        stdout(&back),
    );
}

#[test]
fn gen_is_deterministic_and_valid() {
    let out = cnd(&["gen", "--seed", "3", "--size", "12", "--count", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    for line in text.lines() {
        let d = parse_deduction(line).expect("generated deduction parses");
        assert!(check(&d, System::C).valid);
        assert!(d.size() <= 12);
    }

    let again = cnd(&["gen", "--seed", "3", "--size", "12", "--count", "2"]);
    assert_eq!(out.stdout, again.stdout, "generation is deterministic");

    let shifted = cnd(&["gen", "--seed", "4", "--size", "12"]);
    assert_ne!(out.stdout, shifted.stdout, "the seed matters");
}

#[test]
fn color_is_opt_in() {
    let plain = cnd(&["check", "nosuch.cnd"]);
    assert_eq!(plain.status.code(), Some(1));
    assert!(stderr(&plain).starts_with("error: "), "got: {}", stderr(&plain));

    let colored = Command::new(env!("CARGO_BIN_EXE_cnd"))
        .args(["check", "nosuch.cnd"])
        .current_dir(fixtures())
        .env("CND_COLOR", "1")
        .output()
        .expect("the binary runs");
    assert_eq!(colored.status.code(), Some(1));
    assert!(
        stderr(&colored).starts_with("\u{1b}[31merror:\u{1b}[0m "),
        "got: {:?}",
        stderr(&colored),
    );
}

#[test]
fn several_files_fold_to_the_worst_exit_code() {
    let out = cnd(&["check", "imp_refl.cnd", "nosuch.cnd"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("imp_refl.cnd: valid"));
    assert!(stderr(&out).contains("nosuch.cnd"));

    // The universal-quantifier refusal outranks an ordinary failure.
    let out = cnd(&["normalize", "nosuch.cnd", "forall_instance.cnd"]);
    assert_eq!(out.status.code(), Some(2));
}
