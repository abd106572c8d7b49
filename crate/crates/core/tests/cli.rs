use std::fs;
use std::path::{Path, PathBuf};

use expasp::cli::run;
use expasp::render::from_json;
use tempfile::TempDir;

const LOOP: &str = "asp 1 0 0\n1 0 1 1 0 1 -2\n1 0 1 2 0 1 -1\n4 1 a 1 1\n4 1 b 1 2\n0\n";
const SELF_DEFEAT: &str = "asp 1 0 0\n1 0 1 1 0 1 -1\n4 1 p 1 1\n0\n";
const SELF_SUPPORT: &str = "asp 1 0 0\n1 0 1 1 0 1 1\n4 1 p 1 1\n0\n";
const FACT: &str = "asp 1 0 0\n1 0 1 1 0 0\n4 1 p 1 1\n0\n";

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn expasp(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["expasp"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn parse_sample() {
    let r = expasp(&["parse", &data("sample.aspif")]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("% symbols"));
    assert!(r.out.contains(":- m(1), b."));
    assert!(r.out.lines().any(|l| l == "NANT = {a,b,c}"), "{}", r.out);
}

#[test]
fn parse_empty_program_prints_nothing() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "empty.aspif", "asp 1 0 0\n0\n");
    let r = expasp(&["parse", s(&p)]);
    assert_eq!((r.code, r.out.as_str()), (0, ""));
}

#[test]
fn parse_error_reports_line() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.aspif", "asp 1 0 0\n1 0 1");
    let r = expasp(&["parse", s(&p)]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("line 2"), "{}", r.err);
}

#[test]
fn answersets_of_sample() {
    let r = expasp(&["answersets", &data("sample.aspif")]);
    assert_eq!(r.code, 0);
    let lines: Vec<&str> = r.out.lines().collect();
    assert_eq!(lines.len(), 3, "{}", r.out);
    assert!(lines.contains(&"c m(1) n(1) n(2)"));
    assert!(lines.contains(&"c m(2) n(1) n(2)"));
    assert!(lines.contains(&"a n(1) n(2)"));
}

#[test]
fn answersets_unsat_and_fact() {
    let dir = TempDir::new().unwrap();
    let r = expasp(&["answersets", s(&write(&dir, "u.aspif", SELF_DEFEAT))]);
    assert_eq!((r.code, r.out.as_str()), (0, ""));
    assert!(r.err.contains("UNSAT"));
    let r = expasp(&["answersets", s(&write(&dir, "f.aspif", FACT))]);
    assert_eq!((r.code, r.out.as_str()), (0, "p\n"));
}

#[test]
fn answersets_over_cap() {
    let dir = TempDir::new().unwrap();
    let r = expasp(&["answersets", "--cap", "1", s(&write(&dir, "l.aspif", LOOP))]);
    assert_eq!(r.code, 6);
}

#[test]
fn assumptions_for_sample() {
    let r = expasp(&[
        "assumptions",
        &data("sample.aspif"),
        "-a",
        &data("sample.answer"),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    let lines: Vec<&str> = r.out.lines().collect();
    assert_eq!(lines[0], "TA={a,b} T={a} U={a}");
    assert!(lines.contains(&"T'={b}"));
    assert!(lines.contains(&"DA={b:[{a}]}"));
    assert!(lines.contains(&"min(B)=[{}]"));
}

#[test]
fn assumptions_over_every_answer_set() {
    let dir = TempDir::new().unwrap();
    let r = expasp(&["assumptions", "--all", s(&write(&dir, "l.aspif", LOOP))]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(
        r.out.contains("% answer set {a}\nTA={b} T={b} U={b}\n"),
        "{}",
        r.out
    );
    assert!(
        r.out.contains("% answer set {b}\nTA={a} T={a} U={a}\n"),
        "{}",
        r.out
    );
    assert_eq!(r.out.matches("U candidate:").count(), 2);
}

#[test]
fn assumptions_for_facts_only() {
    let dir = TempDir::new().unwrap();
    let prog = write(&dir, "f.aspif", FACT);
    let ans = write(&dir, "f.answer", "p\n");
    let r = expasp(&["assumptions", s(&prog), "-a", s(&ans)]);
    assert_eq!(r.code, 0);
    assert!(r.out.starts_with("TA={} T={} U={}\n"));
}

#[test]
fn supports_dump() {
    let r = expasp(&[
        "supports",
        &data("sample.aspif"),
        "-a",
        &data("sample.answer"),
        "--ascii",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    let (er, ec) = r.out.split_once("% E_c\n").unwrap();
    assert!(er.starts_with("% E_r\n"));
    assert_eq!(er.lines().count(), 8);
    assert!(ec.contains("triggered_constraint(c)"));
}

#[test]
fn explain_sample_formats() {
    let base = [
        "explain",
        &data("sample.aspif"),
        "-a",
        &data("sample.answer"),
        "-l",
        "m(1)",
    ];
    let dot = expasp(&base);
    assert_eq!(dot.code, 0, "{}", dot.err);
    assert!(dot.out.starts_with("digraph"));
    assert_eq!(dot.out.matches(" -> ").count(), 13);
    assert!(dot.err.contains("assumed: {~a}"));

    let mut args = base.to_vec();
    args.extend(["--format", "json"]);
    let json = expasp(&args);
    assert_eq!(from_json(&json.out).unwrap().edges.len(), 13);

    let mut args = base.to_vec();
    args.extend(["--format", "text", "--ascii"]);
    let text = expasp(&args);
    assert!(text.out.starts_with("root: m(1)\n"));
    assert!(text.out.contains("~a -circ-> assume"));
}

#[test]
fn explain_fact_is_two_nodes() {
    let r = expasp(&[
        "explain",
        &data("sample.aspif"),
        "-a",
        &data("sample.answer"),
        "-l",
        "n(1)",
        "--format",
        "json",
    ]);
    let g = from_json(&r.out).unwrap();
    assert_eq!((g.nodes.len(), g.edges.len()), (2, 1));
}

#[test]
fn explain_writes_file() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("g.dot");
    let r = expasp(&[
        "explain",
        &data("sample.aspif"),
        "-a",
        &data("sample.answer"),
        "-l",
        "~m(2)",
        "-o",
        s(&target),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.is_empty());
    assert!(fs::read_to_string(target)
        .unwrap()
        .contains("\"~m(2)\" -> \"-choice\""));
}

#[test]
fn explain_multiple_graphs_as_json_array() {
    let r = expasp(&[
        "explain",
        &data("sample.aspif"),
        "-a",
        &data("sample.answer"),
        "-l",
        "c",
        "--format",
        "json",
        "--max-graphs",
        "3",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    let v: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    assert!(v.is_array());
}

#[test]
fn explain_error_codes() {
    let sample = data("sample.aspif");
    let ans = data("sample.answer");
    // wrong polarity and unknown atom
    assert_eq!(
        expasp(&["explain", &sample, "-a", &ans, "-l", "~m(1)"]).code,
        4
    );
    assert_eq!(
        expasp(&["explain", &sample, "-a", &ans, "-l", "zz"]).code,
        4
    );

    let dir = TempDir::new().unwrap();
    let not_stable = write(&dir, "bad.answer", "n(1) n(2) c m(1) m(2)\n");
    assert_eq!(
        expasp(&["explain", &sample, "-a", s(&not_stable), "-l", "c"]).code,
        3
    );
    let unknown = write(&dir, "unknown.answer", "n(1) zz\n");
    assert_eq!(
        expasp(&["explain", &sample, "-a", s(&unknown), "-l", "c"]).code,
        3
    );

    let prog = write(&dir, "self.aspif", SELF_SUPPORT);
    let ans = write(&dir, "self.answer", "p\n");
    assert_eq!(
        expasp(&["explain", s(&prog), "-a", s(&ans), "-l", "p"]).code,
        3
    );
    let r = expasp(&["explain", s(&prog), "-a", s(&ans), "-l", "p", "--no-check"]);
    assert_eq!(r.code, 5, "{}", r.err);
}

#[test]
fn usage_errors() {
    assert_eq!(expasp(&["explain", &data("sample.aspif")]).code, 64);
    assert_eq!(expasp(&["frobnicate"]).code, 64);
    assert_eq!(expasp(&["parse", "/nonexistent/file.aspif"]).code, 1);
}

#[test]
fn ground_command_template() {
    let sample = data("sample.aspif");
    for template in ["cat", "cat {}"] {
        let r = expasp(&["--ground-cmd", template, "answersets", &sample]);
        assert_eq!(r.code, 0, "{template}: {}", r.err);
        assert_eq!(r.out.lines().count(), 3);
    }
    assert_eq!(expasp(&["--ground-cmd", "true", "parse", &sample]).code, 1);
}

#[test]
fn binary_exit_code_matches() {
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_expasp"))
        .args(["parse", &data("sample.aspif")])
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(String::from_utf8(status.stdout)
        .unwrap()
        .contains("NANT = {a,b,c}"));
}
