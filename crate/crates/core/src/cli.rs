//! Command-line front end.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::Command;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::aspif::{parse_aspif, AspifProgram};
use crate::assumption::{braces, AssumptionReport};
use crate::egraph::{build_egraph, EGraphError};
use crate::node::{render_set, ENode, Glyphs, Lit};
use crate::oracle::{check_answer_set, enumerate_answer_sets, OracleError, DEFAULT_ATOM_CAP};
use crate::pipeline::analyze;
use crate::program::{reconstruct_rules, GroundProgram, Warning};
use crate::render::{to_dot, to_json_value, to_text};

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_RECONSTRUCT: i32 = 2;
pub const EXIT_ANSWER_SET: i32 = 3;
pub const EXIT_UNKNOWN_LITERAL: i32 = 4;
pub const EXIT_NO_GRAPH: i32 = 5;
pub const EXIT_OVER_CAP: i32 = 6;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "expasp",
    version,
    about = "Explanation graphs for answer sets of ground ASP programs"
)]
pub struct Cli {
    /// Ground the input with this command first and read aspif from its
    /// stdout. `{}` is replaced by the input path, otherwise the path is
    /// appended.
    #[arg(long, global = true, value_name = "CMD")]
    pub ground_cmd: Option<String>,

    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Print the reconstructed rules, the symbol table and NANT.
    Parse(InputArgs),
    /// Enumerate answer sets by brute force.
    Answersets {
        #[command(flatten)]
        input: InputArgs,
        /// Maximum number of atoms whose truth is guessed.
        #[arg(long, default_value_t = DEFAULT_ATOM_CAP)]
        cap: usize,
    },
    /// Print TA, T, T′, DA, min(B) and U.
    Assumptions(AssumptionsArgs),
    /// Print the supported sets and the constraint table.
    Supports {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, short = 'a')]
        answer_set: PathBuf,
        #[arg(long)]
        ascii: bool,
        #[arg(long)]
        no_check: bool,
    },
    /// Explain why a literal holds in an answer set.
    Explain(ExplainArgs),
}

#[derive(Args, Debug)]
pub struct AssumptionsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Answer set file; every answer set is analysed when omitted.
    #[arg(long, short = 'a')]
    answer_set: Option<PathBuf>,
    /// Print every candidate assumption set.
    #[arg(long)]
    all: bool,
    #[arg(long, default_value_t = DEFAULT_ATOM_CAP)]
    cap: usize,
    #[arg(long)]
    no_check: bool,
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// aspif file, or `-` for stdin.
    pub input: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dot,
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, short = 'a')]
    pub answer_set: PathBuf,
    /// Literal to explain: `a`, `~a` or `not a`.
    #[arg(long, short = 'l')]
    pub literal: String,
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    pub format: Format,
    #[arg(long, env = "EXPASP_MAX_GRAPHS", default_value_t = 1)]
    pub max_graphs: usize,
    #[arg(long)]
    pub ascii: bool,
    /// Skip checking that the answer set is one.
    #[arg(long)]
    pub no_check: bool,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn io_fail(e: io::Error) -> Failure {
    fail(EXIT_PARSE, e.to_string())
}

fn read_input(path: &Path, ground_cmd: Option<&str>) -> Result<String, Failure> {
    if let Some(template) = ground_cmd {
        let path = path.display().to_string();
        let cmd = if template.contains("{}") {
            template.replace("{}", &path)
        } else {
            format!("{template} {path}")
        };
        let out = Command::new("sh")
            .arg("-c")
            .arg(&cmd)
            .output()
            .map_err(|e| fail(EXIT_PARSE, format!("cannot run {cmd:?}: {e}")))?;
        // grounders use nonzero codes for satisfiability, so only missing
        // output counts as failure
        if out.stdout.is_empty() {
            return Err(fail(
                EXIT_PARSE,
                format!(
                    "{cmd:?} produced no output: {}",
                    String::from_utf8_lossy(&out.stderr)
                ),
            ));
        }
        return String::from_utf8(out.stdout).map_err(|e| fail(EXIT_PARSE, e.to_string()));
    }
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_fail)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
    }
}

fn load_aspif(input: &InputArgs, ground_cmd: Option<&str>) -> Result<AspifProgram, Failure> {
    let text = read_input(&input.input, ground_cmd)?;
    parse_aspif(&text).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", input.input.display())))
}

fn load_program(
    input: &InputArgs,
    ground_cmd: Option<&str>,
    err: &mut dyn Write,
) -> Result<(AspifProgram, GroundProgram), Failure> {
    let aspif = load_aspif(input, ground_cmd)?;
    let g = reconstruct_rules(&aspif).map_err(|e| fail(EXIT_RECONSTRUCT, e.to_string()))?;
    for w in &g.warnings {
        let Warning::UnsupportedWeightBody { statement } = w;
        writeln!(
            err,
            "warning: rule {statement} has a weight body with unequal weights; kept opaque"
        )
        .map_err(io_fail)?;
    }
    Ok((aspif, g))
}

/// Atom names separated by whitespace; lines starting with `%` are skipped.
pub fn parse_answer_set_file(text: &str) -> BTreeSet<String> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('%'))
        .flat_map(str::split_whitespace)
        .map(str::to_string)
        .collect()
}

fn load_answer(
    path: &Path,
    aspif: &AspifProgram,
    g: &GroundProgram,
    check: bool,
) -> Result<BTreeSet<u64>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| fail(EXIT_ANSWER_SET, format!("{}: {e}", path.display())))?;
    let names = parse_answer_set_file(&text);
    let atoms = g
        .atoms_from_names(names.iter().map(String::as_str))
        .map_err(|e| fail(EXIT_ANSWER_SET, e.to_string()))?;
    if check {
        let ok =
            check_answer_set(aspif, &names).map_err(|e| fail(EXIT_ANSWER_SET, e.to_string()))?;
        if !ok {
            return Err(fail(
                EXIT_ANSWER_SET,
                "the given atoms do not form an answer set",
            ));
        }
    }
    Ok(atoms)
}

fn cmd_parse(
    input: &InputArgs,
    ground_cmd: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let (aspif, g) = load_program(input, ground_cmd, err)?;
    if aspif.statements.is_empty() {
        return Ok(());
    }
    let mut text = String::from("% symbols\n");
    for a in g.symbols.named() {
        let marker = if a.is_fact { " fact" } else { "" };
        text.push_str(&format!("{} {}{marker}\n", a.id, a.name));
    }
    text.push_str("% rules\n");
    text.push_str(&g.dump_rules());
    text.push_str(&format!(
        "% NANT\nNANT = {}\n",
        braces(&g.names_of(&g.nant))
    ));
    out.write_all(text.as_bytes()).map_err(io_fail)
}

fn cmd_answersets(
    input: &InputArgs,
    cap: usize,
    ground_cmd: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let aspif = load_aspif(input, ground_cmd)?;
    let sets = enumerate_answer_sets(&aspif, cap).map_err(oracle_fail)?;
    if sets.is_empty() {
        writeln!(err, "UNSAT").map_err(io_fail)?;
    }
    for s in sets {
        let line: Vec<&str> = s.iter().map(String::as_str).collect();
        writeln!(out, "{}", line.join(" ")).map_err(io_fail)?;
    }
    Ok(())
}

fn oracle_fail(e: OracleError) -> Failure {
    match e {
        OracleError::TooLarge { .. } => fail(EXIT_OVER_CAP, e.to_string()),
        OracleError::Disjunction | OracleError::Program(_) => fail(EXIT_RECONSTRUCT, e.to_string()),
    }
}

fn render_da(report: &AssumptionReport) -> String {
    let entries: Vec<String> = report
        .da
        .iter()
        .map(|(k, sets)| {
            let sets: Vec<String> = sets.iter().map(braces).collect();
            format!("{k}:[{}]", sets.join(","))
        })
        .collect();
    format!("{{{}}}", entries.join(", "))
}

fn write_report(report: &AssumptionReport, all: bool, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{}", report.summary())?;
    writeln!(out, "T'={}", braces(&report.t_deferred))?;
    writeln!(out, "DA={}", render_da(report))?;
    let bs: Vec<String> = report.min_b_candidates.iter().map(braces).collect();
    writeln!(out, "min(B)=[{}]", bs.join(","))?;
    if report.fallback {
        writeln!(out, "% U shrunk from TA")?;
    }
    if all {
        for u in report.u_candidates() {
            writeln!(out, "U candidate: {}", braces(&u))?;
        }
    }
    Ok(())
}

fn cmd_assumptions(
    args: &AssumptionsArgs,
    ground_cmd: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let (aspif, g) = load_program(&args.input, ground_cmd, err)?;
    let answers: Vec<(Option<String>, BTreeSet<u64>)> = match &args.answer_set {
        Some(path) => vec![(None, load_answer(path, &aspif, &g, !args.no_check)?)],
        None => {
            let sets = enumerate_answer_sets(&aspif, args.cap).map_err(oracle_fail)?;
            if sets.is_empty() {
                writeln!(err, "UNSAT").map_err(io_fail)?;
            }
            sets.into_iter()
                .map(|s| {
                    let atoms = g
                        .atoms_from_names(s.iter().map(String::as_str))
                        .expect("answer set atoms are named");
                    (Some(braces(&s)), atoms)
                })
                .collect()
        }
    };
    for (label, answer) in answers {
        let analysis = analyze(&g, &answer).map_err(|e| fail(EXIT_ANSWER_SET, e.to_string()))?;
        if let Some(label) = label {
            writeln!(out, "% answer set {label}").map_err(io_fail)?;
        }
        write_report(&analysis.report, args.all, out).map_err(io_fail)?;
    }
    Ok(())
}

fn cmd_supports(
    input: &InputArgs,
    answer_set: &Path,
    ascii: bool,
    no_check: bool,
    ground_cmd: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let (aspif, g) = load_program(input, ground_cmd, err)?;
    let answer = load_answer(answer_set, &aspif, &g, !no_check)?;
    let analysis = analyze(&g, &answer).map_err(|e| fail(EXIT_ANSWER_SET, e.to_string()))?;
    let glyphs = if ascii {
        Glyphs::Ascii
    } else {
        Glyphs::Unicode
    };
    let text = format!(
        "% E_r\n{}% E_c\n{}",
        analysis.er.dump(glyphs),
        analysis.ec.dump(glyphs)
    );
    out.write_all(text.as_bytes()).map_err(io_fail)
}

fn cmd_explain(
    args: &ExplainArgs,
    ground_cmd: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let (aspif, g) = load_program(&args.input, ground_cmd, err)?;
    let answer = load_answer(&args.answer_set, &aspif, &g, !args.no_check)?;
    let lit = Lit::parse(&args.literal).ok_or_else(|| {
        fail(
            EXIT_UNKNOWN_LITERAL,
            format!("cannot read literal {:?}", args.literal),
        )
    })?;
    let Some(atom) = g.symbols.id_of(&lit.name) else {
        return Err(fail(
            EXIT_UNKNOWN_LITERAL,
            format!("unknown atom {}", lit.name),
        ));
    };
    let analysis = analyze(&g, &answer).map_err(|e| fail(EXIT_ANSWER_SET, e.to_string()))?;
    let truth = g.interpret(&answer).atom(atom);
    if truth == lit.negated {
        let state = if truth { "true" } else { "false" };
        return Err(fail(
            EXIT_UNKNOWN_LITERAL,
            format!(
                "{} is {state} in the answer set; query {}",
                lit.name,
                lit.negate()
            ),
        ));
    }
    let root = ENode::Lit(lit);
    let u = &analysis.report.chosen_u;
    let graphs =
        build_egraph(&analysis.e, u, &root, args.max_graphs.max(1)).map_err(|e| match e {
            EGraphError::UnknownLiteral(_) => fail(EXIT_UNKNOWN_LITERAL, e.to_string()),
            EGraphError::NoValidGraph(_) => fail(EXIT_NO_GRAPH, e.to_string()),
        })?;
    let glyphs = if args.ascii {
        Glyphs::Ascii
    } else {
        Glyphs::Unicode
    };
    let rendered = match args.format {
        Format::Dot => graphs
            .iter()
            .map(|gr| to_dot(gr, glyphs))
            .collect::<String>(),
        Format::Text => graphs
            .iter()
            .map(|gr| to_text(gr, glyphs))
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Json => {
            let value = if args.max_graphs <= 1 {
                to_json_value(&graphs[0], glyphs)
            } else {
                serde_json::Value::Array(
                    graphs.iter().map(|gr| to_json_value(gr, glyphs)).collect(),
                )
            };
            let mut s = serde_json::to_string_pretty(&value).expect("serializable");
            s.push('\n');
            s
        }
    };
    writeln!(
        err,
        "assumed: {}",
        render_set(
            &u.iter().map(|a| ENode::neg_atom(a.clone())).collect(),
            glyphs,
        )
    )
    .map_err(io_fail)?;
    match &args.out {
        Some(path) => fs::write(path, rendered)
            .map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display()))),
        None => out.write_all(rendered.as_bytes()).map_err(io_fail),
    }
}

/// Run the command line `args`; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                let _ = write!(out, "{e}");
                0
            };
        }
    };
    let ground = cli.ground_cmd.as_deref();
    let result = match &cli.command {
        Cmd::Parse(input) => cmd_parse(input, ground, out, err),
        Cmd::Answersets { input, cap } => cmd_answersets(input, *cap, ground, out, err),
        Cmd::Assumptions(args) => cmd_assumptions(args, ground, out, err),
        Cmd::Supports {
            input,
            answer_set,
            ascii,
            no_check,
        } => cmd_supports(input, answer_set, *ascii, *no_check, ground, out, err),
        Cmd::Explain(args) => cmd_explain(args, ground, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn answer_set_file_format() {
        let names = parse_answer_set_file("% comment a\nn(1) n(2)\n  c\n\tm(1)\n%x\n");
        let want: BTreeSet<String> = ["n(1)", "n(2)", "c", "m(1)"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(names, want);
    }

    #[test]
    fn usage_errors_are_distinct() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["expasp", "bogus"], &mut out, &mut err), EXIT_USAGE);
        assert_eq!(run(["expasp", "--help"], &mut out, &mut err), 0);
    }
}
