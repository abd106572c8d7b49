//! Reader and writer for the textual aspif format produced by ASP grounders.
//!
//! Only the statements needed to reconstruct ground programs are
//! interpreted: rules (`1`), outputs (`4`) and externals (`5`). Every other
//! statement is kept verbatim so that a program can be written back out.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: malformed header {found:?}, expected \"asp 1 0 0\"")]
    MalformedHeader { line: usize, found: String },
    #[error("line {line}: truncated statement")]
    TruncatedStatement { line: usize },
    #[error("line {line}: invalid field {field:?}: {reason}")]
    InvalidField {
        line: usize,
        field: String,
        reason: &'static str,
    },
    #[error("missing terminator line \"0\"")]
    MissingTerminator,
    #[error("line {line}: content after terminator")]
    TrailingContent { line: usize },
}

impl ParseError {
    /// Source line the error refers to, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::MalformedHeader { line, .. }
            | ParseError::TruncatedStatement { line }
            | ParseError::InvalidField { line, .. }
            | ParseError::TrailingContent { line } => Some(*line),
            ParseError::MissingTerminator => None,
        }
    }
}

/// A nonzero aspif literal: positive ids denote atoms, negative ids their
/// default negation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal(i64);

impl Literal {
    pub fn new(id: i64) -> Option<Self> {
        (id != 0).then_some(Literal(id))
    }

    pub fn positive(atom: u64) -> Self {
        Literal(atom as i64)
    }

    pub fn negative(atom: u64) -> Self {
        Literal(-(atom as i64))
    }

    pub fn atom(self) -> u64 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn value(self) -> i64 {
        self.0
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HeadType {
    Disjunction = 0,
    Choice = 1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightedLiteral {
    pub literal: Literal,
    pub weight: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BodySpec {
    Normal(Vec<Literal>),
    Weight {
        lower_bound: u64,
        literals: Vec<WeightedLiteral>,
    },
}

impl BodySpec {
    pub fn literals(&self) -> Vec<Literal> {
        match self {
            BodySpec::Normal(lits) => lits.clone(),
            BodySpec::Weight { literals, .. } => literals.iter().map(|w| w.literal).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleStatement {
    pub head_type: HeadType,
    pub head_atoms: Vec<u64>,
    pub body: BodySpec,
}

impl RuleStatement {
    pub fn is_constraint(&self) -> bool {
        self.head_type == HeadType::Disjunction && self.head_atoms.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputStatement {
    pub symbol: String,
    pub condition: Vec<Literal>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternalStatement {
    pub atom: u64,
    pub value: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    Rule(RuleStatement),
    Output(OutputStatement),
    External(ExternalStatement),
    /// Any other statement, kept as its original line.
    Opaque(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub version: (u64, u64, u64),
    pub tags: Vec<String>,
}

impl Default for Header {
    fn default() -> Self {
        Header {
            version: (1, 0, 0),
            tags: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AspifProgram {
    pub header: Header,
    pub statements: Vec<Statement>,
}

impl AspifProgram {
    pub fn rules(&self) -> impl Iterator<Item = &RuleStatement> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Rule(r) => Some(r),
            _ => None,
        })
    }

    pub fn outputs(&self) -> impl Iterator<Item = &OutputStatement> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Output(o) => Some(o),
            _ => None,
        })
    }

    pub fn externals(&self) -> impl Iterator<Item = &ExternalStatement> {
        self.statements.iter().filter_map(|s| match s {
            Statement::External(e) => Some(e),
            _ => None,
        })
    }
}

struct Fields<'a> {
    line: usize,
    tokens: std::str::SplitAsciiWhitespace<'a>,
}

impl<'a> Fields<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        Fields {
            line,
            tokens: text.split_ascii_whitespace(),
        }
    }

    fn raw(&mut self) -> Result<&'a str, ParseError> {
        self.tokens
            .next()
            .ok_or(ParseError::TruncatedStatement { line: self.line })
    }

    fn unsigned(&mut self) -> Result<u64, ParseError> {
        let tok = self.raw()?;
        tok.parse()
            .map_err(|_| self.invalid(tok, "not a nonnegative integer"))
    }

    fn atom(&mut self) -> Result<u64, ParseError> {
        let tok = self.raw()?;
        match tok.parse::<u64>() {
            Ok(0) | Err(_) => Err(self.invalid(tok, "not a positive atom id")),
            Ok(a) => Ok(a),
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let tok = self.raw()?;
        tok.parse::<i64>()
            .ok()
            .and_then(Literal::new)
            .ok_or_else(|| self.invalid(tok, "not a nonzero literal"))
    }

    fn literals(&mut self) -> Result<Vec<Literal>, ParseError> {
        let n = self.unsigned()?;
        (0..n).map(|_| self.literal()).collect()
    }

    fn finish(mut self) -> Result<(), ParseError> {
        match self.tokens.next() {
            None => Ok(()),
            Some(tok) => Err(self.invalid(tok, "unexpected extra field")),
        }
    }

    fn invalid(&self, tok: &str, reason: &'static str) -> ParseError {
        ParseError::InvalidField {
            line: self.line,
            field: tok.to_string(),
            reason,
        }
    }
}

fn parse_header(line: usize, text: &str) -> Result<Header, ParseError> {
    let malformed = || ParseError::MalformedHeader {
        line,
        found: text.to_string(),
    };
    let mut toks = text.split_ascii_whitespace();
    if toks.next() != Some("asp") {
        return Err(malformed());
    }
    let mut version = [0u64; 3];
    for v in &mut version {
        *v = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(malformed)?;
    }
    if version[0] != 1 {
        return Err(malformed());
    }
    Ok(Header {
        version: (version[0], version[1], version[2]),
        tags: toks.map(str::to_string).collect(),
    })
}

fn parse_rule(mut f: Fields<'_>) -> Result<RuleStatement, ParseError> {
    let head_type = match f.raw()? {
        "0" => HeadType::Disjunction,
        "1" => HeadType::Choice,
        tok => return Err(f.invalid(tok, "unknown head type")),
    };
    let n = f.unsigned()?;
    let head_atoms = (0..n).map(|_| f.atom()).collect::<Result<Vec<_>, _>>()?;
    let body = match f.raw()? {
        "0" => BodySpec::Normal(f.literals()?),
        "1" => {
            let tok_bound = f.raw()?;
            let lower_bound = match tok_bound.parse::<u64>() {
                Ok(l) if l >= 1 => l,
                _ => return Err(f.invalid(tok_bound, "weight body lower bound must be positive")),
            };
            let n = f.unsigned()?;
            let literals = (0..n)
                .map(|_| {
                    Ok(WeightedLiteral {
                        literal: f.literal()?,
                        weight: f.unsigned()?,
                    })
                })
                .collect::<Result<Vec<_>, ParseError>>()?;
            BodySpec::Weight {
                lower_bound,
                literals,
            }
        }
        tok => return Err(f.invalid(tok, "unknown body type")),
    };
    f.finish()?;
    Ok(RuleStatement {
        head_type,
        head_atoms,
        body,
    })
}

/// Output statements carry a length-prefixed symbol that may contain spaces,
/// so they are sliced from the raw line rather than tokenized.
fn parse_output(line: usize, text: &str) -> Result<OutputStatement, ParseError> {
    let truncated = ParseError::TruncatedStatement { line };
    let rest = text
        .trim_start()
        .strip_prefix('4')
        .ok_or(truncated.clone())?;
    let rest = rest.trim_start();
    let len_end = rest
        .find(|c: char| c.is_ascii_whitespace())
        .ok_or(truncated.clone())?;
    let len_tok = &rest[..len_end];
    let len: usize = len_tok.parse().map_err(|_| ParseError::InvalidField {
        line,
        field: len_tok.to_string(),
        reason: "not a symbol length",
    })?;
    let after = &rest[len_end + 1..];
    if after.len() < len || !after.is_char_boundary(len) {
        return Err(truncated);
    }
    let symbol = &after[..len];
    if symbol.is_empty() {
        return Err(ParseError::InvalidField {
            line,
            field: String::new(),
            reason: "empty output symbol",
        });
    }
    let mut f = Fields::new(line, &after[len..]);
    let condition = f.literals()?;
    f.finish()?;
    Ok(OutputStatement {
        symbol: symbol.to_string(),
        condition,
    })
}

fn parse_external(mut f: Fields<'_>) -> Result<ExternalStatement, ParseError> {
    let atom = f.atom()?;
    let value = f.unsigned()?;
    f.finish()?;
    Ok(ExternalStatement { atom, value })
}

/// Parse aspif text. Blank lines and `%` comment lines are skipped.
pub fn parse_aspif(text: &str) -> Result<AspifProgram, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('%')
        });

    let header = match lines.next() {
        Some((n, l)) => parse_header(n, l)?,
        None => {
            return Err(ParseError::MalformedHeader {
                line: 1,
                found: String::new(),
            })
        }
    };

    let mut statements = Vec::new();
    let mut terminated = false;
    for (n, l) in lines.by_ref() {
        let mut f = Fields::new(n, l);
        match f.raw()? {
            "0" => {
                f.finish()?;
                terminated = true;
                break;
            }
            "1" => statements.push(Statement::Rule(parse_rule(f)?)),
            "4" => statements.push(Statement::Output(parse_output(n, l)?)),
            "5" => statements.push(Statement::External(parse_external(f)?)),
            tok if tok.parse::<u64>().is_ok() => {
                statements.push(Statement::Opaque(l.trim().to_string()))
            }
            tok => return Err(f.invalid(tok, "statement tag is not an integer")),
        }
    }
    if !terminated {
        return Err(ParseError::MissingTerminator);
    }
    if let Some((n, _)) = lines.next() {
        return Err(ParseError::TrailingContent { line: n });
    }
    Ok(AspifProgram { header, statements })
}

fn push_list<T: fmt::Display>(out: &mut String, items: impl ExactSizeIterator<Item = T>) {
    use std::fmt::Write;
    write!(out, " {}", items.len()).unwrap();
    for item in items {
        write!(out, " {item}").unwrap();
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        match self {
            Statement::Rule(r) => {
                out.push_str(&format!("1 {}", r.head_type as u8));
                push_list(&mut out, r.head_atoms.iter());
                match &r.body {
                    BodySpec::Normal(lits) => {
                        out.push_str(" 0");
                        push_list(&mut out, lits.iter());
                    }
                    BodySpec::Weight {
                        lower_bound,
                        literals,
                    } => {
                        out.push_str(&format!(" 1 {lower_bound} {}", literals.len()));
                        for w in literals {
                            out.push_str(&format!(" {} {}", w.literal, w.weight));
                        }
                    }
                }
            }
            Statement::Output(o) => {
                out.push_str(&format!("4 {} {}", o.symbol.len(), o.symbol));
                push_list(&mut out, o.condition.iter());
            }
            Statement::External(e) => out.push_str(&format!("5 {} {}", e.atom, e.value)),
            Statement::Opaque(raw) => out.push_str(raw),
        }
        f.write_str(&out)
    }
}

/// Write a program back to aspif text; `parse_aspif` of the result yields
/// an equal program.
pub fn emit_aspif(program: &AspifProgram) -> String {
    let (major, minor, rev) = program.header.version;
    let mut out = format!("asp {major} {minor} {rev}");
    for tag in &program.header.tags {
        out.push(' ');
        out.push_str(tag);
    }
    out.push('\n');
    for stmt in &program.statements {
        out.push_str(&stmt.to_string());
        out.push('\n');
    }
    out.push_str("0\n");
    out
}
