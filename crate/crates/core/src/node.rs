//! Explanation-graph node vocabulary and the associative arrays of
//! supported sets keyed by those nodes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Character set used when rendering node labels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Glyphs {
    #[default]
    Unicode,
    Ascii,
}

/// A named atom or its default negation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    pub name: String,
    pub negated: bool,
}

impl Lit {
    pub fn pos(name: impl Into<String>) -> Self {
        Lit {
            name: name.into(),
            negated: false,
        }
    }

    pub fn neg(name: impl Into<String>) -> Self {
        Lit {
            name: name.into(),
            negated: true,
        }
    }

    pub fn negate(&self) -> Self {
        Lit {
            name: self.name.clone(),
            negated: !self.negated,
        }
    }

    /// Accepts `a`, `~a`, `not a` and `∼a`.
    pub fn parse(text: &str) -> Option<Lit> {
        let t = text.trim();
        let (negated, name) =
            if let Some(rest) = t.strip_prefix('~').or_else(|| t.strip_prefix('∼')) {
                (true, rest.trim())
            } else if let Some(rest) = t.strip_prefix("not ") {
                (true, rest.trim())
            } else {
                (false, t)
            };
        if name.is_empty() {
            return None;
        }
        Some(Lit {
            name: name.to_string(),
            negated,
        })
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "~{}", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

/// A satisfied-or-not element of a choice atom, e.g. `(m(1), n(1))`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple(pub Vec<Lit>);

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

/// Cardinality test `lower <= |satisfied elements| <= upper`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Choice {
    pub lower: u64,
    pub upper: Option<u64>,
    pub elements: Vec<Tuple>,
}

impl Choice {
    pub fn admits(&self, count: u64) -> bool {
        self.lower <= count && self.upper.is_none_or(|u| count <= u)
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}<={{", self.lower)?;
        for (i, t) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("}")?;
        if let Some(u) = self.upper {
            write!(f, "<={u}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Atom,
    NegAtom,
    Top,
    Bottom,
    Assume,
    PlusChoice,
    MinusChoice,
    StarTrue,
    StarEmpty,
    Tuple,
    ChoicePos,
    ChoiceNeg,
    TriggeredConstraint,
}

impl NodeKind {
    pub const ALL: [NodeKind; 13] = [
        NodeKind::Atom,
        NodeKind::NegAtom,
        NodeKind::Top,
        NodeKind::Bottom,
        NodeKind::Assume,
        NodeKind::PlusChoice,
        NodeKind::MinusChoice,
        NodeKind::StarTrue,
        NodeKind::StarEmpty,
        NodeKind::Tuple,
        NodeKind::ChoicePos,
        NodeKind::ChoiceNeg,
        NodeKind::TriggeredConstraint,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Atom => "atom",
            NodeKind::NegAtom => "neg_atom",
            NodeKind::Top => "top",
            NodeKind::Bottom => "bottom",
            NodeKind::Assume => "assume",
            NodeKind::PlusChoice => "plus_choice",
            NodeKind::MinusChoice => "minus_choice",
            NodeKind::StarTrue => "star_true",
            NodeKind::StarEmpty => "star_empty",
            NodeKind::Tuple => "tuple",
            NodeKind::ChoicePos => "choice_pos",
            NodeKind::ChoiceNeg => "choice_neg",
            NodeKind::TriggeredConstraint => "triggered_constraint",
        }
    }

    pub fn from_name(s: &str) -> Option<NodeKind> {
        NodeKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Sink nodes of an explanation graph.
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            NodeKind::Top
                | NodeKind::Bottom
                | NodeKind::Assume
                | NodeKind::PlusChoice
                | NodeKind::MinusChoice
                | NodeKind::StarTrue
                | NodeKind::StarEmpty
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ENode {
    Lit(Lit),
    Top,
    Bottom,
    Assume,
    PlusChoice,
    MinusChoice,
    StarTrue,
    StarEmpty,
    Tuple(Tuple),
    /// A choice atom satisfied by the answer set.
    ChoicePos(Choice),
    /// A choice atom not satisfied by the answer set.
    ChoiceNeg(Choice),
    Triggered(Lit),
}

impl ENode {
    pub fn atom(name: impl Into<String>) -> Self {
        ENode::Lit(Lit::pos(name))
    }

    pub fn neg_atom(name: impl Into<String>) -> Self {
        ENode::Lit(Lit::neg(name))
    }

    pub fn kind(&self) -> NodeKind {
        match self {
            ENode::Lit(l) if l.negated => NodeKind::NegAtom,
            ENode::Lit(_) => NodeKind::Atom,
            ENode::Top => NodeKind::Top,
            ENode::Bottom => NodeKind::Bottom,
            ENode::Assume => NodeKind::Assume,
            ENode::PlusChoice => NodeKind::PlusChoice,
            ENode::MinusChoice => NodeKind::MinusChoice,
            ENode::StarTrue => NodeKind::StarTrue,
            ENode::StarEmpty => NodeKind::StarEmpty,
            ENode::Tuple(_) => NodeKind::Tuple,
            ENode::ChoicePos(_) => NodeKind::ChoicePos,
            ENode::ChoiceNeg(_) => NodeKind::ChoiceNeg,
            ENode::Triggered(_) => NodeKind::TriggeredConstraint,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.kind().is_terminal()
    }

    pub fn as_lit(&self) -> Option<&Lit> {
        match self {
            ENode::Lit(l) => Some(l),
            _ => None,
        }
    }

    pub fn label(&self, glyphs: Glyphs) -> String {
        match (self, glyphs) {
            (ENode::Top, Glyphs::Unicode) => "⊤".into(),
            (ENode::Top, Glyphs::Ascii) => "T".into(),
            (ENode::Bottom, Glyphs::Unicode) => "⊥".into(),
            (ENode::Bottom, Glyphs::Ascii) => "F".into(),
            (ENode::Assume, _) => "assume".into(),
            (ENode::PlusChoice, _) => "+choice".into(),
            (ENode::MinusChoice, _) => "-choice".into(),
            (ENode::StarTrue, _) => "*True".into(),
            (ENode::StarEmpty, _) => "*Empty".into(),
            (ENode::Lit(l), _) => l.to_string(),
            (ENode::Tuple(t), _) => t.to_string(),
            (ENode::ChoicePos(c), _) => c.to_string(),
            (ENode::ChoiceNeg(c), _) => format!("~({c})"),
            (ENode::Triggered(l), _) => format!("triggered_constraint({l})"),
        }
    }

    /// Inverse of [`ENode::label`] for either glyph set.
    pub fn parse(kind: NodeKind, label: &str) -> Option<ENode> {
        let node = match kind {
            NodeKind::Atom => ENode::Lit(Lit::parse(label).filter(|l| !l.negated)?),
            NodeKind::NegAtom => ENode::Lit(Lit::parse(label).filter(|l| l.negated)?),
            NodeKind::Top => ENode::Top,
            NodeKind::Bottom => ENode::Bottom,
            NodeKind::Assume => ENode::Assume,
            NodeKind::PlusChoice => ENode::PlusChoice,
            NodeKind::MinusChoice => ENode::MinusChoice,
            NodeKind::StarTrue => ENode::StarTrue,
            NodeKind::StarEmpty => ENode::StarEmpty,
            NodeKind::Tuple => ENode::Tuple(parse_tuple(label)?),
            NodeKind::ChoicePos => ENode::ChoicePos(parse_choice(label)?),
            NodeKind::ChoiceNeg => {
                let inner = label.strip_prefix("~(")?.strip_suffix(')')?;
                ENode::ChoiceNeg(parse_choice(inner)?)
            }
            NodeKind::TriggeredConstraint => {
                let inner = label
                    .strip_prefix("triggered_constraint(")?
                    .strip_suffix(')')?;
                ENode::Triggered(Lit::parse(inner)?)
            }
        };
        Some(node)
    }
}

impl fmt::Display for ENode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label(Glyphs::Unicode))
    }
}

/// Split on `", "` at nesting depth zero, ignoring separators inside
/// brackets and string literals.
fn split_top(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut in_str = false;
    let mut escaped = false;
    let mut start = 0;
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if in_str {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_str = false;
            }
        } else {
            match b {
                b'"' => in_str = true,
                b'(' | b'{' | b'[' => depth += 1,
                b')' | b'}' | b']' => depth -= 1,
                b',' if depth == 0 && bytes.get(i + 1) == Some(&b' ') => {
                    parts.push(&s[start..i]);
                    start = i + 2;
                    i += 1;
                }
                _ => {}
            }
        }
        i += 1;
    }
    parts.push(&s[start..]);
    parts
}

fn parse_tuple(label: &str) -> Option<Tuple> {
    let inner = label.strip_prefix('(')?.strip_suffix(')')?;
    if inner.is_empty() {
        return Some(Tuple(Vec::new()));
    }
    split_top(inner)
        .into_iter()
        .map(Lit::parse)
        .collect::<Option<Vec<_>>>()
        .map(Tuple)
}

fn parse_choice(label: &str) -> Option<Choice> {
    let open = label.find("<={")?;
    let lower = label[..open].parse().ok()?;
    let body = &label[open + 2..];
    // find the brace closing the element set
    let mut depth = 0i32;
    let mut in_str = false;
    let mut close = None;
    for (i, c) in body.char_indices() {
        match c {
            '"' => in_str = !in_str,
            '{' | '(' if !in_str => depth += 1,
            '}' | ')' if !in_str => {
                depth -= 1;
                if depth == 0 {
                    close = Some(i);
                    break;
                }
            }
            _ => {}
        }
    }
    let close = close?;
    let inner = &body[1..close];
    let elements = if inner.is_empty() {
        Vec::new()
    } else {
        split_top(inner)
            .into_iter()
            .map(parse_tuple)
            .collect::<Option<Vec<_>>>()?
    };
    let rest = &body[close + 1..];
    let upper = if rest.is_empty() {
        None
    } else {
        Some(rest.strip_prefix("<=")?.parse().ok()?)
    };
    Some(Choice {
        lower,
        upper,
        elements,
    })
}

/// One way of justifying a node.
pub type SupportSet = BTreeSet<ENode>;

/// Associative array from nodes to their ordered lists of supported sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SupportTable {
    entries: BTreeMap<ENode, Vec<SupportSet>>,
}

impl SupportTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append `set` to the list of `key`.
    pub fn push(&mut self, key: ENode, set: SupportSet) {
        self.entries.entry(key).or_default().push(set);
    }

    /// Append `set` unless an equal set is already listed.
    pub fn push_unique(&mut self, key: ENode, set: SupportSet) {
        let list = self.entries.entry(key).or_default();
        if !list.contains(&set) {
            list.push(set);
        }
    }

    pub fn set(&mut self, key: ENode, sets: Vec<SupportSet>) {
        self.entries.insert(key, sets);
    }

    pub fn get(&self, key: &ENode) -> Option<&[SupportSet]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn contains(&self, key: &ENode) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &ENode> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ENode, &Vec<SupportSet>)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One `key : [{..}, ..]` line per key.
    pub fn dump(&self, glyphs: Glyphs) -> String {
        let mut out = String::new();
        for (key, sets) in &self.entries {
            out.push_str(&key.label(glyphs));
            out.push_str(" : [");
            for (i, set) in sets.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&render_set(set, glyphs));
            }
            out.push_str("]\n");
        }
        out
    }
}

pub fn render_set(set: &SupportSet, glyphs: Glyphs) -> String {
    let items: Vec<String> = set.iter().map(|n| n.label(glyphs)).collect();
    format!("{{{}}}", items.join(", "))
}
