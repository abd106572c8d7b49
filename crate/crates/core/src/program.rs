//! Reconstruction of symbolic ground rules from an aspif program.
//!
//! Atom ids are named through output statements; ids without a name are
//! auxiliary atoms introduced by the grounder and rendered as `l(<id>)`.
//! Auxiliary atoms defined by weight bodies are folded back into choice
//! atoms, and auxiliary atoms defined by plain conjunctions are inlined
//! when rule bodies are flattened.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::aspif::{AspifProgram, BodySpec, HeadType, Literal, Statement};
use crate::node::{Choice, Lit, Tuple};

pub type AtomId = u64;
pub type ChoiceId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("output statement for {symbol:?} has a condition with {len} literals")]
    MultiLiteralOutputCondition { symbol: String, len: usize },
    #[error("output statement for {symbol:?} is conditioned on a negative literal")]
    NegativeOutputCondition { symbol: String },
    #[error("symbol {symbol:?} names both atom {first} and atom {second}")]
    DuplicateSymbol {
        symbol: String,
        first: AtomId,
        second: AtomId,
    },
    #[error("rule statement {statement} has a disjunctive head with {len} atoms")]
    DisjunctiveHead { statement: usize, len: usize },
    #[error("auxiliary atom {atom} is defined through itself")]
    AuxCycle { atom: String },
    #[error("unknown atom {0:?}")]
    UnknownAtom(String),
}

/// Non-fatal findings during reconstruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// A weight body whose literals carry different weights; the defining
    /// rule is kept as is and its head treated as an opaque atom.
    UnsupportedWeightBody { statement: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub id: AtomId,
    pub name: String,
    pub is_aux: bool,
    pub is_fact: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    atoms: BTreeMap<AtomId, Atom>,
    by_name: HashMap<String, AtomId>,
}

impl SymbolTable {
    pub fn get(&self, id: AtomId) -> Option<&Atom> {
        self.atoms.get(&id)
    }

    pub fn name(&self, id: AtomId) -> &str {
        self.atoms.get(&id).map_or("?", |a| a.name.as_str())
    }

    pub fn id_of(&self, name: &str) -> Option<AtomId> {
        self.by_name.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.values()
    }

    /// Atoms named by output statements.
    pub fn named(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.values().filter(|a| !a.is_aux)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    fn insert(&mut self, atom: Atom) -> Result<(), ProgramError> {
        if let Some(&first) = self.by_name.get(&atom.name) {
            if first != atom.id {
                return Err(ProgramError::DuplicateSymbol {
                    symbol: atom.name,
                    first,
                    second: atom.id,
                });
            }
        }
        self.by_name.insert(atom.name.clone(), atom.id);
        self.atoms.insert(atom.id, atom);
        Ok(())
    }
}

fn referenced_atoms(p: &AspifProgram) -> BTreeSet<AtomId> {
    let mut ids = BTreeSet::new();
    for stmt in &p.statements {
        match stmt {
            Statement::Rule(r) => {
                ids.extend(r.head_atoms.iter().copied());
                ids.extend(r.body.literals().into_iter().map(Literal::atom));
            }
            Statement::Output(o) => ids.extend(o.condition.iter().map(|l| l.atom())),
            Statement::External(e) => {
                ids.insert(e.atom);
            }
            Statement::Opaque(_) => {}
        }
    }
    ids
}

/// Map atom ids to symbols. Outputs with an empty condition denote facts
/// and receive a fresh id above every id used in the program.
pub fn build_symbol_table(p: &AspifProgram) -> Result<SymbolTable, ProgramError> {
    let referenced = referenced_atoms(p);
    let mut next_free = referenced.iter().next_back().copied().unwrap_or(0) + 1;
    let externals: HashSet<AtomId> = p.externals().map(|e| e.atom).collect();

    let mut table = SymbolTable::default();
    for out in p.outputs() {
        let id = match out.condition.as_slice() {
            [] => {
                let id = next_free;
                next_free += 1;
                table.insert(Atom {
                    id,
                    name: out.symbol.clone(),
                    is_aux: false,
                    is_fact: true,
                })?;
                continue;
            }
            [lit] if lit.is_positive() => lit.atom(),
            [_] => {
                return Err(ProgramError::NegativeOutputCondition {
                    symbol: out.symbol.clone(),
                })
            }
            lits => {
                return Err(ProgramError::MultiLiteralOutputCondition {
                    symbol: out.symbol.clone(),
                    len: lits.len(),
                })
            }
        };
        if table.get(id).is_some_and(|a| a.name != out.symbol) {
            // an id shown under two symbols keeps its first name
            continue;
        }
        table.insert(Atom {
            id,
            name: out.symbol.clone(),
            is_aux: false,
            is_fact: externals.contains(&id),
        })?;
    }
    for id in referenced {
        if table.get(id).is_none() {
            table.insert(Atom {
                id,
                name: format!("l({id})"),
                is_aux: true,
                is_fact: externals.contains(&id),
            })?;
        }
    }
    Ok(table)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyAtom {
    Atom(AtomId),
    Choice(ChoiceId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BodyLit {
    pub atom: BodyAtom,
    pub negated: bool,
}

/// Flattened body literal over named (or opaque) atoms and choice atoms.
pub type Prim = BodyLit;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Head {
    None,
    Atom(AtomId),
    Choice(Vec<AtomId>),
}

impl Head {
    pub fn contains(&self, id: AtomId) -> bool {
        match self {
            Head::None => false,
            Head::Atom(a) => *a == id,
            Head::Choice(atoms) => atoms.contains(&id),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    Normal,
    ChoiceHead,
    Constraint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Body {
    Normal(Vec<BodyLit>),
    /// Weight body with heterogeneous weights, kept opaque.
    Weight {
        lower_bound: u64,
        literals: Vec<(AtomId, bool, u64)>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundRule {
    pub head: Head,
    pub body: Body,
    /// Index of the originating rule among the program's rule statements.
    pub statement: usize,
}

impl GroundRule {
    pub fn kind(&self) -> RuleKind {
        match self.head {
            Head::None => RuleKind::Constraint,
            Head::Atom(_) => RuleKind::Normal,
            Head::Choice(_) => RuleKind::ChoiceHead,
        }
    }

    fn body_side(&self, negated: bool) -> Vec<BodyAtom> {
        match &self.body {
            Body::Normal(lits) => lits
                .iter()
                .filter(|l| l.negated == negated)
                .map(|l| l.atom)
                .collect(),
            Body::Weight { literals, .. } => literals
                .iter()
                .filter(|l| l.1 == negated)
                .map(|l| BodyAtom::Atom(l.0))
                .collect(),
        }
    }

    /// r⁺
    pub fn pos_body(&self) -> Vec<BodyAtom> {
        self.body_side(false)
    }

    /// r⁻
    pub fn neg_body(&self) -> Vec<BodyAtom> {
        self.body_side(true)
    }
}

/// A choice atom `lower {elements} upper` recovered from weight bodies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoiceSpec {
    pub lower: u64,
    pub upper: Option<u64>,
    /// Each element is a conjunction; the chosen atom comes first.
    pub elements: Vec<Vec<(AtomId, bool)>>,
    /// Auxiliary atom whose truth the choice atom stands for.
    pub aux: AtomId,
}

/// A rule with auxiliary atoms substituted by their definitions; a rule
/// whose auxiliary atoms have several definitions yields several flat rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatRule {
    pub rule: usize,
    pub head: Head,
    pub body: Vec<Prim>,
}

/// D_P: rules grouped by head type and head atoms.
pub type RuleIndex = BTreeMap<(HeadType, Vec<AtomId>), Vec<usize>>;

#[derive(Clone, Debug)]
pub struct GroundProgram {
    pub aspif: AspifProgram,
    pub symbols: SymbolTable,
    pub rules: Vec<GroundRule>,
    pub choices: Vec<ChoiceSpec>,
    pub facts: BTreeSet<AtomId>,
    pub rule_index: RuleIndex,
    pub flat: Vec<FlatRule>,
    pub nant: BTreeSet<AtomId>,
    pub warnings: Vec<Warning>,
    defs: HashMap<AtomId, Vec<usize>>,
    choice_heads: BTreeSet<AtomId>,
    choice_of: HashMap<AtomId, ChoiceId>,
    opaque_weight: BTreeSet<AtomId>,
}

fn uniform_weight(literals: &[(AtomId, bool, u64)]) -> Option<u64> {
    let w = literals.first().map_or(1, |l| l.2);
    (w > 0 && literals.iter().all(|l| l.2 == w)).then_some(w)
}

/// Rebuild the symbolic ground program behind `p`.
pub fn reconstruct_rules(p: &AspifProgram) -> Result<GroundProgram, ProgramError> {
    let symbols = build_symbol_table(p)?;
    let facts: BTreeSet<AtomId> = symbols.iter().filter(|a| a.is_fact).map(|a| a.id).collect();

    let mut rules = Vec::new();
    let mut defs: HashMap<AtomId, Vec<usize>> = HashMap::new();
    let mut choice_heads = BTreeSet::new();
    for (i, r) in p.rules().enumerate() {
        let head = match (r.head_type, r.head_atoms.as_slice()) {
            (HeadType::Disjunction, []) => Head::None,
            (HeadType::Disjunction, [h]) => {
                defs.entry(*h).or_default().push(i);
                Head::Atom(*h)
            }
            (HeadType::Disjunction, hs) => {
                return Err(ProgramError::DisjunctiveHead {
                    statement: i,
                    len: hs.len(),
                })
            }
            (HeadType::Choice, hs) => {
                choice_heads.extend(hs.iter().copied());
                Head::Choice(hs.to_vec())
            }
        };
        let body = match &r.body {
            BodySpec::Normal(lits) => Body::Normal(
                lits.iter()
                    .map(|l| BodyLit {
                        atom: BodyAtom::Atom(l.atom()),
                        negated: !l.is_positive(),
                    })
                    .collect(),
            ),
            BodySpec::Weight {
                lower_bound,
                literals,
            } => Body::Weight {
                lower_bound: *lower_bound,
                literals: literals
                    .iter()
                    .map(|w| (w.literal.atom(), !w.literal.is_positive(), w.weight))
                    .collect(),
            },
        };
        rules.push(GroundRule {
            head,
            body,
            statement: i,
        });
    }

    let mut g = GroundProgram {
        aspif: p.clone(),
        symbols,
        rules,
        choices: Vec::new(),
        facts,
        rule_index: BTreeMap::new(),
        flat: Vec::new(),
        nant: BTreeSet::new(),
        warnings: Vec::new(),
        defs,
        choice_heads,
        choice_of: HashMap::new(),
        opaque_weight: BTreeSet::new(),
    };
    g.fold_choices();
    g.rule_index = g.index_rules();
    g.flat = g.flatten()?;
    g.nant = compute_nant(&g);
    Ok(g)
}

impl GroundProgram {
    fn is_resolvable_aux(&self, id: AtomId) -> bool {
        self.symbols.get(id).is_some_and(|a| a.is_aux && !a.is_fact)
            && !self.choice_heads.contains(&id)
            && !self.opaque_weight.contains(&id)
            && !self.choice_of.contains_key(&id)
    }

    fn single_def(&self, id: AtomId) -> Option<&GroundRule> {
        match self.defs.get(&id).map(Vec::as_slice) {
            Some([i]) => Some(&self.rules[*i]),
            _ => None,
        }
    }

    /// Element conjunction for a weight-body literal: an auxiliary atom
    /// defined by a single conjunction unfolds into that conjunction.
    fn element_of(&self, atom: AtomId, negated: bool) -> Vec<(AtomId, bool)> {
        let aux = self
            .symbols
            .get(atom)
            .is_some_and(|a| a.is_aux && !a.is_fact)
            && !self.choice_heads.contains(&atom);
        if !negated && aux {
            if let Some(GroundRule {
                body: Body::Normal(lits),
                ..
            }) = self.single_def(atom)
            {
                let mut conj: Vec<(AtomId, bool)> = lits
                    .iter()
                    .filter_map(|l| match l.atom {
                        BodyAtom::Atom(a) => Some((a, l.negated)),
                        BodyAtom::Choice(_) => None,
                    })
                    .collect();
                if conj.len() == lits.len() && !conj.is_empty() {
                    if let Some(pos) = conj
                        .iter()
                        .position(|(a, neg)| !neg && self.choice_heads.contains(a))
                    {
                        let chosen = conj.remove(pos);
                        conj.insert(0, chosen);
                    }
                    return conj;
                }
            }
        }
        vec![(atom, negated)]
    }

    fn fold_choices(&mut self) {
        // weight bodies with uniform weights become lower-bounded choices
        let mut weight_choice: HashMap<usize, ChoiceId> = HashMap::new();
        for i in 0..self.rules.len() {
            let Body::Weight {
                lower_bound,
                literals,
            } = &self.rules[i].body
            else {
                continue;
            };
            let head_aux = match self.rules[i].head {
                Head::Atom(h) => Some(h),
                _ => None,
            };
            let Some(w) = uniform_weight(literals) else {
                self.warnings
                    .push(Warning::UnsupportedWeightBody { statement: i });
                if let Some(h) = head_aux {
                    self.opaque_weight.insert(h);
                }
                continue;
            };
            let elements = literals
                .iter()
                .map(|&(a, neg, _)| self.element_of(a, neg))
                .collect();
            let id = self.choices.len();
            self.choices.push(ChoiceSpec {
                lower: lower_bound.div_ceil(w),
                upper: None,
                elements,
                aux: head_aux.unwrap_or(0),
            });
            weight_choice.insert(i, id);
        }
        for (&rule, &choice) in &weight_choice {
            if let Head::Atom(h) = self.rules[rule].head {
                let auxiliary = self.symbols.get(h).is_some_and(|a| a.is_aux)
                    && self.defs.get(&h).is_some_and(|d| d.len() == 1);
                if auxiliary {
                    self.choice_of.insert(h, choice);
                }
            }
        }

        // `w :- w_l, not w_u` over the same elements folds into [l, u]
        let mut folded = Vec::new();
        for (&h, defs) in &self.defs {
            let [i] = defs.as_slice() else { continue };
            let is_aux = self.symbols.get(h).is_some_and(|a| a.is_aux && !a.is_fact);
            if !is_aux || self.choice_of.contains_key(&h) {
                continue;
            }
            let Body::Normal(lits) = &self.rules[*i].body else {
                continue;
            };
            let [x, y] = lits.as_slice() else { continue };
            let (lo, hi) = match (x.negated, y.negated) {
                (false, true) => (x, y),
                (true, false) => (y, x),
                _ => continue,
            };
            let (BodyAtom::Atom(lo), BodyAtom::Atom(hi)) = (lo.atom, hi.atom) else {
                continue;
            };
            let (Some(&cl), Some(&ch)) = (self.choice_of.get(&lo), self.choice_of.get(&hi)) else {
                continue;
            };
            let (l, u) = (&self.choices[cl], &self.choices[ch]);
            let same = l.elements.len() == u.elements.len()
                && l.elements.iter().all(|e| u.elements.contains(e));
            if same && u.lower > l.lower {
                folded.push((h, l.lower, u.lower - 1, l.elements.clone()));
            }
        }
        folded.sort();
        for (h, lower, upper, elements) in folded {
            self.choice_of.insert(h, self.choices.len());
            self.choices.push(ChoiceSpec {
                lower,
                upper: Some(upper),
                elements,
                aux: h,
            });
        }

        // rewrite bodies: references to choice auxiliaries become choice atoms,
        // uniform weight bodies become a single choice atom
        for i in 0..self.rules.len() {
            let body = match &self.rules[i].body {
                Body::Normal(lits) => Body::Normal(
                    lits.iter()
                        .map(|l| match l.atom {
                            BodyAtom::Atom(a) => match self.choice_of.get(&a) {
                                Some(&c) => BodyLit {
                                    atom: BodyAtom::Choice(c),
                                    negated: l.negated,
                                },
                                None => *l,
                            },
                            BodyAtom::Choice(_) => *l,
                        })
                        .collect(),
                ),
                Body::Weight { .. } => match weight_choice.get(&i) {
                    Some(&c) => Body::Normal(vec![BodyLit {
                        atom: BodyAtom::Choice(c),
                        negated: false,
                    }]),
                    None => continue,
                },
            };
            self.rules[i].body = body;
        }
    }

    fn index_rules(&self) -> RuleIndex {
        let mut index: RuleIndex = BTreeMap::new();
        for (i, r) in self.rules.iter().enumerate() {
            let key = match &r.head {
                Head::None => (HeadType::Disjunction, Vec::new()),
                Head::Atom(a) => (HeadType::Disjunction, vec![*a]),
                Head::Choice(atoms) => (HeadType::Choice, atoms.clone()),
            };
            index.entry(key).or_default().push(i);
        }
        index
    }

    /// Bodies of constraints, i.e. `D[(0, ∅)]`.
    pub fn constraint_rules(&self) -> impl Iterator<Item = (usize, &GroundRule)> {
        self.rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.kind() == RuleKind::Constraint)
    }

    /// Ways of establishing a body literal using only named atoms, opaque
    /// atoms and choice atoms. Each inner vector is one conjunction.
    pub fn resolve_aux(&self, lit: BodyLit) -> Result<Vec<Vec<Prim>>, ProgramError> {
        let mut visiting = Vec::new();
        self.resolve(lit, &mut visiting)
    }

    fn resolve(
        &self,
        lit: BodyLit,
        visiting: &mut Vec<AtomId>,
    ) -> Result<Vec<Vec<Prim>>, ProgramError> {
        let BodyAtom::Atom(a) = lit.atom else {
            return Ok(vec![vec![lit]]);
        };
        if !self.is_resolvable_aux(a) {
            return Ok(vec![vec![lit]]);
        }
        if visiting.contains(&a) {
            return Err(ProgramError::AuxCycle {
                atom: self.symbols.name(a).to_string(),
            });
        }
        visiting.push(a);
        let mut def_dnfs = Vec::new();
        for &i in self.defs.get(&a).map(Vec::as_slice).unwrap_or(&[]) {
            let Body::Normal(lits) = &self.rules[i].body else {
                unreachable!("weight-defined auxiliaries are choices or opaque")
            };
            if lit.negated {
                // ¬(l1 ∧ … ∧ ln) = ¬l1 ∨ … ∨ ¬ln
                let mut alternatives = Vec::new();
                for l in lits {
                    let flipped = BodyLit {
                        atom: l.atom,
                        negated: !l.negated,
                    };
                    alternatives.extend(self.resolve(flipped, visiting)?);
                }
                def_dnfs.push(alternatives);
            } else {
                let mut conj = vec![Vec::new()];
                for l in lits {
                    conj = product(&conj, &self.resolve(*l, visiting)?);
                }
                def_dnfs.push(conj);
            }
        }
        visiting.pop();
        let result = if lit.negated {
            // ¬(d1 ∨ … ∨ dk) = ¬d1 ∧ … ∧ ¬dk
            def_dnfs
                .iter()
                .fold(vec![Vec::new()], |acc, dnf| product(&acc, dnf))
        } else {
            def_dnfs.into_iter().flatten().collect()
        };
        Ok(dedup_dnf(result))
    }

    fn flatten(&self) -> Result<Vec<FlatRule>, ProgramError> {
        let mut flat = Vec::new();
        for (i, r) in self.rules.iter().enumerate() {
            let keep = match &r.head {
                Head::None | Head::Choice(_) => true,
                Head::Atom(h) => !self.is_resolvable_aux(*h) && !self.choice_of.contains_key(h),
            };
            if !keep {
                continue;
            }
            let Body::Normal(lits) = &r.body else {
                continue;
            };
            let mut dnf = vec![Vec::new()];
            for l in lits {
                dnf = product(&dnf, &self.resolve_aux(*l)?);
            }
            for body in dedup_dnf(dnf) {
                flat.push(FlatRule {
                    rule: i,
                    head: r.head.clone(),
                    body,
                });
            }
        }
        Ok(flat)
    }

    /// Atoms that receive their own explanation: named atoms plus auxiliary
    /// atoms that survive flattening.
    pub fn explainable_atoms(&self) -> BTreeSet<AtomId> {
        let mut atoms: BTreeSet<AtomId> = self.symbols.named().map(|a| a.id).collect();
        for fr in &self.flat {
            for p in &fr.body {
                if let BodyAtom::Atom(a) = p.atom {
                    atoms.insert(a);
                }
            }
            if let Head::Choice(hs) = &fr.head {
                atoms.extend(hs.iter().copied());
            }
            if let Head::Atom(h) = fr.head {
                atoms.insert(h);
            }
        }
        atoms
    }

    pub fn is_opaque_weight(&self, id: AtomId) -> bool {
        self.opaque_weight.contains(&id)
    }

    pub fn is_choice_head(&self, id: AtomId) -> bool {
        self.choice_heads.contains(&id)
    }

    pub fn lit(&self, id: AtomId, negated: bool) -> Lit {
        Lit {
            name: self.symbols.name(id).to_string(),
            negated,
        }
    }

    pub fn choice_node(&self, id: ChoiceId) -> Choice {
        let spec = &self.choices[id];
        Choice {
            lower: spec.lower,
            upper: spec.upper,
            elements: spec
                .elements
                .iter()
                .map(|e| Tuple(e.iter().map(|&(a, neg)| self.lit(a, neg)).collect()))
                .collect(),
        }
    }

    pub fn atoms_from_names<'a>(
        &self,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Result<BTreeSet<AtomId>, ProgramError> {
        names
            .into_iter()
            .map(|n| {
                self.symbols
                    .id_of(n)
                    .ok_or_else(|| ProgramError::UnknownAtom(n.to_string()))
            })
            .collect()
    }

    pub fn names_of(&self, atoms: &BTreeSet<AtomId>) -> BTreeSet<String> {
        atoms
            .iter()
            .map(|&a| self.symbols.name(a).to_string())
            .collect()
    }

    /// Interpretation induced by a set of named atoms.
    pub fn interpret<'a>(&'a self, named: &'a BTreeSet<AtomId>) -> Interp<'a> {
        Interp {
            prog: self,
            named,
            memo: RefCell::new(HashMap::new()),
        }
    }

    fn render_body_lit(&self, l: &BodyLit) -> String {
        let atom = match l.atom {
            BodyAtom::Atom(a) => self.symbols.name(a).to_string(),
            BodyAtom::Choice(c) => self.choice_node(c).to_string(),
        };
        if l.negated {
            format!("not {atom}")
        } else {
            atom
        }
    }

    pub fn render_rule(&self, r: &GroundRule) -> String {
        let head = match &r.head {
            Head::None => String::new(),
            Head::Atom(a) => self.symbols.name(*a).to_string(),
            Head::Choice(atoms) => {
                let names: Vec<&str> = atoms.iter().map(|&a| self.symbols.name(a)).collect();
                format!("{{{}}}", names.join("; "))
            }
        };
        let body: Vec<String> = match &r.body {
            Body::Normal(lits) => lits.iter().map(|l| self.render_body_lit(l)).collect(),
            Body::Weight {
                lower_bound,
                literals,
            } => {
                let elems: Vec<String> = literals
                    .iter()
                    .map(|&(a, neg, w)| {
                        let n = self.symbols.name(a);
                        if neg {
                            format!("not {n}={w}")
                        } else {
                            format!("{n}={w}")
                        }
                    })
                    .collect();
                vec![format!("{lower_bound}{{{}}}", elems.join("; "))]
            }
        };
        match (head.is_empty(), body.is_empty()) {
            (false, true) => format!("{head}."),
            (true, _) => format!(":- {}.", body.join(", ")),
            (false, false) => format!("{head} :- {}.", body.join(", ")),
        }
    }

    /// One rule per line in `head :- body.` form.
    pub fn dump_rules(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            writeln!(out, "{}", self.render_rule(r)).unwrap();
        }
        out
    }
}

fn product(left: &[Vec<Prim>], right: &[Vec<Prim>]) -> Vec<Vec<Prim>> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for l in left {
        for r in right {
            let mut conj = l.clone();
            for p in r {
                if !conj.contains(p) {
                    conj.push(*p);
                }
            }
            out.push(conj);
        }
    }
    out
}

/// Drop contradictory and duplicate conjunctions.
fn dedup_dnf(dnf: Vec<Vec<Prim>>) -> Vec<Vec<Prim>> {
    let mut seen: HashSet<BTreeSet<Prim>> = HashSet::new();
    dnf.into_iter()
        .filter(|conj| {
            !conj.iter().any(|p| {
                conj.contains(&BodyLit {
                    atom: p.atom,
                    negated: !p.negated,
                })
            })
        })
        .filter(|conj| seen.insert(conj.iter().copied().collect()))
        .collect()
}

/// NANT(P): atoms occurring under default negation once auxiliary atoms are
/// resolved.
pub fn compute_nant(g: &GroundProgram) -> BTreeSet<AtomId> {
    g.flat
        .iter()
        .flat_map(|fr| fr.body.iter())
        .filter_map(|p| match (p.atom, p.negated) {
            (BodyAtom::Atom(a), true) => Some(a),
            _ => None,
        })
        .collect()
}

/// Truth values of every atom and choice atom under a set of true named
/// atoms; auxiliary atoms are evaluated through their defining rules.
pub struct Interp<'a> {
    prog: &'a GroundProgram,
    named: &'a BTreeSet<AtomId>,
    memo: RefCell<HashMap<AtomId, bool>>,
}

impl Interp<'_> {
    pub fn atom(&self, id: AtomId) -> bool {
        let Some(atom) = self.prog.symbols.get(id) else {
            return false;
        };
        if !atom.is_aux || atom.is_fact {
            return atom.is_fact || self.named.contains(&id);
        }
        if let Some(&v) = self.memo.borrow().get(&id) {
            return v;
        }
        // provisional value guards against definitional cycles
        self.memo.borrow_mut().insert(id, false);
        let value = self.prog.defs.get(&id).is_some_and(|defs| {
            defs.iter()
                .any(|&i| self.raw_body(&self.prog.aspif_rule_body(i)))
        });
        self.memo.borrow_mut().insert(id, value);
        value
    }

    fn raw_body(&self, body: &BodySpec) -> bool {
        match body {
            BodySpec::Normal(lits) => lits.iter().all(|l| self.atom(l.atom()) == l.is_positive()),
            BodySpec::Weight {
                lower_bound,
                literals,
            } => {
                let sum: u64 = literals
                    .iter()
                    .filter(|w| self.atom(w.literal.atom()) == w.literal.is_positive())
                    .map(|w| w.weight)
                    .sum();
                sum >= *lower_bound
            }
        }
    }

    /// Number of satisfied elements of a choice atom.
    pub fn satisfied_elements(&self, id: ChoiceId) -> Vec<usize> {
        self.prog.choices[id]
            .elements
            .iter()
            .enumerate()
            .filter(|(_, e)| e.iter().all(|&(a, neg)| self.atom(a) != neg))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn choice(&self, id: ChoiceId) -> bool {
        let spec = &self.prog.choices[id];
        let n = self.satisfied_elements(id).len() as u64;
        spec.lower <= n && spec.upper.is_none_or(|u| n <= u)
    }

    pub fn prim(&self, p: Prim) -> bool {
        let v = match p.atom {
            BodyAtom::Atom(a) => self.atom(a),
            BodyAtom::Choice(c) => self.choice(c),
        };
        v != p.negated
    }

    pub fn conj(&self, body: &[Prim]) -> bool {
        body.iter().all(|&p| self.prim(p))
    }
}

impl GroundProgram {
    fn aspif_rule_body(&self, rule: usize) -> BodySpec {
        self.aspif
            .rules()
            .nth(rule)
            .map(|r| r.body.clone())
            .expect("rule index in range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aspif::parse_aspif;

    const SAMPLE: &str = include_str!("../tests/data/sample.aspif");

    fn sample() -> GroundProgram {
        reconstruct_rules(&parse_aspif(SAMPLE).unwrap()).unwrap()
    }

    fn names(g: &GroundProgram, ids: &BTreeSet<AtomId>) -> Vec<String> {
        let mut v: Vec<String> = g.names_of(ids).into_iter().collect();
        v.sort();
        v
    }

    #[test]
    fn sample_symbols() {
        let g = sample();
        let expect = [
            (1, "n(1)"),
            (2, "n(2)"),
            (5, "b"),
            (3, "c"),
            (4, "a"),
            (7, "m(1)"),
            (8, "m(2)"),
        ];
        for (id, name) in expect {
            let atom = g.symbols.get(id).unwrap();
            assert_eq!(atom.name, name);
            assert!(!atom.is_aux);
        }
        for id in [6, 9, 10, 11, 12, 13] {
            let atom = g.symbols.get(id).unwrap();
            assert!(atom.is_aux);
            assert_eq!(atom.name, format!("l({id})"));
        }
        assert!(g.symbols.get(1).unwrap().is_fact && g.symbols.get(2).unwrap().is_fact);
        assert_eq!(g.facts, BTreeSet::from([1, 2]));
    }

    #[test]
    fn no_outputs_means_all_auxiliary() {
        let p = parse_aspif("asp 1 0 0\n1 0 1 1 0 1 -2\n0\n").unwrap();
        let t = build_symbol_table(&p).unwrap();
        assert!(t.iter().all(|a| a.is_aux));
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn symbol_errors() {
        let p = parse_aspif("asp 1 0 0\n4 1 a 2 1 2\n0\n").unwrap();
        assert!(matches!(
            build_symbol_table(&p),
            Err(ProgramError::MultiLiteralOutputCondition { len: 2, .. })
        ));
        let p = parse_aspif("asp 1 0 0\n4 1 a 1 1\n4 1 a 1 2\n0\n").unwrap();
        assert!(matches!(
            build_symbol_table(&p),
            Err(ProgramError::DuplicateSymbol { .. })
        ));
        let p = parse_aspif("asp 1 0 0\n1 0 2 1 2 0 0\n0\n").unwrap();
        assert!(matches!(
            reconstruct_rules(&p),
            Err(ProgramError::DisjunctiveHead { len: 2, .. })
        ));
    }

    #[test]
    fn unconditional_output_is_fact() {
        let p = parse_aspif("asp 1 0 0\n1 0 1 1 0 1 -2\n4 1 p 0\n4 1 a 1 1\n0\n").unwrap();
        let g = reconstruct_rules(&p).unwrap();
        let id = g.symbols.id_of("p").unwrap();
        assert_eq!(id, 3);
        assert!(g.facts.contains(&id));
    }

    #[test]
    fn sample_reconstruction() {
        let g = sample();
        let constraints: Vec<&GroundRule> = g.constraint_rules().map(|(_, r)| r).collect();
        assert_eq!(constraints.len(), 2);
        assert_eq!(
            g.rules
                .iter()
                .filter(|r| r.kind() == RuleKind::ChoiceHead)
                .count(),
            2
        );

        let shared = constraints[0];
        let pos: BTreeSet<BodyAtom> = shared.pos_body().into_iter().collect();
        assert_eq!(pos, BTreeSet::from([BodyAtom::Atom(7), BodyAtom::Atom(5)]));
        assert_eq!(g.render_rule(shared), ":- m(1), b.");

        assert_eq!(g.render_rule(&g.rules[5]), "{m(1)} :- l(6), n(1).");
        assert_eq!(g.render_rule(&g.rules[6]), "{m(2)} :- l(6), n(2).");
        assert_eq!(g.render_rule(&g.rules[3]), "l(6) :- c.");

        // :- l(6), not l(13) with l(13) standing for 1 <= {..} <= 1
        let internal = constraints[1];
        assert_eq!(internal.pos_body(), vec![BodyAtom::Atom(6)]);
        let [BodyAtom::Choice(c)] = internal.neg_body()[..] else {
            panic!("expected a choice atom in the negative body")
        };
        assert_eq!(g.choices[c].aux, 13);
        assert_eq!(
            g.choice_node(c).to_string(),
            "1<={(m(1), n(1)), (m(2), n(2))}<=1"
        );
        assert_eq!(
            g.render_rule(internal),
            ":- l(6), not 1<={(m(1), n(1)), (m(2), n(2))}<=1."
        );
        assert_eq!(
            g.resolve_aux(BodyLit {
                atom: BodyAtom::Atom(6),
                negated: false
            })
            .unwrap(),
            vec![vec![BodyLit {
                atom: BodyAtom::Atom(3),
                negated: false
            }]]
        );
    }

    #[test]
    fn rule_index_partitions_rules() {
        let g = sample();
        let total: usize = g.rule_index.values().map(Vec::len).sum();
        assert_eq!(total, g.rules.len());
        assert_eq!(g.rule_index[&(HeadType::Disjunction, vec![])].len(), 2);
        assert_eq!(g.rule_index[&(HeadType::Choice, vec![7])].len(), 1);
    }

    #[test]
    fn nant_examples() {
        let g = sample();
        assert_eq!(names(&g, &g.nant), vec!["a", "b", "c"]);

        let facts = parse_aspif("asp 1 0 0\n5 1 2\n4 1 p 1 1\n0\n").unwrap();
        assert!(reconstruct_rules(&facts).unwrap().nant.is_empty());

        // a :- not b. b :- not a.
        let loop2 =
            parse_aspif("asp 1 0 0\n1 0 1 1 0 1 -2\n1 0 1 2 0 1 -1\n4 1 a 1 1\n4 1 b 1 2\n0\n")
                .unwrap();
        let g = reconstruct_rules(&loop2).unwrap();
        assert_eq!(names(&g, &g.nant), vec!["a", "b"]);
    }

    #[test]
    fn resolve_named_and_disjunctive_aux() {
        // l(3) :- p.  l(3) :- q.  r :- l(3).
        let text = "asp 1 0 0\n1 0 1 3 0 1 1\n1 0 1 3 0 1 2\n1 0 1 4 0 1 3\n4 1 p 1 1\n4 1 q 1 2\n4 1 r 1 4\n0\n";
        let g = reconstruct_rules(&parse_aspif(text).unwrap()).unwrap();
        let pos = |a| BodyLit {
            atom: BodyAtom::Atom(a),
            negated: false,
        };
        let neg = |a| BodyLit {
            atom: BodyAtom::Atom(a),
            negated: true,
        };
        assert_eq!(g.resolve_aux(pos(1)).unwrap(), vec![vec![pos(1)]]);
        assert_eq!(
            g.resolve_aux(pos(3)).unwrap(),
            vec![vec![pos(1)], vec![pos(2)]]
        );
        assert_eq!(g.resolve_aux(neg(3)).unwrap(), vec![vec![neg(1), neg(2)]]);
        assert_eq!(g.flat.iter().filter(|f| f.head == Head::Atom(4)).count(), 2);
    }

    #[test]
    fn aux_cycle_rejected() {
        // l(1) :- l(2).  l(2) :- l(1).  p :- l(1).
        let text = "asp 1 0 0\n1 0 1 1 0 1 2\n1 0 1 2 0 1 1\n1 0 1 3 0 1 1\n4 1 p 1 3\n0\n";
        assert!(matches!(
            reconstruct_rules(&parse_aspif(text).unwrap()),
            Err(ProgramError::AuxCycle { .. })
        ));
    }

    #[test]
    fn heterogeneous_weights_kept_opaque() {
        // l(3) :- 2{p=1; q=2}.  r :- l(3).
        let text =
            "asp 1 0 0\n1 0 1 3 1 2 2 1 1 2 2\n1 0 1 4 0 1 3\n4 1 p 1 1\n4 1 q 1 2\n4 1 r 1 4\n0\n";
        let g = reconstruct_rules(&parse_aspif(text).unwrap()).unwrap();
        assert_eq!(
            g.warnings,
            vec![Warning::UnsupportedWeightBody { statement: 0 }]
        );
        assert!(g.is_opaque_weight(3));
        let q_only = BTreeSet::from([2]);
        assert!(g.interpret(&q_only).atom(3));
        let p_only = BTreeSet::from([1]);
        assert!(!g.interpret(&p_only).atom(3));
    }

    #[test]
    fn choice_evaluation_matches_aux_definition() {
        let g = sample();
        let c = g.choice_of[&13];
        for named in [vec![1, 2, 3, 7], vec![1, 2, 3, 7, 8], vec![1, 2, 3]] {
            let a: BTreeSet<AtomId> = named.into_iter().collect();
            let i = g.interpret(&a);
            assert_eq!(i.choice(c), i.atom(13));
        }
        let a = BTreeSet::from([1, 2, 3, 7]);
        assert_eq!(g.interpret(&a).satisfied_elements(c), vec![0]);
    }

    #[test]
    fn tuples_put_chosen_atom_first() {
        let g =
            reconstruct_rules(&parse_aspif(include_str!("../tests/data/coloring.aspif")).unwrap())
                .unwrap();
        let labels: Vec<String> = g
            .choices
            .iter()
            .enumerate()
            .filter(|(_, c)| c.upper.is_some())
            .map(|(i, _)| g.choice_node(i).to_string())
            .collect();
        assert!(labels.contains(
            &"1<={(colored(1,red), color(red)), (colored(1,green), color(green)), (colored(1,blue), color(blue))}<=1"
                .to_string()
        ));
    }
}
