//! Brute-force answer sets for small programs, and a seeded generator of
//! random programs in the shape a grounder would emit.
//!
//! The solver works directly on aspif statements and shares nothing with
//! the reconstruction pipeline except atom naming, so it can serve as an
//! independent reference.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::aspif::{
    emit_aspif, parse_aspif, AspifProgram, BodySpec, HeadType, Literal, RuleStatement, Statement,
};
use crate::program::{build_symbol_table, ProgramError};

/// Default bound on the number of atoms whose truth is guessed.
/// Heads, weighted positive atoms and the weight needed to fire.
type ReductRule = (Vec<u64>, Vec<(u64, u64)>, u64);

pub const DEFAULT_ATOM_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{count} atoms to guess exceeds the limit of {cap}")]
    TooLarge { count: usize, cap: usize },
    #[error("disjunctive heads are not supported")]
    Disjunction,
    #[error(transparent)]
    Program(#[from] ProgramError),
}

pub type Interpretation = BTreeSet<String>;

struct Solver<'a> {
    rules: Vec<&'a RuleStatement>,
    facts: BTreeSet<u64>,
    /// Names of the atoms shown by output statements.
    names: BTreeMap<u64, String>,
    /// Atoms whose truth is guessed, sorted by name.
    guessable: Vec<u64>,
    /// Remaining head atoms, computed from the guess.
    derived: Vec<u64>,
}

impl<'a> Solver<'a> {
    fn new(p: &'a AspifProgram) -> Result<Self, OracleError> {
        let table = build_symbol_table(p)?;
        let rules: Vec<&RuleStatement> = p.rules().collect();
        if rules
            .iter()
            .any(|r| r.head_type == HeadType::Disjunction && r.head_atoms.len() > 1)
        {
            return Err(OracleError::Disjunction);
        }
        let facts: BTreeSet<u64> = table.iter().filter(|a| a.is_fact).map(|a| a.id).collect();
        let names = table.named().map(|a| (a.id, a.name.clone())).collect();
        let mut heads: BTreeSet<u64> = BTreeSet::new();
        let mut choice_heads: BTreeSet<u64> = BTreeSet::new();
        for r in &rules {
            heads.extend(r.head_atoms.iter().copied());
            if r.head_type == HeadType::Choice {
                choice_heads.extend(r.head_atoms.iter().copied());
            }
        }
        let mut guessable: Vec<u64> = heads
            .iter()
            .copied()
            .filter(|a| !facts.contains(a))
            .filter(|&a| choice_heads.contains(&a) || table.get(a).is_some_and(|x| !x.is_aux))
            .collect();
        guessable.sort_by(|a, b| table.name(*a).cmp(table.name(*b)).then(a.cmp(b)));
        let derived = heads
            .into_iter()
            .filter(|a| !facts.contains(a) && !guessable.contains(a))
            .collect();
        Ok(Solver {
            rules,
            facts,
            names,
            guessable,
            derived,
        })
    }

    fn body_true(body: &BodySpec, i: &BTreeSet<u64>) -> bool {
        let holds = |l: &Literal| i.contains(&l.atom()) == l.is_positive();
        match body {
            BodySpec::Normal(lits) => lits.iter().all(holds),
            BodySpec::Weight {
                lower_bound,
                literals,
            } => {
                let sum: u64 = literals
                    .iter()
                    .filter(|w| holds(&w.literal))
                    .map(|w| w.weight)
                    .sum();
                sum >= *lower_bound
            }
        }
    }

    /// Complete a guess with the atoms it forces, by iterating the rules
    /// for non-guessed heads from the empty set.
    fn complete(&self, guess: &BTreeSet<u64>) -> Option<BTreeSet<u64>> {
        let base: BTreeSet<u64> = guess.union(&self.facts).copied().collect();
        let mut current = base.clone();
        for _ in 0..=self.derived.len() + 1 {
            let mut next = base.clone();
            for r in &self.rules {
                if r.head_type == HeadType::Disjunction {
                    if let [h] = r.head_atoms[..] {
                        if self.derived.contains(&h) && Self::body_true(&r.body, &current) {
                            next.insert(h);
                        }
                    }
                }
            }
            if next == current {
                return Some(current);
            }
            current = next;
        }
        None
    }

    /// Least model of the reduct of the program with respect to `i`.
    fn reduct_model(&self, i: &BTreeSet<u64>) -> BTreeSet<u64> {
        // positive remainder of each surviving rule: (heads, positive atoms, needed weight)
        let mut reduct: Vec<ReductRule> = Vec::new();
        for r in &self.rules {
            let heads: Vec<u64> = match r.head_type {
                HeadType::Disjunction => r.head_atoms.clone(),
                HeadType::Choice => r
                    .head_atoms
                    .iter()
                    .copied()
                    .filter(|h| i.contains(h))
                    .collect(),
            };
            if heads.is_empty() {
                continue;
            }
            match &r.body {
                BodySpec::Normal(lits) => {
                    if lits
                        .iter()
                        .any(|l| !l.is_positive() && i.contains(&l.atom()))
                    {
                        continue;
                    }
                    let pos: Vec<(u64, u64)> = lits
                        .iter()
                        .filter(|l| l.is_positive())
                        .map(|l| (l.atom(), 1))
                        .collect();
                    let need = pos.len() as u64;
                    reduct.push((heads, pos, need));
                }
                BodySpec::Weight {
                    lower_bound,
                    literals,
                } => {
                    let from_negative: u64 = literals
                        .iter()
                        .filter(|w| !w.literal.is_positive() && !i.contains(&w.literal.atom()))
                        .map(|w| w.weight)
                        .sum();
                    let pos = literals
                        .iter()
                        .filter(|w| w.literal.is_positive())
                        .map(|w| (w.literal.atom(), w.weight))
                        .collect();
                    reduct.push((heads, pos, lower_bound.saturating_sub(from_negative)));
                }
            }
        }
        let mut model = self.facts.clone();
        let mut changed = true;
        while changed {
            changed = false;
            for (heads, pos, need) in &reduct {
                if heads.iter().all(|h| model.contains(h)) {
                    continue;
                }
                let have: u64 = pos
                    .iter()
                    .filter(|(a, _)| model.contains(a))
                    .map(|(_, w)| w)
                    .sum();
                if have >= *need {
                    model.extend(heads.iter().copied());
                    changed = true;
                }
            }
        }
        model
    }

    fn stable(&self, i: &BTreeSet<u64>) -> bool {
        let constraints_hold = self
            .rules
            .iter()
            .filter(|r| r.head_type == HeadType::Disjunction && r.head_atoms.is_empty())
            .all(|r| !Self::body_true(&r.body, i));
        constraints_hold && self.reduct_model(i) == *i
    }

    fn named(&self, i: &BTreeSet<u64>) -> Interpretation {
        i.iter()
            .filter_map(|a| self.names.get(a))
            .cloned()
            .collect()
    }

    fn check_guess(&self, guess: &BTreeSet<u64>) -> Option<BTreeSet<u64>> {
        let full = self.complete(guess)?;
        self.stable(&full).then_some(full)
    }
}

/// All answer sets, projected onto named atoms, ordered by size and then
/// by their sorted atom names.
pub fn enumerate_answer_sets(
    p: &AspifProgram,
    cap: usize,
) -> Result<Vec<Interpretation>, OracleError> {
    let s = Solver::new(p)?;
    let n = s.guessable.len();
    if n > cap {
        return Err(OracleError::TooLarge { count: n, cap });
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for mask in 0..1u64 << n {
        let guess: BTreeSet<u64> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| s.guessable[i])
            .collect();
        if let Some(full) = s.check_guess(&guess) {
            let named = s.named(&full);
            if seen.insert(named.clone()) {
                out.push(named);
            }
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// Whether the named atoms `answer` form an answer set.
pub fn check_answer_set(p: &AspifProgram, answer: &Interpretation) -> Result<bool, OracleError> {
    let s = Solver::new(p)?;
    let by_name: BTreeMap<&str, u64> = s.names.iter().map(|(id, n)| (n.as_str(), *id)).collect();
    let mut guess = BTreeSet::new();
    for name in answer {
        let id = *by_name
            .get(name.as_str())
            .ok_or_else(|| ProgramError::UnknownAtom(name.clone()))?;
        if s.guessable.contains(&id) {
            guess.insert(id);
        }
    }
    Ok(s.check_guess(&guess)
        .is_some_and(|full| s.named(&full) == *answer))
}

/// A generated program: readable source and its grounder-style encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomProgram {
    pub source: String,
    pub aspif: AspifProgram,
}

struct Encoder {
    next: u64,
    lines: Vec<String>,
}

impl Encoder {
    fn fresh(&mut self) -> u64 {
        self.next += 1;
        self.next
    }

    fn rule(&mut self, head_type: u8, heads: &[u64], body: &[i64]) {
        let mut line = format!("1 {head_type} {}", heads.len());
        for h in heads {
            write!(line, " {h}").unwrap();
        }
        write!(line, " 0 {}", body.len()).unwrap();
        for b in body {
            write!(line, " {b}").unwrap();
        }
        self.lines.push(line);
    }

    fn weight_rule(&mut self, head: u64, lower: u64, lits: &[i64]) {
        let mut line = format!("1 0 1 {head} 1 {lower} {}", lits.len());
        for l in lits {
            write!(line, " {l} 1").unwrap();
        }
        self.lines.push(line);
    }
}

fn lit_text(atom: u64, positive: bool) -> String {
    if positive {
        format!("p{}", atom - 1)
    } else {
        format!("not p{}", atom - 1)
    }
}

fn random_body(rng: &mut ChaCha8Rng, n_atoms: u64, max_len: usize) -> Vec<i64> {
    let len = rng.gen_range(0..=max_len);
    let mut body: Vec<i64> = Vec::new();
    for _ in 0..len {
        let a = rng.gen_range(1..=n_atoms) as i64;
        if body.iter().any(|b| b.abs() == a) {
            continue;
        }
        body.push(if rng.gen_bool(0.5) { a } else { -a });
    }
    body
}

fn body_text(body: &[i64]) -> String {
    body.iter()
        .map(|&l| lit_text(l.unsigned_abs(), l > 0))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Deterministic random program over atoms `p0 … p{n_atoms-1}`. Choice rules
/// and bodies are encoded with auxiliary atoms the way a grounder does.
pub fn random_program(seed: u64, n_atoms: usize, n_rules: usize, p_choice: f64) -> RandomProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_atoms as u64;
    let mut enc = Encoder {
        next: n,
        lines: Vec::new(),
    };
    let mut source = String::new();
    let mut facts = BTreeSet::new();
    for _ in 0..if n == 0 { 0 } else { n_rules } {
        if rng.gen_bool(p_choice) {
            let k = rng.gen_range(1..=3.min(n));
            let mut heads: Vec<u64> = Vec::new();
            while heads.len() < k as usize {
                let h = rng.gen_range(1..=n);
                if !heads.contains(&h) {
                    heads.push(h);
                }
            }
            let conds: Vec<Option<u64>> = heads
                .iter()
                .map(|_| rng.gen_bool(0.3).then(|| rng.gen_range(1..=n)))
                .collect();
            let lower = if rng.gen_bool(0.5) {
                0
            } else {
                rng.gen_range(0..=k)
            };
            let upper = rng.gen_bool(0.5).then(|| rng.gen_range(lower..=k));
            let body = random_body(&mut rng, n, 2);

            let elems: Vec<String> = heads
                .iter()
                .zip(&conds)
                .map(|(h, c)| match c {
                    Some(c) => format!("{} : {}", lit_text(*h, true), lit_text(*c, true)),
                    None => lit_text(*h, true),
                })
                .collect();
            let lo = if lower > 0 {
                format!("{lower} ")
            } else {
                String::new()
            };
            let hi = upper.map(|u| format!(" {u}")).unwrap_or_default();
            let tail = if body.is_empty() {
                String::new()
            } else {
                format!(" :- {}", body_text(&body))
            };
            writeln!(source, "{lo}{{{}}}{hi}{tail}.", elems.join("; ")).unwrap();

            let guard: Vec<i64> = if body.is_empty() {
                Vec::new()
            } else {
                let b = enc.fresh();
                enc.rule(0, &[b], &body);
                vec![b as i64]
            };
            let mut elem_lits = Vec::new();
            for (h, c) in heads.iter().zip(&conds) {
                let mut b = guard.clone();
                if let Some(c) = c {
                    b.push(*c as i64);
                }
                enc.rule(1, &[*h], &b);
                match c {
                    Some(c) => {
                        let e = enc.fresh();
                        enc.rule(0, &[e], &[*c as i64, *h as i64]);
                        elem_lits.push(e as i64);
                    }
                    None => elem_lits.push(*h as i64),
                }
            }
            let needs_upper = upper.is_some_and(|u| u < k);
            let mut wl = None;
            if lower > 0 {
                let w = enc.fresh();
                enc.weight_rule(w, lower, &elem_lits);
                wl = Some(w);
            }
            let mut wu = None;
            if needs_upper {
                let w = enc.fresh();
                enc.weight_rule(w, upper.unwrap() + 1, &elem_lits);
                wu = Some(w);
            }
            let mut check = guard.clone();
            match (wl, wu) {
                (Some(l), Some(u)) => {
                    let w = enc.fresh();
                    enc.rule(0, &[w], &[l as i64, -(u as i64)]);
                    check.push(-(w as i64));
                }
                (Some(l), None) => check.push(-(l as i64)),
                (None, Some(u)) => check.push(u as i64),
                (None, None) => continue,
            }
            enc.rule(0, &[], &check);
        } else {
            let shape = rng.gen_range(0..10);
            if shape < 2 {
                let mut body = random_body(&mut rng, n, 3);
                if body.is_empty() {
                    body.push(rng.gen_range(1..=n) as i64);
                }
                writeln!(source, ":- {}.", body_text(&body)).unwrap();
                enc.rule(0, &[], &body);
            } else if shape < 3 {
                let h = rng.gen_range(1..=n);
                writeln!(source, "{}.", lit_text(h, true)).unwrap();
                facts.insert(h);
            } else {
                let h = rng.gen_range(1..=n);
                let body = random_body(&mut rng, n, 3);
                if body.is_empty() {
                    writeln!(source, "{}.", lit_text(h, true)).unwrap();
                } else {
                    writeln!(source, "{} :- {}.", lit_text(h, true), body_text(&body)).unwrap();
                }
                if body.len() > 1 && rng.gen_bool(0.2) {
                    let x = enc.fresh();
                    enc.rule(0, &[x], &body);
                    enc.rule(0, &[h], &[x as i64]);
                } else {
                    enc.rule(0, &[h], &body);
                }
            }
        }
    }
    let mut text = String::from("asp 1 0 0\n");
    for f in &facts {
        writeln!(text, "5 {f} 2").unwrap();
    }
    for line in &enc.lines {
        writeln!(text, "{line}").unwrap();
    }
    for a in 1..=n {
        let name = format!("p{}", a - 1);
        writeln!(text, "4 {} {name} 1 {a}", name.len()).unwrap();
    }
    text.push_str("0\n");
    let aspif = parse_aspif(&text).expect("generated aspif parses");
    debug_assert_eq!(emit_aspif(&aspif), text);
    RandomProgram { source, aspif }
}

/// Number of rule, output and external statements in `p`.
pub fn statement_count(p: &AspifProgram) -> usize {
    p.statements
        .iter()
        .filter(|s| !matches!(s, Statement::Opaque(_)))
        .count()
}
