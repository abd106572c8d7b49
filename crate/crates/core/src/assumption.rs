//! Assumption sets.
//!
//! Some false atoms cannot be explained from the program alone (think of
//! `a :- not b. b :- not a.` with `a` chosen). Such atoms are *assumed*
//! false. This module computes a subset-minimal set `U` of them.
//!
//! 1. `TA`: tentative assumptions, the atoms under negation that are false
//!    in the answer set without being false in the well-founded model.
//! 2. `DA`: for each `a` in `TA`, every minimal `D ⊆ TA \ {a}` such that
//!    `~a` has an explanation graph once `D` is assumed. Atoms without any
//!    such `D` must be assumed (`T`); the others are deferred (`T′`).
//! 3. `min(B)`: minimal sets of deferred atoms whose assumption lets every
//!    deferred atom be derived through `DA`.
//!
//! `U = T ∪ B` for the lexicographically smallest `B`.

use std::collections::{BTreeMap, BTreeSet};

use crate::egraph::justify;
use crate::node::{ENode, SupportTable};
use crate::program::{AtomId, BodyAtom, GroundProgram, Head, Interp};

/// Above this many tentative assumptions the derivation sets and cycle
/// breakers are found greedily.
pub const EXHAUSTIVE_LIMIT: usize = 12;

pub type AtomSet = BTreeSet<String>;
pub type DerivationMap = BTreeMap<String, Vec<AtomSet>>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AssumptionReport {
    pub ta: AtomSet,
    /// `T`: atoms that must be assumed.
    pub t_must: AtomSet,
    /// `T′`: atoms derivable from other tentative assumptions.
    pub t_deferred: AtomSet,
    pub da: DerivationMap,
    pub min_b_candidates: Vec<AtomSet>,
    pub chosen_u: AtomSet,
    /// Set when `T ∪ B` left some literal unexplained and `U` was instead
    /// shrunk greedily from `TA`.
    pub fallback: bool,
}

impl AssumptionReport {
    /// `T ∪ B` for every candidate `B`.
    pub fn u_candidates(&self) -> Vec<AtomSet> {
        if self.fallback {
            return vec![self.chosen_u.clone()];
        }
        self.min_b_candidates
            .iter()
            .map(|b| self.t_must.union(b).cloned().collect())
            .collect()
    }

    pub fn summary(&self) -> String {
        format!(
            "TA={} T={} U={}",
            braces(&self.ta),
            braces(&self.t_must),
            braces(&self.chosen_u)
        )
    }
}

pub fn braces(set: &AtomSet) -> String {
    let items: Vec<&str> = set.iter().map(String::as_str).collect();
    format!("{{{}}}", items.join(","))
}

/// Well-founded model of the flattened rules, with choice atoms and opaque
/// atoms fixed by the answer set. Returns (true atoms, possibly true atoms).
///
/// Atoms in choice heads are never well-founded true, but stay possibly
/// true while the rule body may hold.
pub fn well_founded(g: &GroundProgram, interp: &Interp) -> (BTreeSet<AtomId>, BTreeSet<AtomId>) {
    let fixed = |a: AtomId| g.facts.contains(&a) || g.is_opaque_weight(a);
    let least = |assumed: &BTreeSet<AtomId>, with_choices: bool| {
        let mut model: BTreeSet<AtomId> = g.facts.iter().copied().collect();
        model.extend(
            g.explainable_atoms()
                .into_iter()
                .filter(|&a| g.is_opaque_weight(a) && interp.atom(a)),
        );
        let mut changed = true;
        while changed {
            changed = false;
            for fr in &g.flat {
                let heads: Vec<AtomId> = match &fr.head {
                    Head::None => continue,
                    Head::Atom(h) => vec![*h],
                    Head::Choice(hs) if with_choices => hs.clone(),
                    Head::Choice(_) => continue,
                };
                if heads.iter().all(|h| model.contains(h)) {
                    continue;
                }
                let fires = fr.body.iter().all(|p| match p.atom {
                    BodyAtom::Choice(_) => interp.prim(*p),
                    BodyAtom::Atom(a) if fixed(a) => interp.prim(*p),
                    BodyAtom::Atom(a) if p.negated => !assumed.contains(&a),
                    BodyAtom::Atom(a) => model.contains(&a),
                });
                if fires {
                    model.extend(heads);
                    changed = true;
                }
            }
        }
        model
    };
    let mut sure = BTreeSet::new();
    loop {
        let possible = least(&sure, true);
        let next = least(&possible, false);
        if next == sure {
            return (sure, possible);
        }
        sure = next;
    }
}

/// TA: atoms under negation, false in the answer set, and not false in the
/// well-founded model.
pub fn tentative_assumptions(g: &GroundProgram, answer: &BTreeSet<AtomId>) -> BTreeSet<AtomId> {
    let interp = g.interpret(answer);
    let (_, possible) = well_founded(g, &interp);
    g.nant
        .iter()
        .copied()
        .filter(|&a| !interp.atom(a) && possible.contains(&a))
        .collect()
}

fn explained(e: &SupportTable, u: &AtomSet, atom: &str) -> bool {
    justify(e, u).is_justified(&ENode::neg_atom(atom))
}

/// Every literal key of `e` has an explanation graph under `u`.
pub fn sufficient(e: &SupportTable, u: &AtomSet) -> bool {
    let j = justify(e, u);
    e.keys()
        .filter(|k| matches!(k, ENode::Lit(_)))
        .all(|k| j.is_justified(k))
}

fn subsets_by_size(items: &[String]) -> Vec<AtomSet> {
    let n = items.len();
    let mut all: Vec<AtomSet> = (0u64..1 << n)
        .map(|mask| {
            (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| items[i].clone())
                .collect()
        })
        .collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all
}

/// Minimal sets `D ⊆ pool` with `accept(D)`, assuming `accept` is monotone.
fn minimal_sets(pool: &[String], accept: impl Fn(&AtomSet) -> bool) -> Vec<AtomSet> {
    let full: AtomSet = pool.iter().cloned().collect();
    if !accept(&full) {
        return Vec::new();
    }
    if pool.len() > EXHAUSTIVE_LIMIT {
        let mut d = full;
        for x in pool {
            d.remove(x);
            if !accept(&d) {
                d.insert(x.clone());
            }
        }
        return vec![d];
    }
    let mut found: Vec<AtomSet> = Vec::new();
    for s in subsets_by_size(pool) {
        if found.iter().any(|f| f.is_subset(&s)) {
            continue;
        }
        if accept(&s) {
            found.push(s);
        }
    }
    found
}

/// Split TA into atoms that must be assumed and atoms derivable from other
/// tentative assumptions, recording every minimal derivation set.
pub fn derivation_analysis(e: &SupportTable, ta: &AtomSet) -> (AtomSet, AtomSet, DerivationMap) {
    let mut da = DerivationMap::new();
    for a in ta {
        let pool: Vec<String> = ta.iter().filter(|x| *x != a).cloned().collect();
        let sets = minimal_sets(&pool, |d| explained(e, d, a));
        if !sets.is_empty() {
            da.insert(a.clone(), sets);
        }
    }
    let deferred: AtomSet = da.keys().cloned().collect();
    let must = ta.difference(&deferred).cloned().collect();
    (must, deferred, da)
}

/// Atoms derived from `assumed` by closing under `da`.
fn closure(da: &DerivationMap, assumed: &AtomSet) -> AtomSet {
    let mut derived = assumed.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for (x, options) in da {
            if !derived.contains(x) && options.iter().any(|d| d.is_subset(&derived)) {
                derived.insert(x.clone());
                changed = true;
            }
        }
    }
    derived
}

/// Minimal sets of keys of `da` that, once assumed, let every key be
/// derived. Atoms that are not keys count as assumed.
pub fn min_cycle_break(da: &DerivationMap) -> Vec<AtomSet> {
    let keys: Vec<String> = da.keys().cloned().collect();
    let others: AtomSet = da
        .values()
        .flatten()
        .flatten()
        .filter(|x| !da.contains_key(*x))
        .cloned()
        .collect();
    let breaks = |b: &AtomSet| {
        let assumed: AtomSet = others.union(b).cloned().collect();
        let derived = closure(da, &assumed);
        keys.iter().all(|k| derived.contains(k))
    };
    let found = minimal_sets(&keys, breaks);
    if found.is_empty() {
        vec![AtomSet::new()]
    } else {
        found
    }
}

/// TA, T, T′, DA, min(B) and U for the answer set, using the merged table.
pub fn minimal_assumption_sets(
    g: &GroundProgram,
    answer: &BTreeSet<AtomId>,
    e: &SupportTable,
) -> AssumptionReport {
    let ta: AtomSet = g.names_of(&tentative_assumptions(g, answer));
    let (t_must, t_deferred, da) = derivation_analysis(e, &ta);
    let mut min_b_candidates = min_cycle_break(&da);
    min_b_candidates.sort();
    let best = min_b_candidates.first().cloned().unwrap_or_default();
    let mut report = AssumptionReport {
        chosen_u: t_must.union(&best).cloned().collect(),
        ta,
        t_must,
        t_deferred,
        da,
        min_b_candidates,
        fallback: false,
    };
    if !sufficient(e, &report.chosen_u) {
        let mut u = report.ta.clone();
        for x in report.ta.iter() {
            u.remove(x);
            if !sufficient(e, &u) {
                u.insert(x.clone());
            }
        }
        report.chosen_u = u;
        report.fallback = true;
    }
    report
}
