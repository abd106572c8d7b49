//! Supported sets of literals with respect to an answer set (the table E_r).

use std::collections::BTreeSet;

use thiserror::Error;

use crate::node::{ENode, SupportSet, SupportTable, Tuple};
use crate::program::{AtomId, BodyAtom, ChoiceId, GroundProgram, Head, Interp, Prim};

/// Upper bound on the number of falsifier combinations kept for one atom.
pub const MAX_FALSIFIER_SETS: usize = 512;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SupportError {
    #[error("atom {atom} is true but no rule supports it")]
    NoSupport { atom: String },
}

/// Node standing for a flattened body literal.
pub fn prim_node(g: &GroundProgram, p: Prim) -> ENode {
    match p.atom {
        BodyAtom::Atom(a) => ENode::Lit(g.lit(a, p.negated)),
        BodyAtom::Choice(c) if p.negated => ENode::ChoiceNeg(g.choice_node(c)),
        BodyAtom::Choice(c) => ENode::ChoicePos(g.choice_node(c)),
    }
}

/// Node for a choice atom occurrence as it evaluates under the answer set.
pub fn choice_state_node(g: &GroundProgram, interp: &Interp, c: ChoiceId) -> ENode {
    if interp.choice(c) {
        ENode::ChoicePos(g.choice_node(c))
    } else {
        ENode::ChoiceNeg(g.choice_node(c))
    }
}

/// Expansion of a choice node: the satisfied elements as tuples, each of
/// which is supported by `*True`, or `*Empty` when no element holds.
pub fn choice_body_support(
    g: &GroundProgram,
    interp: &Interp,
    c: ChoiceId,
    node: ENode,
) -> Vec<(ENode, Vec<SupportSet>)> {
    let choice = g.choice_node(c);
    let satisfied = interp.satisfied_elements(c);
    if satisfied.is_empty() {
        return vec![(node, vec![BTreeSet::from([ENode::StarEmpty])])];
    }
    let tuples: Vec<Tuple> = satisfied
        .into_iter()
        .map(|i| choice.elements[i].clone())
        .collect();
    let s: SupportSet = tuples.iter().cloned().map(ENode::Tuple).collect();
    let mut out = vec![(node, vec![s])];
    for t in tuples {
        out.push((ENode::Tuple(t), vec![BTreeSet::from([ENode::StarTrue])]));
    }
    out
}

fn body_nodes(g: &GroundProgram, body: &[Prim]) -> SupportSet {
    body.iter().map(|&p| prim_node(g, p)).collect()
}

/// One supported set per satisfied rule whose head contains `c`.
pub fn supported_sets_true(
    g: &GroundProgram,
    interp: &Interp,
    c: AtomId,
) -> Result<Vec<SupportSet>, SupportError> {
    if g.facts.contains(&c) {
        return Ok(vec![BTreeSet::from([ENode::Top])]);
    }
    if g.is_opaque_weight(c) {
        return Ok(vec![BTreeSet::from([ENode::Top])]);
    }
    let mut sets: Vec<SupportSet> = Vec::new();
    for fr in g.flat.iter().filter(|fr| fr.head.contains(c)) {
        if !interp.conj(&fr.body) {
            continue;
        }
        let mut set = body_nodes(g, &fr.body);
        if matches!(fr.head, Head::Choice(_)) {
            set.insert(ENode::PlusChoice);
        }
        if set.is_empty() {
            set.insert(ENode::Top);
        }
        if !sets.contains(&set) {
            sets.push(set);
        }
    }
    if sets.is_empty() {
        return Err(SupportError::NoSupport {
            atom: g.symbols.name(c).to_string(),
        });
    }
    Ok(sets)
}

/// Combinations of falsifiers, one per rule whose head contains `c`.
pub fn supported_sets_false(g: &GroundProgram, interp: &Interp, c: AtomId) -> Vec<SupportSet> {
    if g.is_opaque_weight(c) {
        return vec![BTreeSet::from([ENode::Bottom])];
    }
    let mut combos: Vec<SupportSet> = vec![BTreeSet::new()];
    let mut any_rule = false;
    for fr in g.flat.iter().filter(|fr| fr.head.contains(c)) {
        any_rule = true;
        let options: Vec<SupportSet> = if interp.conj(&fr.body) {
            // only a choice head can leave its atom false under a true body
            let mut set = body_nodes(g, &fr.body);
            set.insert(ENode::MinusChoice);
            vec![set]
        } else {
            fr.body
                .iter()
                .filter(|&&p| !interp.prim(p))
                .map(|&p| {
                    let flipped = Prim {
                        atom: p.atom,
                        negated: !p.negated,
                    };
                    BTreeSet::from([prim_node(g, flipped)])
                })
                .collect()
        };
        let mut next = Vec::new();
        for base in &combos {
            for opt in &options {
                let mut set = base.clone();
                set.extend(opt.iter().cloned());
                next.push(set);
            }
        }
        combos = minimize(next);
        combos.truncate(MAX_FALSIFIER_SETS);
    }
    if !any_rule {
        return vec![BTreeSet::from([ENode::Bottom])];
    }
    combos
}

/// Remove duplicates and strict supersets, keeping first-seen order.
fn minimize(sets: Vec<SupportSet>) -> Vec<SupportSet> {
    let mut kept: Vec<SupportSet> = Vec::new();
    for s in sets {
        if kept.iter().any(|k| k.is_subset(&s)) {
            continue;
        }
        kept.retain(|k| !s.is_subset(k));
        kept.push(s);
    }
    kept
}

/// Choice atoms mentioned in the supported sets, with their expansions.
fn expand_choices(g: &GroundProgram, interp: &Interp, table: &mut SupportTable, nodes: &[ENode]) {
    for node in nodes {
        let choice = match node {
            ENode::ChoicePos(c) | ENode::ChoiceNeg(c) => c,
            _ => continue,
        };
        let Some(id) = (0..g.choices.len()).find(|&i| &g.choice_node(i) == choice) else {
            continue;
        };
        for (key, sets) in choice_body_support(g, interp, id, node.clone()) {
            table.set(key, sets);
        }
    }
}

/// E_r: supported sets for every atom (or its negation) under `answer`.
pub fn build_er(
    g: &GroundProgram,
    answer: &BTreeSet<AtomId>,
) -> Result<SupportTable, SupportError> {
    let interp = g.interpret(answer);
    let mut table = SupportTable::new();
    let mut mentioned = Vec::new();
    for c in g.explainable_atoms() {
        let truth = interp.atom(c);
        let sets = if truth {
            supported_sets_true(g, &interp, c)?
        } else {
            supported_sets_false(g, &interp, c)
        };
        mentioned.extend(sets.iter().flatten().cloned());
        table.set(ENode::Lit(g.lit(c, !truth)), sets);
    }
    expand_choices(g, &interp, &mut table, &mentioned);
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aspif::parse_aspif;
    use crate::node::{Glyphs, Lit};
    use crate::program::reconstruct_rules;

    fn program(text: &str) -> GroundProgram {
        reconstruct_rules(&parse_aspif(text).unwrap()).unwrap()
    }

    fn set(items: &[&str]) -> SupportSet {
        items.iter().map(|s| node(s)).collect()
    }

    fn node(s: &str) -> ENode {
        match s {
            "T" => ENode::Top,
            "F" => ENode::Bottom,
            "+choice" => ENode::PlusChoice,
            "-choice" => ENode::MinusChoice,
            _ => ENode::Lit(Lit::parse(s).unwrap()),
        }
    }

    fn sample_er() -> (GroundProgram, SupportTable) {
        let g = program(include_str!("../tests/data/sample.aspif"));
        let a = g.atoms_from_names(["n(1)", "n(2)", "c", "m(1)"]).unwrap();
        let er = build_er(&g, &a).unwrap();
        (g, er)
    }

    #[test]
    fn sample_table() {
        let (_, er) = sample_er();
        let expect = [
            ("c", vec![set(&["~a"])]),
            ("~a", vec![set(&["c"])]),
            ("~b", vec![set(&["~a"])]),
            ("m(1)", vec![set(&["c", "+choice", "n(1)"])]),
            ("~m(2)", vec![set(&["c", "-choice", "n(2)"])]),
            ("n(1)", vec![set(&["T"])]),
            ("n(2)", vec![set(&["T"])]),
        ];
        for (key, sets) in &expect {
            assert_eq!(er.get(&node(key)).unwrap(), sets.as_slice(), "{key}");
        }
        assert_eq!(er.len(), expect.len());
    }

    #[test]
    fn dump_format() {
        let (_, er) = sample_er();
        let dump = er.dump(Glyphs::Ascii);
        assert!(dump.contains("n(1) : [{T}]\n"));
        assert!(dump.contains("~a : [{c}]\n"));
    }

    #[test]
    fn facts_and_unheaded_atoms() {
        let g = program("asp 1 0 0\n5 1 2\n4 1 p 1 1\n0\n");
        let er = build_er(&g, &BTreeSet::from([1])).unwrap();
        assert_eq!(er.len(), 1);
        assert_eq!(er.get(&node("p")).unwrap(), &[set(&["T"])]);

        let g = program("asp 1 0 0\n1 0 1 1 0 0\n4 1 p 1 1\n0\n");
        let er = build_er(&g, &BTreeSet::from([1])).unwrap();
        assert_eq!(er.get(&node("p")).unwrap(), &[set(&["T"])]);

        // z appears only in a body
        let g = program("asp 1 0 0\n1 0 1 1 0 1 -2\n4 1 p 1 1\n4 1 z 1 2\n0\n");
        let er = build_er(&g, &BTreeSet::from([1])).unwrap();
        assert_eq!(er.get(&node("~z")).unwrap(), &[set(&["F"])]);
        assert_eq!(er.get(&node("p")).unwrap(), &[set(&["~z"])]);
    }

    #[test]
    fn unsupported_true_atom() {
        let g = program("asp 1 0 0\n1 0 1 1 0 1 2\n4 1 p 1 1\n4 1 q 1 2\n0\n");
        assert_eq!(
            build_er(&g, &BTreeSet::from([1])),
            Err(SupportError::NoSupport { atom: "p".into() })
        );
    }

    #[test]
    fn false_atom_crosses_rules() {
        // p :- q, r.  p :- s.   with everything false
        let g = program(
            "asp 1 0 0\n1 0 1 1 0 2 2 3\n1 0 1 1 0 1 4\n4 1 p 1 1\n4 1 q 1 2\n4 1 r 1 3\n4 1 s 1 4\n0\n",
        );
        let er = build_er(&g, &BTreeSet::new()).unwrap();
        assert_eq!(
            er.get(&node("~p")).unwrap(),
            &[set(&["~q", "~s"]), set(&["~r", "~s"])]
        );
    }

    #[test]
    fn minimize_drops_supersets() {
        let sets = vec![set(&["a", "b"]), set(&["a"]), set(&["a"]), set(&["c"])];
        assert_eq!(minimize(sets), vec![set(&["a"]), set(&["c"])]);
    }

    #[test]
    fn choice_expansion_empty_and_nonempty() {
        let g = program(include_str!("../tests/data/sample.aspif"));
        let c = g.choices.iter().position(|c| c.upper.is_some()).unwrap();
        let a = g.atoms_from_names(["n(1)", "n(2)", "c", "m(1)"]).unwrap();
        let interp = g.interpret(&a);
        let n = choice_state_node(&g, &interp, c);
        assert_eq!(n.label(Glyphs::Ascii), "1<={(m(1), n(1)), (m(2), n(2))}<=1");
        let exp = choice_body_support(&g, &interp, c, n.clone());
        assert_eq!(exp.len(), 2);
        assert_eq!(
            exp[0].1[0].iter().next().unwrap().label(Glyphs::Ascii),
            "(m(1), n(1))"
        );
        assert_eq!(exp[1].1, vec![BTreeSet::from([ENode::StarTrue])]);

        let none = g.atoms_from_names(["n(1)", "n(2)", "c"]).unwrap();
        let interp = g.interpret(&none);
        let n = choice_state_node(&g, &interp, c);
        assert!(matches!(n, ENode::ChoiceNeg(_)));
        let exp = choice_body_support(&g, &interp, c, n);
        assert_eq!(
            exp,
            vec![(exp[0].0.clone(), vec![BTreeSet::from([ENode::StarEmpty])])]
        );
    }
}
