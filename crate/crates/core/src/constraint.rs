//! Constraint preprocessing: links literals that occur in constraint bodies
//! to `triggered_constraint` nodes recording why each constraint stays
//! unviolated (the table E_c).

use std::collections::BTreeSet;

use thiserror::Error;

use crate::node::{ENode, SupportSet, SupportTable};
use crate::program::{AtomId, BodyAtom, ChoiceId, GroundProgram, Head, Interp, Prim};
use crate::support::{choice_body_support, prim_node};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("constraint {rendered} is violated by the answer set")]
    UnviolableConstraint { rendered: String },
}

/// Side of a constraint body a choice atom occurs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    PosBody,
    NegBody,
}

/// The choice-atom contribution to a constraint's support, or `None` when
/// the occurrence does not falsify the body.
pub fn classify_choice_support(
    g: &GroundProgram,
    interp: &Interp,
    c: ChoiceId,
    side: Side,
) -> Option<ENode> {
    let holds = interp.choice(c);
    match (side, holds) {
        (Side::PosBody, false) => Some(ENode::ChoiceNeg(g.choice_node(c))),
        (Side::NegBody, true) => Some(ENode::ChoicePos(g.choice_node(c))),
        _ => None,
    }
}

/// Violation and support of one flattened constraint body.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintAnalysis {
    pub violation: Vec<ENode>,
    pub support: Vec<ENode>,
    pub choice_support: Vec<(ChoiceId, ENode)>,
}

pub fn analyze_constraint(g: &GroundProgram, interp: &Interp, body: &[Prim]) -> ConstraintAnalysis {
    let mut out = ConstraintAnalysis::default();
    for &p in body {
        let holds = interp.prim(p);
        match p.atom {
            BodyAtom::Atom(_) if holds => out.violation.push(prim_node(g, p)),
            BodyAtom::Atom(_) => out.support.push(prim_node(
                g,
                Prim {
                    atom: p.atom,
                    negated: !p.negated,
                },
            )),
            BodyAtom::Choice(c) => {
                let side = if p.negated {
                    Side::NegBody
                } else {
                    Side::PosBody
                };
                if let Some(node) = classify_choice_support(g, interp, c, side) {
                    out.choice_support.push((c, node));
                }
            }
        }
    }
    out
}

/// E_c for the answer set `answer`.
pub fn constraint_preprocessing(
    g: &GroundProgram,
    answer: &BTreeSet<AtomId>,
) -> Result<SupportTable, ConstraintError> {
    let interp = g.interpret(answer);
    let mut ec = SupportTable::new();
    for fr in g.flat.iter().filter(|fr| fr.head == Head::None) {
        let analysis = analyze_constraint(g, &interp, &fr.body);
        let mut support: Vec<ENode> = analysis.support.clone();
        support.extend(analysis.choice_support.iter().map(|(_, n)| n.clone()));
        if support.is_empty() {
            return Err(ConstraintError::UnviolableConstraint {
                rendered: g.render_rule(&g.rules[fr.rule]),
            });
        }
        for (c, node) in &analysis.choice_support {
            for (key, sets) in choice_body_support(g, &interp, *c, node.clone()) {
                ec.set(key, sets);
            }
        }
        for v in analysis.violation {
            let ENode::Lit(lit) = &v else { unreachable!() };
            let trigger = ENode::Triggered(lit.clone());
            ec.push_unique(v.clone(), BTreeSet::from([trigger.clone()]));
            let prior: Vec<SupportSet> = ec
                .get(&trigger)
                .map(<[SupportSet]>::to_vec)
                .unwrap_or_else(|| vec![BTreeSet::new()]);
            let mut next: Vec<SupportSet> = Vec::new();
            for c in &prior {
                for s in &support {
                    let mut set = c.clone();
                    set.insert(s.clone());
                    if !next.contains(&set) {
                        next.push(set);
                    }
                }
            }
            ec.set(trigger, next);
        }
    }
    Ok(ec)
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

    fn lit(s: &str) -> ENode {
        ENode::Lit(Lit::parse(s).unwrap())
    }

    fn trig(s: &str) -> ENode {
        ENode::Triggered(Lit::parse(s).unwrap())
    }

    #[test]
    fn sample_table() {
        let g = program(include_str!("../tests/data/sample.aspif"));
        let a = g.atoms_from_names(["n(1)", "n(2)", "c", "m(1)"]).unwrap();
        let ec = constraint_preprocessing(&g, &a).unwrap();
        let dump = ec.dump(Glyphs::Ascii);
        let expect = "\
m(1) : [{triggered_constraint(m(1))}]
c : [{triggered_constraint(c)}]
(m(1), n(1)) : [{*True}]
1<={(m(1), n(1)), (m(2), n(2))}<=1 : [{(m(1), n(1))}]
triggered_constraint(m(1)) : [{~b}]
triggered_constraint(c) : [{1<={(m(1), n(1)), (m(2), n(2))}<=1}]
";
        let got: BTreeSet<&str> = dump.lines().collect();
        let want: BTreeSet<&str> = expect.lines().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn no_constraints_no_entries() {
        let g = program("asp 1 0 0\n5 1 2\n4 1 p 1 1\n0\n");
        assert!(constraint_preprocessing(&g, &BTreeSet::from([1]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn two_atom_constraint() {
        // :- p, q.  with A = {p}
        let g = program(
            "asp 1 0 0\n1 0 0 0 2 1 2\n1 1 1 1 0 0\n1 1 1 2 0 0\n4 1 p 1 1\n4 1 q 1 2\n0\n",
        );
        let ec = constraint_preprocessing(&g, &BTreeSet::from([1])).unwrap();
        assert_eq!(ec.get(&lit("p")).unwrap(), &[BTreeSet::from([trig("p")])]);
        assert_eq!(ec.get(&trig("p")).unwrap(), &[BTreeSet::from([lit("~q")])]);
        assert_eq!(ec.len(), 2);
    }

    #[test]
    fn shared_literal_is_conjunctive() {
        // :- p, q.  :- p, r.  with A = {p}
        let g = program(
            "asp 1 0 0\n1 0 0 0 2 1 2\n1 0 0 0 2 1 3\n1 1 3 1 2 3 0 0\n4 1 p 1 1\n4 1 q 1 2\n4 1 r 1 3\n0\n",
        );
        let ec = constraint_preprocessing(&g, &BTreeSet::from([1])).unwrap();
        assert_eq!(ec.get(&lit("p")).unwrap().len(), 1);
        assert_eq!(
            ec.get(&trig("p")).unwrap(),
            &[BTreeSet::from([lit("~q"), lit("~r")])]
        );
    }

    #[test]
    fn violated_constraint_rejected() {
        let g = program("asp 1 0 0\n1 0 0 0 1 1\n5 1 2\n4 1 p 1 1\n0\n");
        assert!(matches!(
            constraint_preprocessing(&g, &BTreeSet::from([1])),
            Err(ConstraintError::UnviolableConstraint { .. })
        ));
    }

    #[test]
    fn choice_sides() {
        // l(3) :- 2{p; q}.  l(4) :- 3{p; q}.  l(5) :- l(3), not l(4).  :- go, l(5).
        let text = "asp 1 0 0\n1 1 2 1 2 0 0\n5 6 2\n\
1 0 1 3 1 2 2 1 1 2 1\n1 0 1 4 1 3 2 1 1 2 1\n1 0 1 5 0 2 3 -4\n\
1 0 0 0 2 6 5\n4 1 p 1 1\n4 1 q 1 2\n4 2 go 1 6\n0\n";
        let g = program(text);
        let folded = g.choices.iter().position(|c| c.upper == Some(2)).unwrap();
        assert_eq!(g.choices[folded].lower, 2);
        let a = BTreeSet::from([1, 6]);
        let interp = g.interpret(&a);
        let node = classify_choice_support(&g, &interp, folded, Side::PosBody).unwrap();
        assert_eq!(node.label(Glyphs::Ascii), "~(2<={(p), (q)}<=2)");
        assert_eq!(
            classify_choice_support(&g, &interp, folded, Side::NegBody),
            None
        );

        let lower_only = g
            .choices
            .iter()
            .position(|c| c.upper.is_none() && c.lower == 2)
            .unwrap();
        let empty = BTreeSet::from([6]);
        let interp = g.interpret(&empty);
        let node = classify_choice_support(&g, &interp, lower_only, Side::PosBody).unwrap();
        assert_eq!(node.label(Glyphs::Ascii), "~(2<={(p), (q)})");
        let exp = choice_body_support(&g, &interp, lower_only, node);
        assert_eq!(exp[0].1, vec![BTreeSet::from([ENode::StarEmpty])]);

        let ec = constraint_preprocessing(&g, &a).unwrap();
        assert_eq!(
            ec.get(&trig("go")).unwrap()[0]
                .iter()
                .next()
                .unwrap()
                .label(Glyphs::Ascii),
            "~(2<={(p), (q)}<=2)"
        );
    }
}
