use std::collections::BTreeSet;

use proptest::prelude::*;

use expasp::aspif::{
    emit_aspif, parse_aspif, AspifProgram, BodySpec, ExternalStatement, HeadType, Header, Literal,
    OutputStatement, RuleStatement, Statement, WeightedLiteral,
};
use expasp::egraph::{build_egraph, cycles_are_negative, validate_egraph};
use expasp::node::{ENode, Glyphs};
use expasp::oracle::{check_answer_set, enumerate_answer_sets, random_program, DEFAULT_ATOM_CAP};
use expasp::pipeline::analyze;
use expasp::program::reconstruct_rules;
use expasp::render::{from_json, to_dot, to_json};

fn literal() -> impl Strategy<Value = Literal> {
    (1u64..50, any::<bool>()).prop_map(|(a, pos)| {
        if pos {
            Literal::positive(a)
        } else {
            Literal::negative(a)
        }
    })
}

fn statement() -> impl Strategy<Value = Statement> {
    let body = prop_oneof![
        prop::collection::vec(literal(), 0..5).prop_map(BodySpec::Normal),
        (1u64..6, prop::collection::vec((literal(), 1u64..4), 0..5)).prop_map(
            |(lower_bound, ls)| {
                BodySpec::Weight {
                    lower_bound,
                    literals: ls
                        .into_iter()
                        .map(|(literal, weight)| WeightedLiteral { literal, weight })
                        .collect(),
                }
            }
        ),
    ];
    let head_type = prop_oneof![Just(HeadType::Disjunction), Just(HeadType::Choice)];
    prop_oneof![
        (head_type, prop::collection::vec(1u64..50, 0..3), body).prop_map(
            |(head_type, head_atoms, body)| {
                Statement::Rule(RuleStatement {
                    head_type,
                    head_atoms,
                    body,
                })
            }
        ),
        (
            "[a-z][a-z0-9(), \"]{0,10}",
            prop::collection::vec(literal(), 0..2)
        )
            .prop_map(|(symbol, condition)| Statement::Output(OutputStatement {
                symbol,
                condition
            })),
        (1u64..50, 0u64..4)
            .prop_map(|(atom, value)| Statement::External(ExternalStatement { atom, value })),
    ]
}

fn sizes() -> impl Strategy<Value = (u64, usize, usize, f64)> {
    (any::<u64>(), 1usize..=8, 1usize..=10, 0.0f64..0.6)
}

proptest! {
    #[test]
    fn aspif_text_round_trips(statements in prop::collection::vec(statement(), 0..12)) {
        let program = AspifProgram { header: Header::default(), statements };
        let text = emit_aspif(&program);
        prop_assert_eq!(parse_aspif(&text).unwrap(), program);
    }

    #[test]
    fn random_programs_are_reproducible((seed, atoms, rules, p) in sizes()) {
        let a = random_program(seed, atoms, rules, p);
        prop_assert_eq!(&a, &random_program(seed, atoms, rules, p));
        prop_assert_eq!(parse_aspif(&emit_aspif(&a.aspif)).unwrap(), a.aspif.clone());
        prop_assert!(reconstruct_rules(&a.aspif).is_ok());
    }

    #[test]
    fn oracle_check_agrees_with_enumeration(
        (seed, atoms, rules, p) in sizes(),
        mask in any::<u32>(),
    ) {
        let rp = random_program(seed, atoms, rules, p);
        let g = reconstruct_rules(&rp.aspif).unwrap();
        let sets = enumerate_answer_sets(&rp.aspif, DEFAULT_ATOM_CAP).unwrap();
        for s in &sets {
            prop_assert!(check_answer_set(&rp.aspif, s).unwrap());
        }
        // without choice rules, no answer set strictly contains another
        let normal = rp.aspif.rules().all(|r| r.head_type == HeadType::Disjunction);
        for a in sets.iter().filter(|_| normal) {
            for b in &sets {
                prop_assert!(a == b || !a.is_subset(b));
            }
        }
        let names: Vec<String> = g.symbols.named().map(|a| a.name.clone()).collect();
        let guess: BTreeSet<String> = names
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> (i % 32) & 1 == 1)
            .map(|(_, n)| n.clone())
            .collect();
        prop_assert_eq!(check_answer_set(&rp.aspif, &guess).unwrap(), sets.contains(&guess));
    }

    #[test]
    fn analysis_invariants((seed, atoms, rules, p) in sizes()) {
        let rp = random_program(seed, atoms, rules, p);
        let g = reconstruct_rules(&rp.aspif).unwrap();
        for answer in enumerate_answer_sets(&rp.aspif, DEFAULT_ATOM_CAP).unwrap() {
            let a = g.atoms_from_names(answer.iter().map(String::as_str)).unwrap();
            let analysis = analyze(&g, &a).unwrap();

            // supports only mention literals that hold in the answer set
            for (key, sets) in analysis.er.iter() {
                for node in std::iter::once(key).chain(sets.iter().flatten()) {
                    if let ENode::Lit(l) = node {
                        prop_assert_eq!(answer.contains(&l.name), !l.negated, "{}", node);
                    }
                }
            }
            for k in analysis.er.keys().chain(analysis.ec.keys()) {
                prop_assert!(analysis.e.contains(k));
            }

            let r = &analysis.report;
            prop_assert!(r.ta.is_disjoint(&answer));
            prop_assert!(r.chosen_u.is_subset(&r.ta));
            prop_assert!(r.t_must.is_disjoint(&r.t_deferred));
            prop_assert_eq!(
                r.t_must.union(&r.t_deferred).cloned().collect::<BTreeSet<_>>(),
                r.ta.clone()
            );
            for x in &r.min_b_candidates {
                for y in &r.min_b_candidates {
                    prop_assert!(x == y || !x.is_subset(y));
                }
            }

            for key in analysis.e.keys().filter(|k| matches!(k, ENode::Lit(_))) {
                let graphs = build_egraph(&analysis.e, &r.chosen_u, key, 3).unwrap();
                for graph in graphs {
                    prop_assert!(validate_egraph(&graph, &analysis.e, &r.chosen_u));
                    prop_assert!(cycles_are_negative(&graph));
                    prop_assert_eq!(&graph.root, key);
                    prop_assert_eq!(from_json(&to_json(&graph, Glyphs::Ascii)).unwrap(), graph.clone());
                    prop_assert_eq!(to_dot(&graph, Glyphs::Unicode), to_dot(&graph.clone(), Glyphs::Unicode));
                }
            }
        }
    }
}
