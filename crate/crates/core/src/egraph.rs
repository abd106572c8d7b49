//! Explanation graphs.
//!
//! A graph for a literal picks, for every non-terminal node it reaches, one
//! supported set from the merged table, and links the node to each member
//! of that set. Atoms in the assumed set `U` are instead linked to
//! `assume`.
//!
//! Validity asks that no cycle, once constraint annotations (diamond edges)
//! are set aside, runs through a plus edge. Cycles through negative
//! literals only are fine: they describe unfounded sets.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::node::{ENode, NodeKind, SupportSet, SupportTable};

/// Default number of graphs returned by [`build_egraph`].
pub const DEFAULT_MAX_GRAPHS: usize = 64;

/// Budget of backtracking steps spent looking for alternative graphs.
const ENUMERATION_BUDGET: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeLabel {
    Plus,
    Minus,
    Circ,
    Bullet,
    Diamond,
    Oplus,
    Oslash,
}

impl EdgeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeLabel::Plus => "plus",
            EdgeLabel::Minus => "minus",
            EdgeLabel::Circ => "circ",
            EdgeLabel::Bullet => "bullet",
            EdgeLabel::Diamond => "diamond",
            EdgeLabel::Oplus => "oplus",
            EdgeLabel::Oslash => "oslash",
        }
    }

    pub fn from_name(s: &str) -> Option<EdgeLabel> {
        [
            EdgeLabel::Plus,
            EdgeLabel::Minus,
            EdgeLabel::Circ,
            EdgeLabel::Bullet,
            EdgeLabel::Diamond,
            EdgeLabel::Oplus,
            EdgeLabel::Oslash,
        ]
        .into_iter()
        .find(|l| l.as_str() == s)
    }

    pub fn glyph(self) -> &'static str {
        match self {
            EdgeLabel::Plus => "+",
            EdgeLabel::Minus => "-",
            EdgeLabel::Circ => "∘",
            EdgeLabel::Bullet => "•",
            EdgeLabel::Diamond => "◇",
            EdgeLabel::Oplus => "⊕",
            EdgeLabel::Oslash => "⊘",
        }
    }

    /// The label of every edge is fixed by the kind of node it points to.
    pub fn for_target(target: &ENode) -> EdgeLabel {
        match target.kind() {
            NodeKind::Atom | NodeKind::Tuple | NodeKind::ChoicePos => EdgeLabel::Plus,
            NodeKind::NegAtom | NodeKind::ChoiceNeg => EdgeLabel::Minus,
            NodeKind::Top | NodeKind::Bottom | NodeKind::Assume => EdgeLabel::Circ,
            NodeKind::PlusChoice | NodeKind::MinusChoice => EdgeLabel::Bullet,
            NodeKind::TriggeredConstraint => EdgeLabel::Diamond,
            NodeKind::StarTrue => EdgeLabel::Oplus,
            NodeKind::StarEmpty => EdgeLabel::Oslash,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EEdge {
    pub from: ENode,
    pub to: ENode,
    pub label: EdgeLabel,
}

impl EEdge {
    pub fn new(from: ENode, to: ENode) -> Self {
        let label = EdgeLabel::for_target(&to);
        EEdge { from, to, label }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplanationGraph {
    pub root: ENode,
    pub nodes: BTreeSet<ENode>,
    pub edges: BTreeSet<EEdge>,
}

impl ExplanationGraph {
    pub fn successors<'a>(&'a self, node: &'a ENode) -> impl Iterator<Item = &'a ENode> + 'a {
        self.edges
            .iter()
            .filter(move |e| &e.from == node)
            .map(|e| &e.to)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EGraphError {
    #[error("literal {0} is not explained by the table")]
    UnknownLiteral(String),
    #[error("no valid explanation graph exists for {0}")]
    NoValidGraph(String),
}

/// E = E_r ⊎ E_c: for keys in both tables, every pairwise union.
pub fn merge_supports(er: &SupportTable, ec: &SupportTable) -> SupportTable {
    let empty = vec![SupportSet::new()];
    let keys: BTreeSet<&ENode> = er.keys().chain(ec.keys()).collect();
    let mut merged = SupportTable::new();
    for key in keys {
        let left = er.get(key).unwrap_or(&empty);
        let right = ec.get(key).unwrap_or(&empty);
        let mut sets: Vec<SupportSet> = Vec::new();
        for r in left {
            for c in right {
                let union: SupportSet = r.union(c).cloned().collect();
                if !sets.contains(&union) {
                    sets.push(union);
                }
            }
        }
        merged.set(key.clone(), sets);
    }
    merged
}

fn is_assumed(node: &ENode, u: &BTreeSet<String>) -> bool {
    matches!(node, ENode::Lit(l) if l.negated && u.contains(&l.name))
}

fn assumed_support() -> SupportSet {
    SupportSet::from([ENode::Assume])
}

/// Supports usable for `node` once `u` is assumed.
fn supports_of(e: &SupportTable, u: &BTreeSet<String>, node: &ENode) -> Vec<SupportSet> {
    if is_assumed(node, u) {
        vec![assumed_support()]
    } else {
        e.get(node).map(<[SupportSet]>::to_vec).unwrap_or_default()
    }
}

/// Nodes that occur in some valid graph, each with the support used by the
/// canonical graph.
#[derive(Clone, Debug, Default)]
pub struct Justification {
    pub chosen: BTreeMap<ENode, SupportSet>,
}

impl Justification {
    pub fn is_justified(&self, node: &ENode) -> bool {
        node.is_terminal() || self.chosen.contains_key(node)
    }
}

fn may_cycle(node: &ENode) -> bool {
    matches!(node.kind(), NodeKind::NegAtom | NodeKind::ChoiceNeg)
}

/// Compute the justified nodes of `e` under the assumed atoms `u`.
///
/// Positive nodes must be well-founded; negative nodes may support each
/// other in cycles; `triggered_constraint` nodes are kept as long as one of
/// their supports stays justified.
pub fn justify(e: &SupportTable, u: &BTreeSet<String>) -> Justification {
    let mut triggers: BTreeSet<ENode> = e
        .keys()
        .filter(|k| k.kind() == NodeKind::TriggeredConstraint)
        .cloned()
        .collect();
    let mut keys: Vec<ENode> = e.keys().cloned().collect();
    for name in u {
        let node = ENode::neg_atom(name.clone());
        if !e.contains(&node) {
            keys.push(node);
        }
    }
    loop {
        let mut good = Justification::default();
        for t in &triggers {
            // provisional; replaced below once a real support is known
            good.chosen.insert(t.clone(), SupportSet::new());
        }
        let ok = |good: &Justification, s: &SupportSet| s.iter().all(|n| good.is_justified(n));
        loop {
            let mut changed = true;
            while changed {
                changed = false;
                for k in &keys {
                    if good.chosen.contains_key(k) {
                        continue;
                    }
                    if let Some(s) = supports_of(e, u, k).into_iter().find(|s| ok(&good, s)) {
                        good.chosen.insert(k.clone(), s);
                        changed = true;
                    }
                }
            }
            let mut cand: BTreeSet<&ENode> = keys
                .iter()
                .filter(|k| may_cycle(k) && !good.chosen.contains_key(*k))
                .collect();
            loop {
                let before = cand.len();
                let drop: Vec<&ENode> = cand
                    .iter()
                    .filter(|k| {
                        !supports_of(e, u, k)
                            .iter()
                            .any(|s| s.iter().all(|n| good.is_justified(n) || cand.contains(n)))
                    })
                    .copied()
                    .collect();
                for d in drop {
                    cand.remove(d);
                }
                if cand.len() == before {
                    break;
                }
            }
            if cand.is_empty() {
                break;
            }
            let picks: Vec<(ENode, SupportSet)> = cand
                .iter()
                .map(|k| {
                    let s = supports_of(e, u, k)
                        .into_iter()
                        .find(|s| s.iter().all(|n| good.is_justified(n) || cand.contains(n)))
                        .expect("candidate keeps a support");
                    ((*k).clone(), s)
                })
                .collect();
            good.chosen.extend(picks);
        }
        let mut kept = BTreeSet::new();
        for t in &triggers {
            if let Some(s) = supports_of(e, u, t).into_iter().find(|s| ok(&good, s)) {
                good.chosen.insert(t.clone(), s);
                kept.insert(t.clone());
            }
        }
        if kept == triggers {
            return good;
        }
        triggers = kept;
    }
}

fn graph_from(root: &ENode, pick: impl Fn(&ENode) -> Option<SupportSet>) -> ExplanationGraph {
    let mut nodes = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let mut queue = VecDeque::from([root.clone()]);
    while let Some(n) = queue.pop_front() {
        if !nodes.insert(n.clone()) || n.is_terminal() {
            continue;
        }
        for t in pick(&n).unwrap_or_default() {
            edges.insert(EEdge::new(n.clone(), t.clone()));
            queue.push_back(t);
        }
    }
    ExplanationGraph {
        root: root.clone(),
        nodes,
        edges,
    }
}

/// Explanation graphs for `root`: the canonical graph first, then further
/// distinct valid graphs in search order, at most `limit` in total.
pub fn build_egraph(
    e: &SupportTable,
    u: &BTreeSet<String>,
    root: &ENode,
    limit: usize,
) -> Result<Vec<ExplanationGraph>, EGraphError> {
    if !e.contains(root) && !is_assumed(root, u) {
        return Err(EGraphError::UnknownLiteral(root.to_string()));
    }
    let just = justify(e, u);
    if !just.is_justified(root) {
        return Err(EGraphError::NoValidGraph(root.to_string()));
    }
    let canonical = graph_from(root, |n| just.chosen.get(n).cloned());
    if !validate_egraph(&canonical, e, u) {
        return Err(EGraphError::NoValidGraph(root.to_string()));
    }
    let mut graphs = vec![canonical];
    if limit > 1 {
        let mut search = Enumerator {
            e,
            u,
            just: &just,
            root,
            limit,
            steps: 0,
            found: &mut graphs,
        };
        let mut assignment = BTreeMap::new();
        search.extend(&mut assignment);
    }
    graphs.truncate(limit.max(1));
    Ok(graphs)
}

struct Enumerator<'a> {
    e: &'a SupportTable,
    u: &'a BTreeSet<String>,
    just: &'a Justification,
    root: &'a ENode,
    limit: usize,
    steps: usize,
    found: &'a mut Vec<ExplanationGraph>,
}

impl Enumerator<'_> {
    fn next_open(&self, assignment: &BTreeMap<ENode, SupportSet>) -> Option<ENode> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([self.root.clone()]);
        while let Some(n) = queue.pop_front() {
            if n.is_terminal() || !seen.insert(n.clone()) {
                continue;
            }
            match assignment.get(&n) {
                None => return Some(n),
                Some(s) => queue.extend(s.iter().cloned()),
            }
        }
        None
    }

    fn extend(&mut self, assignment: &mut BTreeMap<ENode, SupportSet>) {
        if self.found.len() >= self.limit || self.steps >= ENUMERATION_BUDGET {
            return;
        }
        self.steps += 1;
        let Some(node) = self.next_open(assignment) else {
            let g = graph_from(self.root, |n| assignment.get(n).cloned());
            if !self.found.contains(&g) && validate_egraph(&g, self.e, self.u) {
                self.found.push(g);
            }
            return;
        };
        for s in supports_of(self.e, self.u, &node) {
            if !s.iter().all(|n| self.just.is_justified(n)) {
                continue;
            }
            assignment.insert(node.clone(), s);
            self.extend(assignment);
            assignment.remove(&node);
            if self.found.len() >= self.limit || self.steps >= ENUMERATION_BUDGET {
                return;
            }
        }
    }
}

/// Whether `g` is an explanation graph under `e` and the assumed atoms `u`.
pub fn validate_egraph(g: &ExplanationGraph, e: &SupportTable, u: &BTreeSet<String>) -> bool {
    if !g.nodes.contains(&g.root) {
        return false;
    }
    let mut out: BTreeMap<&ENode, SupportSet> = BTreeMap::new();
    for edge in &g.edges {
        if !g.nodes.contains(&edge.from) || !g.nodes.contains(&edge.to) {
            return false;
        }
        if edge.label != EdgeLabel::for_target(&edge.to) {
            return false;
        }
        out.entry(&edge.from).or_default().insert(edge.to.clone());
    }
    for node in &g.nodes {
        if let ENode::Lit(l) = node {
            if !l.negated && u.contains(&l.name) {
                return false;
            }
        }
        let succ = out.remove(node).unwrap_or_default();
        if node.is_terminal() {
            if !succ.is_empty() {
                return false;
            }
            continue;
        }
        if is_assumed(node, u) {
            if succ != assumed_support() {
                return false;
            }
            continue;
        }
        if !e.get(node).is_some_and(|sets| sets.contains(&succ)) {
            return false;
        }
    }
    // every node hangs off the root
    let mut seen = BTreeSet::from([&g.root]);
    let mut stack = vec![&g.root];
    while let Some(n) = stack.pop() {
        for t in g.successors(n) {
            if seen.insert(t) {
                stack.push(t);
            }
        }
    }
    if seen.len() != g.nodes.len() {
        return false;
    }
    cycles_are_negative(g)
}

/// No strongly connected component of the graph without diamond edges
/// contains a plus edge.
pub fn cycles_are_negative(g: &ExplanationGraph) -> bool {
    let mut pg: DiGraph<(), ()> = DiGraph::new();
    let index: HashMap<&ENode, _> = g.nodes.iter().map(|n| (n, pg.add_node(()))).collect();
    for edge in g.edges.iter().filter(|e| e.label != EdgeLabel::Diamond) {
        pg.add_edge(index[&edge.from], index[&edge.to], ());
    }
    let mut component = HashMap::new();
    for (i, scc) in tarjan_scc(&pg).into_iter().enumerate() {
        for n in scc {
            component.insert(n, i);
        }
    }
    g.edges
        .iter()
        .filter(|e| e.label == EdgeLabel::Plus)
        .all(|e| component[&index[&e.from]] != component[&index[&e.to]])
}
