//! Query lattice over the subgraphs of a maximal query graph.
//!
//! A lattice node is an [`EdgeSet`] over MQG edge indexes. It is a valid query
//! graph when it is non-empty, weakly connected and touches every query
//! node; subsumption is a subset test on the bits.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::graph_util::DisjointSets;
use crate::mqg::MaximalQueryGraph;

/// Bit-set over the edges of one MQG (at most 64).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EdgeSet(pub u64);

impl EdgeSet {
    pub const EMPTY: EdgeSet = EdgeSet(0);

    /// Edges `0..n`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            EdgeSet(u64::MAX)
        } else {
            EdgeSet((1u64 << n) - 1)
        }
    }

    pub fn single(i: usize) -> Self {
        EdgeSet(1 << i)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        EdgeSet(indices.into_iter().fold(0, |acc, i| acc | 1 << i))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        EdgeSet(self.0 | 1 << i)
    }

    pub fn without(self, i: usize) -> Self {
        EdgeSet(self.0 & !(1 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: EdgeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_strict_subset(self, other: EdgeSet) -> bool {
        self != other && self.is_subset(other)
    }

    pub fn union(self, other: EdgeSet) -> Self {
        EdgeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: EdgeSet) -> Self {
        EdgeSet(self.0 & other.0)
    }

    pub fn difference(self, other: EdgeSet) -> Self {
        EdgeSet(self.0 & !other.0)
    }

    /// Member indexes, ascending.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }
}

impl fmt::Display for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

/// Whether `q` is a valid query graph of `mqg`.
pub fn is_valid(mqg: &MaximalQueryGraph, q: EdgeSet) -> bool {
    !q.is_empty() && q.is_subset(mqg.all_edges()) && query_component(mqg, q) == Some(q)
}

/// The weakly connected component of `q` that holds the query nodes, if it
/// holds all of them and has at least one edge.
pub fn query_component(mqg: &MaximalQueryGraph, q: EdgeSet) -> Option<EdgeSet> {
    let edges = mqg.edges();
    let mut sets = DisjointSets::new(mqg.node_count());
    for i in q.iter() {
        sets.union(edges[i].src, edges[i].dst);
    }
    let query = mqg.query_nodes();
    let root = sets.find(query[0]);
    if query.iter().any(|&v| sets.find(v) != root) {
        return None;
    }
    let component = EdgeSet::from_indices(q.iter().filter(|&i| sets.find(edges[i].src) == root));
    (!component.is_empty()).then_some(component)
}

/// Valid query graphs with exactly one edge less than `q`.
pub fn children(mqg: &MaximalQueryGraph, q: EdgeSet) -> Vec<EdgeSet> {
    q.iter().map(|i| q.without(i)).filter(|&c| is_valid(mqg, c)).collect()
}

/// Valid query graphs with exactly one edge more than `q`: the added edge
/// must touch a node of `q`.
pub fn parents(mqg: &MaximalQueryGraph, q: EdgeSet) -> Vec<EdgeSet> {
    let nodes = mqg.node_mask(q);
    mqg.all_edges()
        .difference(q)
        .iter()
        .filter(|&i| {
            let e = &mqg.edges()[i];
            nodes >> e.src & 1 == 1 || nodes >> e.dst & 1 == 1
        })
        .map(|i| q.with(i))
        .collect()
}

/// Lattice leaves: query graphs none of whose subgraphs is a query graph.
///
/// With several query nodes these are the spanning trees of the core edges,
/// trimmed of non-query leaves and deduplicated. With one query node every
/// single incident edge is a leaf.
pub fn minimal_query_trees(mqg: &MaximalQueryGraph) -> Vec<EdgeSet> {
    if mqg.arity() == 1 {
        return mqg.incident(mqg.query_nodes()[0]).iter().map(EdgeSet::single).collect();
    }
    let core = mqg.core_edges();
    if core.is_empty() {
        return Vec::new();
    }
    let mut found = BTreeSet::new();
    for tree in spanning_trees(mqg, core) {
        found.insert(trim_leaves(mqg, tree));
    }
    found.into_iter().collect()
}

/// Repeatedly removes edges hanging off a non-query node of degree one.
pub fn trim_leaves(mqg: &MaximalQueryGraph, mut q: EdgeSet) -> EdgeSet {
    let query = mqg.query_mask();
    loop {
        let leaf_edge = q.iter().find(|&i| {
            let e = &mqg.edges()[i];
            [e.src, e.dst]
                .iter()
                .any(|&v| query >> v & 1 == 0 && mqg.incident(v).intersection(q).len() == 1)
        });
        match leaf_edge {
            Some(i) => q = q.without(i),
            None => return q,
        }
    }
}

/// All spanning trees of the subgraph formed by `edges` (which must be
/// connected), by include/exclude branching.
fn spanning_trees(mqg: &MaximalQueryGraph, edges: EdgeSet) -> Vec<EdgeSet> {
    let list: Vec<usize> = edges.iter().collect();
    let node_mask = mqg.node_mask(edges);
    let target = node_mask.count_ones() as usize - 1;
    let mut out = Vec::new();
    branch(mqg, &list, 0, EdgeSet::EMPTY, edges, node_mask, target, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn branch(
    mqg: &MaximalQueryGraph,
    list: &[usize],
    pos: usize,
    chosen: EdgeSet,
    available: EdgeSet,
    node_mask: u128,
    target: usize,
    out: &mut Vec<EdgeSet>,
) {
    if chosen.len() == target {
        out.push(chosen);
        return;
    }
    if pos == list.len() {
        return;
    }
    let i = list[pos];
    let e = &mqg.edges()[i];

    // Take the edge unless it closes a cycle.
    let mut sets = DisjointSets::new(mqg.node_count());
    for j in chosen.iter() {
        sets.union(mqg.edges()[j].src, mqg.edges()[j].dst);
    }
    if sets.find(e.src) != sets.find(e.dst) {
        branch(mqg, list, pos + 1, chosen.with(i), available, node_mask, target, out);
    }

    // Skip it unless that disconnects what is left.
    let rest = available.without(i);
    if spans(mqg, rest, node_mask) {
        branch(mqg, list, pos + 1, chosen, rest, node_mask, target, out);
    }
}

fn spans(mqg: &MaximalQueryGraph, edges: EdgeSet, node_mask: u128) -> bool {
    let mut sets = DisjointSets::new(mqg.node_count());
    let mut components = node_mask.count_ones() as usize;
    for j in edges.iter() {
        if sets.union(mqg.edges()[j].src, mqg.edges()[j].dst) {
            components -= 1;
        }
    }
    components == 1
}

/// One line of the optional exploration trace.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Eval(EdgeSet, f64),
    Prune(EdgeSet, f64),
    UfAdd(EdgeSet, f64),
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Eval(q, s) => write!(f, "EVAL {q} {s}"),
            TraceEvent::Prune(q, s) => write!(f, "PRUNE {q} {s}"),
            TraceEvent::UfAdd(q, s) => write!(f, "UFADD {q} {s}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Frontier {
    boundary: BTreeSet<EdgeSet>,
    upper: f64,
}

/// Exploration bookkeeping: evaluated nodes, null nodes, and the lower and
/// upper frontiers with each lower-frontier node's upper boundary.
#[derive(Debug, Clone)]
pub struct LatticeState<'m> {
    mqg: &'m MaximalQueryGraph,
    evaluated: HashSet<EdgeSet>,
    nulls: Vec<EdgeSet>,
    lower: BTreeMap<EdgeSet, Frontier>,
    upper: BTreeSet<EdgeSet>,
    pruned_candidates: usize,
    trace: Option<Vec<TraceEvent>>,
}

impl<'m> LatticeState<'m> {
    /// Lower frontier seeded with the minimal query trees, upper frontier
    /// with the MQG itself.
    pub fn new(mqg: &'m MaximalQueryGraph, trace: bool) -> Self {
        let root = mqg.all_edges();
        let mut state = Self {
            mqg,
            evaluated: HashSet::new(),
            nulls: Vec::new(),
            lower: BTreeMap::new(),
            upper: BTreeSet::from([root]),
            pruned_candidates: 0,
            trace: trace.then(Vec::new),
        };
        let upper = state.score(root);
        for tree in minimal_query_trees(mqg) {
            state.lower.insert(
                tree,
                Frontier {
                    boundary: BTreeSet::from([root]),
                    upper,
                },
            );
        }
        state
    }

    pub fn mqg(&self) -> &'m MaximalQueryGraph {
        self.mqg
    }

    /// Structure score: total scoring weight of the edges.
    pub fn score(&self, q: EdgeSet) -> f64 {
        self.mqg.total_weight(q)
    }

    pub fn is_evaluated(&self, q: EdgeSet) -> bool {
        self.evaluated.contains(&q)
    }

    /// Superset of some null node.
    pub fn is_pruned(&self, q: EdgeSet) -> bool {
        self.nulls.iter().any(|n| n.is_subset(q))
    }

    pub fn nulls(&self) -> &[EdgeSet] {
        &self.nulls
    }

    pub fn lower_frontier(&self) -> Vec<EdgeSet> {
        self.lower.keys().copied().collect()
    }

    pub fn upper_frontier(&self) -> Vec<EdgeSet> {
        self.upper.iter().copied().collect()
    }

    pub fn upper_boundary(&self, q: EdgeSet) -> Option<Vec<EdgeSet>> {
        self.lower.get(&q).map(|f| f.boundary.iter().copied().collect())
    }

    /// U(Q) of a lower-frontier node.
    pub fn upper_bound(&self, q: EdgeSet) -> Option<f64> {
        self.lower.get(&q).map(|f| f.upper)
    }

    /// Largest U over the lower frontier, or `None` when it is empty.
    pub fn max_upper_bound(&self) -> Option<f64> {
        self.lower.values().map(|f| f.upper).max_by(f64::total_cmp)
    }

    /// Candidates dropped because they were supersets of a null node.
    pub fn pruned_candidates(&self) -> usize {
        self.pruned_candidates
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Lower-frontier node with the largest U; ties go to fewer edges, then
    /// the lowest bits.
    pub fn best(&self) -> Option<EdgeSet> {
        self.lower
            .iter()
            .max_by(|(qa, fa), (qb, fb)| {
                fa.upper
                    .total_cmp(&fb.upper)
                    .then(qb.len().cmp(&qa.len()))
                    .then(qb.0.cmp(&qa.0))
            })
            .map(|(&q, _)| q)
    }

    fn emit(&mut self, event: impl FnOnce(&Self) -> TraceEvent) {
        if let Some(mut trace) = self.trace.take() {
            trace.push(event(self));
            self.trace = Some(trace);
        }
    }

    /// Records the evaluation of `q`. A non-null node lets its unpruned
    /// parents into the lower frontier; a null node prunes its ancestors
    /// and triggers the upper-boundary recomputation.
    pub fn record(&mut self, q: EdgeSet, null: bool) {
        self.lower.remove(&q);
        self.evaluated.insert(q);
        self.emit(|s| TraceEvent::Eval(q, s.score(q)));
        if null {
            self.prune(q);
            return;
        }
        for p in parents(self.mqg, q) {
            if self.evaluated.contains(&p) || self.lower.contains_key(&p) {
                continue;
            }
            if self.is_pruned(p) {
                self.pruned_candidates += 1;
                continue;
            }
            let boundary = self.maximal_unpruned_supersets(p);
            let upper = self.max_score(&boundary);
            self.lower.insert(p, Frontier { boundary, upper });
        }
    }

    fn max_score(&self, boundary: &BTreeSet<EdgeSet>) -> f64 {
        boundary.iter().map(|&u| self.score(u)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Prunes a null node and recomputes the upper boundaries of the lower
    /// frontier nodes whose boundary it touched.
    fn prune(&mut self, null: EdgeSet) {
        self.nulls.push(null);
        self.emit(|s| TraceEvent::Prune(null, s.score(null)));

        let pruned_upper: BTreeSet<EdgeSet> = self.upper.iter().copied().filter(|u| null.is_subset(*u)).collect();
        for u in &pruned_upper {
            self.upper.remove(u);
        }

        let before = self.lower.len();
        self.lower.retain(|q, _| !null.is_subset(*q));
        self.pruned_candidates += before - self.lower.len();

        let dirty: Vec<EdgeSet> = self
            .lower
            .iter()
            .filter(|(_, f)| !f.boundary.is_disjoint(&pruned_upper))
            .map(|(&q, _)| q)
            .collect();

        // New boundary candidates, kept free of mutual subsumption.
        let mut batch: BTreeSet<EdgeSet> = BTreeSet::new();
        for &q in &dirty {
            let stale: Vec<EdgeSet> = self.lower[&q].boundary.intersection(&pruned_upper).copied().collect();
            for qp in stale {
                for e in null.difference(q).iter() {
                    let Some(sub) = query_component(self.mqg, qp.without(e)) else {
                        continue;
                    };
                    if self.upper.iter().any(|u| sub.is_subset(*u)) || batch.iter().any(|b| sub.is_subset(*b)) {
                        continue;
                    }
                    batch.retain(|b| !b.is_strict_subset(sub));
                    batch.insert(sub);
                }
            }
        }
        for &b in &batch {
            self.upper.insert(b);
            self.emit(|s| TraceEvent::UfAdd(b, s.score(b)));
        }

        for q in dirty {
            let mut boundary: BTreeSet<EdgeSet> = self.upper.iter().copied().filter(|u| q.is_subset(*u)).collect();
            if boundary.is_empty() {
                boundary = self.maximal_unpruned_supersets(q);
            }
            let upper = self.max_score(&boundary);
            self.lower.insert(q, Frontier { boundary, upper });
        }
    }

    /// Maximal valid, unpruned supersets of `q`; each is added to the upper
    /// frontier if missing.
    ///
    /// Starting from the MQG, a pruned candidate contains some null node; any
    /// unpruned superset of `q` inside it misses an edge of that null node
    /// that `q` lacks too, so branching on those edges covers them all.
    fn maximal_unpruned_supersets(&mut self, q: EdgeSet) -> BTreeSet<EdgeSet> {
        let mut found: BTreeSet<EdgeSet> = BTreeSet::new();
        let mut seen = HashSet::new();
        let mut stack = vec![self.mqg.all_edges()];
        while let Some(x) = stack.pop() {
            if !seen.insert(x) {
                continue;
            }
            match self.nulls.iter().find(|n| n.is_subset(x)) {
                None => {
                    if !found.iter().any(|f| x.is_subset(*f)) {
                        found.retain(|f| !f.is_strict_subset(x));
                        found.insert(x);
                    }
                }
                Some(&n) => {
                    for e in n.difference(q).iter() {
                        if let Some(sub) = query_component(self.mqg, x.without(e)) {
                            if q.is_subset(sub) {
                                stack.push(sub);
                            }
                        }
                    }
                }
            }
        }
        for &f in &found {
            if self.upper.insert(f) {
                self.emit(|s| TraceEvent::UfAdd(f, s.score(f)));
            }
        }
        found
    }
}
