//! Maximal query graph: weighting, greedy discovery, depths and merging.
//!
//! Discovery splits the reduced neighborhood into a core graph (every edge on
//! some simple path between two query entities, plus whatever hangs off a
//! non-query core vertex) and one subgraph per query entity (what hangs off
//! that entity alone). Each piece contributes the component around its query
//! entities found among its top-`s` edges by weight, for the `s` that gets
//! closest to `m = ceil(r / (n + 1))` edges.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph_util::{edges_between_terminals, DisjointSets};
use crate::lattice::EdgeSet;
use crate::neighborhood::Neighborhood;
use crate::store::{DataGraph, EdgeId, EntityId, LabelId, Tuple};

/// Upper bound on MQG edges; lattice nodes are `u64` bit-sets.
pub const MAX_EDGES: usize = 64;

/// A node of a maximal query graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QueryNode {
    /// Stands for position `j` of every input tuple of a merged query.
    Virtual(usize),
    Entity(EntityId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MqgEdge {
    pub src: usize,
    pub label: LabelId,
    pub dst: usize,
    /// Discovery weight: `ief / p` for one tuple, `c * w_max` after a merge.
    pub base_weight: f64,
    /// Scoring weight, `base_weight / max(depth, 1)^2`.
    pub weight: f64,
    pub depth: usize,
}

/// Printable form of one MQG edge, as served by the API and the dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeView {
    pub idx: usize,
    pub subj: String,
    pub label: String,
    pub obj: String,
    pub weight: f64,
    pub depth: usize,
}

#[derive(Debug, Clone)]
pub struct MaximalQueryGraph {
    nodes: Vec<QueryNode>,
    query_nodes: Vec<usize>,
    anchors: Vec<Vec<EntityId>>,
    edges: Vec<MqgEdge>,
    core: u64,
    incident: Vec<u64>,
}

impl MaximalQueryGraph {
    /// Assembles an MQG from explicit parts. Edge `i` becomes lattice bit `i`.
    ///
    /// `anchors[j]` lists the concrete entities query position `j` stands
    /// for. Depths, scoring weights and the core edge set are derived here.
    pub fn from_parts(
        nodes: Vec<QueryNode>,
        query_nodes: Vec<usize>,
        anchors: Vec<Vec<EntityId>>,
        edges: Vec<(usize, LabelId, usize, f64)>,
    ) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidParameter("a query graph needs at least one edge".into()));
        }
        if edges.len() > MAX_EDGES {
            return Err(Error::QueryGraphTooLarge(edges.len()));
        }
        if query_nodes.is_empty() || anchors.len() != query_nodes.len() {
            return Err(Error::InvalidParameter("one anchor list per query node is required".into()));
        }
        let node_count = nodes.len();
        let distinct: BTreeSet<_> = query_nodes.iter().collect();
        if distinct.len() != query_nodes.len() || query_nodes.iter().any(|&q| q >= node_count) {
            return Err(Error::InvalidParameter("query nodes must be distinct node indexes".into()));
        }
        let mut seen = BTreeSet::new();
        for &(s, l, o, w) in &edges {
            if s >= node_count || o >= node_count || s == o {
                return Err(Error::InvalidParameter(format!("bad endpoints ({s}, {o})")));
            }
            if !seen.insert((s, l, o)) {
                return Err(Error::InvalidParameter(format!("duplicate edge ({s}, #{}, {o})", l.0)));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidParameter(format!("edge weight {w} is not a finite non-negative number")));
            }
        }

        let mut incident = vec![0u64; node_count];
        for (i, &(s, _, o, _)) in edges.iter().enumerate() {
            incident[s] |= 1 << i;
            incident[o] |= 1 << i;
        }

        let dist = bfs_distances(node_count, edges.iter().map(|&(s, _, o, _)| (s, o)), &query_nodes);
        if dist.iter().any(|d| d.is_none()) {
            return Err(Error::InvalidParameter(
                "query graph must be weakly connected and contain every query node".into(),
            ));
        }

        let pairs: Vec<(usize, usize)> = edges.iter().map(|&(s, _, o, _)| (s, o)).collect();
        let on_path = edges_between_terminals(node_count, &pairs, &query_nodes);
        let core = on_path
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .fold(0u64, |acc, (i, _)| acc | 1 << i);

        let edges = edges
            .into_iter()
            .map(|(src, label, dst, base_weight)| {
                let depth = dist[src].unwrap().min(dist[dst].unwrap());
                let divisor = depth.max(1) as f64;
                MqgEdge {
                    src,
                    label,
                    dst,
                    base_weight,
                    weight: base_weight / (divisor * divisor),
                    depth,
                }
            })
            .collect();

        Ok(Self {
            nodes,
            query_nodes,
            anchors,
            edges,
            core,
            incident,
        })
    }

    pub fn nodes(&self) -> &[QueryNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[MqgEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Node index of each query position.
    pub fn query_nodes(&self) -> &[usize] {
        &self.query_nodes
    }

    pub fn arity(&self) -> usize {
        self.query_nodes.len()
    }

    pub fn is_query_node(&self, node: usize) -> bool {
        self.query_nodes.contains(&node)
    }

    /// Entities that query position `j` stands for.
    pub fn anchors(&self, j: usize) -> &[EntityId] {
        &self.anchors[j]
    }

    /// All edges, as a lattice bit-set.
    pub fn all_edges(&self) -> EdgeSet {
        EdgeSet::full(self.edges.len())
    }

    /// Edges lying on a simple path between two distinct query nodes.
    pub fn core_edges(&self) -> EdgeSet {
        EdgeSet(self.core)
    }

    /// Bit-set of edges incident on `node`.
    pub fn incident(&self, node: usize) -> EdgeSet {
        EdgeSet(self.incident[node])
    }

    /// |E(u)| counted in this graph.
    pub fn degree(&self, node: usize) -> usize {
        self.incident[node].count_ones() as usize
    }

    /// Bit-set over node indexes touched by `edges`.
    pub fn node_mask(&self, edges: EdgeSet) -> u128 {
        edges
            .iter()
            .fold(0u128, |acc, i| acc | 1u128 << self.edges[i].src | 1u128 << self.edges[i].dst)
    }

    pub fn query_mask(&self) -> u128 {
        self.query_nodes.iter().fold(0u128, |acc, &q| acc | 1u128 << q)
    }

    pub fn total_weight(&self, edges: EdgeSet) -> f64 {
        edges.iter().map(|i| self.edges[i].weight).sum()
    }

    pub fn node_name(&self, graph: &DataGraph, node: usize) -> String {
        match self.nodes[node] {
            QueryNode::Virtual(j) => format!("?w{}", j + 1),
            QueryNode::Entity(e) => graph.entity_name(e).to_string(),
        }
    }

    pub fn edge_views(&self, graph: &DataGraph) -> Vec<EdgeView> {
        self.edges
            .iter()
            .enumerate()
            .map(|(idx, e)| EdgeView {
                idx,
                subj: self.node_name(graph, e.src),
                label: graph.label_name(e.label).to_string(),
                obj: self.node_name(graph, e.dst),
                weight: e.weight,
                depth: e.depth,
            })
            .collect()
    }

    /// One `idx\tsubj\tlabel\tobj\tweight\tdepth` line per edge.
    pub fn dump<W: Write>(&self, graph: &DataGraph, mut out: W) -> Result<()> {
        for v in self.edge_views(graph) {
            writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", v.idx, v.subj, v.label, v.obj, v.weight, v.depth)?;
        }
        Ok(())
    }
}

fn bfs_distances(
    node_count: usize,
    pairs: impl Iterator<Item = (usize, usize)>,
    sources: &[usize],
) -> Vec<Option<usize>> {
    let mut adj = vec![Vec::new(); node_count];
    for (a, b) in pairs {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut dist = vec![None; node_count];
    let mut queue = VecDeque::new();
    for &s in sources {
        dist[s] = Some(0);
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &w in &adj[u] {
            if dist[w].is_none() {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Annotates every neighborhood edge with `ief / p`.
pub fn weigh(graph: &DataGraph, hood: &Neighborhood) -> Result<Vec<(EdgeId, f64)>> {
    hood.edges()
        .iter()
        .map(|&e| Ok((e, graph.edge_weight(&graph.edge(e))?)))
        .collect()
}

/// Per-subgraph edge target, `ceil(r / (n + 1))`, at least 1.
pub fn component_target(r: usize, arity: usize) -> usize {
    r.div_ceil(arity + 1).max(1)
}

/// Discovers the maximal query graph of `tuple` in its reduced neighborhood.
pub fn discover(graph: &DataGraph, reduced: &Neighborhood, tuple: &Tuple, r: usize) -> Result<MaximalQueryGraph> {
    if r == 0 {
        return Err(Error::InvalidParameter("target size r must be at least 1".into()));
    }
    let weighted = weigh(graph, reduced)?;
    if weighted.is_empty() {
        return Err(Error::DisconnectedTuple { d: reduced.d() });
    }

    let entities: Vec<EntityId> = reduced.nodes().collect();
    let index_of = |v: EntityId| entities.binary_search(&v).ok();
    let mut terminals = Vec::with_capacity(tuple.arity());
    for &q in tuple.entities() {
        terminals.push(index_of(q).ok_or(Error::DisconnectedTuple { d: reduced.d() })?);
    }

    let mut ranked: Vec<(EdgeId, f64)> = weighted;
    ranked.sort_by(|a, b| {
        let (ta, tb) = (graph.edge(a.0), graph.edge(b.0));
        b.1.total_cmp(&a.1)
            .then(ta.label.cmp(&tb.label))
            .then((ta.subj, ta.obj).cmp(&(tb.subj, tb.obj)))
    });
    let pairs: Vec<(usize, usize)> = ranked
        .iter()
        .map(|&(e, _)| {
            let t = graph.edge(e);
            (index_of(t.subj).unwrap(), index_of(t.obj).unwrap())
        })
        .collect();
    let weights: Vec<f64> = ranked.iter().map(|&(_, w)| w).collect();

    let chosen = select_edges(entities.len(), &pairs, &weights, &terminals, r);

    // Compact to the nodes the chosen edges touch; query entities first.
    let mut used: Vec<usize> = terminals.clone();
    for &i in &chosen {
        for v in [pairs[i].0, pairs[i].1] {
            if !used.contains(&v) {
                used.push(v);
            }
        }
    }
    used[tuple.arity()..].sort_unstable();
    let remap = |v: usize| used.iter().position(|&u| u == v).unwrap();
    let nodes = used.iter().map(|&v| QueryNode::Entity(entities[v])).collect();
    let edges = chosen
        .iter()
        .map(|&i| (remap(pairs[i].0), graph.edge(ranked[i].0).label, remap(pairs[i].1), weights[i]))
        .collect();
    let anchors = tuple.entities().iter().map(|&q| vec![q]).collect();
    MaximalQueryGraph::from_parts(nodes, (0..tuple.arity()).collect(), anchors, edges)
}

/// Runs the divide-and-conquer selection over edges given in priority order
/// and returns the chosen edge indexes, ascending.
pub(crate) fn select_edges(
    node_count: usize,
    pairs: &[(usize, usize)],
    weights: &[f64],
    terminals: &[usize],
    r: usize,
) -> Vec<usize> {
    let m = component_target(r, terminals.len());
    let on_path = edges_between_terminals(node_count, pairs, terminals);

    // Vertices of the core graph: endpoints of core edges and the terminals.
    let mut core_vertex = vec![false; node_count];
    for &t in terminals {
        core_vertex[t] = true;
    }
    for (i, &(a, b)) in pairs.iter().enumerate() {
        if on_path[i] {
            core_vertex[a] = true;
            core_vertex[b] = true;
        }
    }

    // Every off-core component hangs off exactly one core vertex.
    let mut sets = DisjointSets::new(node_count);
    for (i, &(a, b)) in pairs.iter().enumerate() {
        if !on_path[i] {
            sets.union(a, b);
        }
    }
    let mut attachment: BTreeMap<usize, usize> = BTreeMap::new();
    for v in (0..node_count).filter(|&v| core_vertex[v]) {
        let root = sets.find(v);
        let slot = attachment.entry(root).or_insert(v);
        if terminals.contains(&v) {
            *slot = v;
        }
    }

    // Subgraph 0 is the core; subgraph j + 1 belongs to terminal j.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); terminals.len() + 1];
    for (i, &(a, _)) in pairs.iter().enumerate() {
        let owner = if on_path[i] {
            0
        } else {
            match attachment.get(&sets.find(a)) {
                Some(v) => terminals.iter().position(|t| t == v).map_or(0, |j| j + 1),
                None => 0,
            }
        };
        members[owner].push(i);
    }

    let mut chosen = BTreeSet::new();
    for (owner, list) in members.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        let local_terminals: Vec<usize> = if owner == 0 {
            terminals.to_vec()
        } else {
            vec![terminals[owner - 1]]
        };
        chosen.extend(greedy_component(node_count, pairs, list, &local_terminals, m));
    }
    let chosen: Vec<usize> = chosen.into_iter().collect();
    cap_edges(node_count, pairs, weights, chosen, terminals, 2 * r)
}

/// Edges of the weakly connected component of the top-`s` members that
/// holds every terminal, if one exists and is non-empty.
fn top_s_component(
    node_count: usize,
    pairs: &[(usize, usize)],
    members: &[usize],
    terminals: &[usize],
    s: usize,
) -> Option<Vec<usize>> {
    let prefix = &members[..s];
    let mut sets = DisjointSets::new(node_count);
    for &i in prefix {
        sets.union(pairs[i].0, pairs[i].1);
    }
    let root = sets.find(terminals[0]);
    if terminals.iter().any(|&t| sets.find(t) != root) {
        return None;
    }
    let component: Vec<usize> = prefix.iter().copied().filter(|&i| sets.find(pairs[i].0) == root).collect();
    (!component.is_empty()).then_some(component)
}

#[derive(PartialEq)]
enum Step {
    Up,
    Down,
}

/// Greedy top-`s` scan for one subgraph. Prefers exactly `m` edges, else the
/// largest undershoot, else the smallest overshoot.
fn greedy_component(
    node_count: usize,
    pairs: &[(usize, usize)],
    members: &[usize],
    terminals: &[usize],
    m: usize,
) -> Vec<usize> {
    let total = members.len();
    let mut s = m.min(total);
    let mut step = Step::Up;
    let mut s1 = None;
    let mut s2 = None;
    loop {
        match top_s_component(node_count, pairs, members, terminals, s) {
            Some(c) if c.len() == m => return c,
            Some(c) if c.len() < m => {
                s1 = Some(s);
                if step == Step::Down {
                    break;
                }
            }
            Some(_) => {
                if s1.is_some() {
                    break;
                }
                s2 = Some(s);
                step = Step::Down;
            }
            // Components only grow with s, so nothing smaller exists either.
            None if step == Step::Down => break,
            None => {}
        }
        match step {
            Step::Up if s < total => s += 1,
            Step::Down if s > 1 => s -= 1,
            _ => break,
        }
    }
    match s1.or(s2) {
        Some(s) => top_s_component(node_count, pairs, members, terminals, s).unwrap_or_default(),
        None => members.to_vec(),
    }
}

/// Drops lowest-weight edges until at most `cap` remain. Only edges whose
/// removal keeps the rest weakly connected (with every terminal) qualify.
fn cap_edges(
    node_count: usize,
    pairs: &[(usize, usize)],
    weights: &[f64],
    mut chosen: Vec<usize>,
    terminals: &[usize],
    cap: usize,
) -> Vec<usize> {
    while chosen.len() > cap {
        let removable = |skip: usize| {
            let rest: Vec<usize> = chosen.iter().copied().filter(|&i| i != skip).collect();
            let mut sets = DisjointSets::new(node_count);
            for &i in &rest {
                sets.union(pairs[i].0, pairs[i].1);
            }
            let root = sets.find(terminals[0]);
            terminals.iter().all(|&t| sets.find(t) == root)
                && rest
                    .iter()
                    .all(|&i| sets.find(pairs[i].0) == root)
        };
        // Lowest weight first; among equals the lowest-priority (last) edge.
        let victim = chosen
            .iter()
            .copied()
            .filter(|&i| removable(i))
            .min_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(b.cmp(&a)));
        match victim {
            Some(v) => chosen.retain(|&i| i != v),
            None => break,
        }
    }
    chosen
}

/// Merges per-tuple MQGs: query nodes become virtual nodes, edges with equal
/// label and equal endpoints after substitution collapse into one weighted
/// `c * w_max`, and a result larger than `r` is trimmed by the same greedy
/// selection with the virtual nodes as query nodes.
pub fn merge(mqgs: &[MaximalQueryGraph], r: usize) -> Result<MaximalQueryGraph> {
    let first = mqgs
        .first()
        .ok_or_else(|| Error::InvalidParameter("nothing to merge".into()))?;
    if r == 0 {
        return Err(Error::InvalidParameter("target size r must be at least 1".into()));
    }
    let n = first.arity();
    for m in mqgs {
        if m.arity() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                found: m.arity(),
            });
        }
    }

    let mut anchors: Vec<Vec<EntityId>> = vec![Vec::new(); n];
    let mut merged: BTreeMap<(QueryNode, LabelId, QueryNode), (usize, f64)> = BTreeMap::new();
    for m in mqgs {
        for (j, slot) in anchors.iter_mut().enumerate() {
            for &a in m.anchors(j) {
                if !slot.contains(&a) {
                    slot.push(a);
                }
            }
        }
        let key = |v: usize| match m.query_nodes.iter().position(|&q| q == v) {
            Some(j) => QueryNode::Virtual(j),
            None => m.nodes[v],
        };
        for e in &m.edges {
            let entry = merged.entry((key(e.src), e.label, key(e.dst))).or_insert((0, 0.0));
            entry.0 += 1;
            entry.1 = entry.1.max(e.base_weight);
        }
    }

    let mut ranked: Vec<((QueryNode, LabelId, QueryNode), f64)> =
        merged.into_iter().map(|(k, (c, w))| (k, c as f64 * w)).collect();
    ranked.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(a.0 .1.cmp(&b.0 .1))
            .then((a.0 .0, a.0 .2).cmp(&(b.0 .0, b.0 .2)))
    });

    let mut node_keys: BTreeSet<QueryNode> = (0..n).map(QueryNode::Virtual).collect();
    for ((s, _, o), _) in &ranked {
        node_keys.insert(*s);
        node_keys.insert(*o);
    }
    let all_nodes: Vec<QueryNode> = node_keys.into_iter().collect();
    let idx = |q: QueryNode| all_nodes.binary_search(&q).unwrap();
    let pairs: Vec<(usize, usize)> = ranked.iter().map(|((s, _, o), _)| (idx(*s), idx(*o))).collect();
    let weights: Vec<f64> = ranked.iter().map(|&(_, w)| w).collect();

    let chosen: Vec<usize> = if ranked.len() > r {
        select_edges(all_nodes.len(), &pairs, &weights, &(0..n).collect::<Vec<_>>(), r)
    } else {
        (0..ranked.len()).collect()
    };

    let mut used: BTreeSet<usize> = (0..n).collect();
    for &i in &chosen {
        used.insert(pairs[i].0);
        used.insert(pairs[i].1);
    }
    let used: Vec<usize> = used.into_iter().collect();
    let remap = |v: usize| used.binary_search(&v).unwrap();
    let nodes = used.iter().map(|&v| all_nodes[v]).collect();
    let edges = chosen
        .iter()
        .map(|&i| (remap(pairs[i].0), ranked[i].0 .1, remap(pairs[i].1), weights[i]))
        .collect();
    MaximalQueryGraph::from_parts(nodes, (0..n).collect(), anchors, edges)
}
