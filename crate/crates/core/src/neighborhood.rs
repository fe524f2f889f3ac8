//! d-bounded neighborhood of a query tuple and its reduction.
//!
//! Extraction is a breadth-first expansion from all query entities at once
//! over undirected adjacency. An edge `(u, v)` belongs to the neighborhood
//! iff `min(dist[u], dist[v]) + 1 <= d`: the shortest path to the nearer
//! endpoint never passes through the farther one, so that path extended by
//! the edge is itself a simple path of length at most `d`.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::io::Write;

use crate::error::{Error, Result};
use crate::store::{DataGraph, EdgeId, EntityId, Tuple};

#[derive(Debug, Clone)]
pub struct Neighborhood {
    d: usize,
    query: Vec<EntityId>,
    edges: Vec<EdgeId>,
    dist: BTreeMap<EntityId, usize>,
}

impl Neighborhood {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn query(&self) -> &[EntityId] {
        &self.query
    }

    /// Edge ids in ascending order.
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn nodes(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.dist.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.dist.len()
    }

    pub fn contains_node(&self, v: EntityId) -> bool {
        self.dist.contains_key(&v)
    }

    /// Undirected distance from `v` to the nearest query entity, measured
    /// inside this graph.
    pub fn dist(&self, v: EntityId) -> Option<usize> {
        self.dist.get(&v).copied()
    }

    /// Incident edges of `v` restricted to this graph.
    pub fn incident<'a>(&'a self, graph: &'a DataGraph, v: EntityId) -> impl Iterator<Item = EdgeId> + 'a {
        graph.incident(v).iter().copied().filter(move |&e| self.contains_edge(e))
    }

    /// Writes the graph in the triple format followed by one
    /// `# dist <entity> <k>` comment per node.
    pub fn dump<W: Write>(&self, graph: &DataGraph, mut out: W) -> Result<()> {
        for &e in &self.edges {
            writeln!(out, "{}", graph.format_triple(&graph.edge(e)))?;
        }
        let mut nodes: Vec<_> = self.dist.iter().map(|(&v, &k)| (graph.entity_name(v), k)).collect();
        nodes.sort();
        for (name, k) in nodes {
            writeln!(out, "# dist {name} {k}")?;
        }
        Ok(())
    }

    fn from_edges(graph: &DataGraph, d: usize, query: Vec<EntityId>, edges: Vec<EdgeId>) -> Self {
        let mut edges = edges;
        edges.sort_unstable();
        edges.dedup();
        let mut adjacency: HashMap<EntityId, Vec<EntityId>> = HashMap::new();
        for &e in &edges {
            let t = graph.edge(e);
            adjacency.entry(t.subj).or_default().push(t.obj);
            adjacency.entry(t.obj).or_default().push(t.subj);
        }
        let dist = bfs(&query, |v| adjacency.get(&v).cloned().unwrap_or_default(), usize::MAX);
        Self {
            d,
            query,
            edges,
            dist: dist.into_iter().collect(),
        }
    }
}

fn bfs<F>(sources: &[EntityId], mut neighbors: F, limit: usize) -> HashMap<EntityId, usize>
where
    F: FnMut(EntityId) -> Vec<EntityId>,
{
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist.insert(s, 0).is_none() {
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if du >= limit {
            continue;
        }
        for w in neighbors(u) {
            if let Entry::Vacant(slot) = dist.entry(w) {
                slot.insert(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

fn graph_neighbors(graph: &DataGraph, v: EntityId) -> Vec<EntityId> {
    graph.incident(v).iter().map(|&e| graph.edge(e).other(v)).collect()
}

/// Extracts the neighborhood graph of `tuple` with path length threshold `d`.
///
/// Fails with [`Error::DisconnectedTuple`] unless the query entities are
/// linked by a chain of pairwise undirected distances of at most `d`; only
/// then does every edge deletion made by [`reduce`] keep them connected.
pub fn extract(graph: &DataGraph, tuple: &Tuple, d: usize) -> Result<Neighborhood> {
    if d == 0 {
        return Err(Error::InvalidParameter("path length threshold d must be at least 1".into()));
    }
    let query = tuple.entities().to_vec();
    if let Some(v) = query.iter().find(|v| v.index() >= graph.entity_count()) {
        return Err(Error::UnknownEntity(format!("#{}", v.0)));
    }

    let dist = bfs(&query, |v| graph_neighbors(graph, v), d);
    let mut edges = HashSet::new();
    for (&u, &du) in &dist {
        if du < d {
            edges.extend(graph.incident(u).iter().copied());
        }
    }

    if query.len() > 1 {
        // Union query entities that lie within distance d of each other.
        let mut parent: Vec<usize> = (0..query.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for (i, &q) in query.iter().enumerate() {
            let reach = bfs(&[q], |v| graph_neighbors(graph, v), d);
            for (j, other) in query.iter().enumerate() {
                if i != j && reach.contains_key(other) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let root = find(&mut parent, 0);
        if (1..query.len()).any(|i| find(&mut parent, i) != root) {
            return Err(Error::DisconnectedTuple { d });
        }
    }

    let mut edges: Vec<EdgeId> = edges.into_iter().collect();
    edges.sort_unstable();
    Ok(Neighborhood {
        d,
        query,
        edges,
        dist: dist.into_iter().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRole {
    Important,
    Unimportant,
    Neutral,
}

/// Role of every incident edge from the perspective of each endpoint.
#[derive(Debug, Clone, Default)]
pub struct EdgeClasses {
    roles: HashMap<(EntityId, EdgeId), EdgeRole>,
}

impl EdgeClasses {
    pub fn role(&self, v: EntityId, e: EdgeId) -> Option<EdgeRole> {
        self.roles.get(&(v, e)).copied()
    }

    /// Unimportant from the perspective of either end.
    pub fn is_unimportant(&self, graph: &DataGraph, e: EdgeId) -> bool {
        let t = graph.edge(e);
        self.role(t.subj, e) == Some(EdgeRole::Unimportant) || self.role(t.obj, e) == Some(EdgeRole::Unimportant)
    }

    pub fn edges_with_role(&self, v: EntityId, role: EdgeRole) -> Vec<EdgeId> {
        let mut out: Vec<_> = self
            .roles
            .iter()
            .filter(|(&(node, _), &r)| node == v && r == role)
            .map(|(&(_, e), _)| e)
            .collect();
        out.sort_unstable();
        out
    }
}

/// Splits each node's incident edges into important, unimportant and the
/// rest.
///
/// `e` is important for `v` when some simple path of at most `d` edges
/// starts at `v`, runs through `e`, and ends at a query entity. It is
/// unimportant when it is not important but an important edge of `v` has
/// the same label and the same direction relative to `v`.
pub fn classify_edges(graph: &DataGraph, hood: &Neighborhood, tuple: &Tuple) -> EdgeClasses {
    let d = hood.d;
    let query: HashSet<EntityId> = tuple.entities().iter().copied().collect();
    let mut adjacency: HashMap<EntityId, Vec<EntityId>> = HashMap::new();
    for &e in &hood.edges {
        let t = graph.edge(e);
        adjacency.entry(t.subj).or_default().push(t.obj);
        adjacency.entry(t.obj).or_default().push(t.subj);
    }

    // Whether `from` reaches a query entity within `budget` hops without
    // visiting `avoid`.
    let reaches = |from: EntityId, avoid: EntityId, budget: usize| -> bool {
        if query.contains(&from) {
            return true;
        }
        let mut seen = HashSet::from([avoid, from]);
        let mut layer = vec![from];
        for _ in 0..budget {
            let mut next = Vec::new();
            for u in layer {
                for &w in adjacency.get(&u).map_or(&[][..], Vec::as_slice) {
                    if seen.insert(w) {
                        if query.contains(&w) {
                            return true;
                        }
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            layer = next;
        }
        false
    };

    let mut roles = HashMap::new();
    let mut memo: HashMap<(EntityId, EntityId), bool> = HashMap::new();
    for v in hood.nodes() {
        let incident: Vec<EdgeId> = hood.incident(graph, v).collect();
        let important: Vec<bool> = incident
            .iter()
            .map(|&e| {
                let x = graph.edge(e).other(v);
                *memo.entry((v, x)).or_insert_with(|| reaches(x, v, d - 1))
            })
            .collect();
        for (i, &e) in incident.iter().enumerate() {
            let role = if important[i] {
                EdgeRole::Important
            } else {
                let t = graph.edge(e);
                let outgoing = t.subj == v;
                let shadowed = incident.iter().zip(&important).any(|(&other, &imp)| {
                    let o = graph.edge(other);
                    imp && o.label == t.label && (o.subj == v) == outgoing
                });
                if shadowed {
                    EdgeRole::Unimportant
                } else {
                    EdgeRole::Neutral
                }
            };
            roles.insert((v, e), role);
        }
    }
    EdgeClasses { roles }
}

/// Deletes every edge that is unimportant from either end and keeps the
/// weakly connected component holding the query entities.
pub fn reduce(graph: &DataGraph, hood: &Neighborhood, classes: &EdgeClasses, tuple: &Tuple) -> Result<Neighborhood> {
    let kept: Vec<EdgeId> = hood
        .edges
        .iter()
        .copied()
        .filter(|&e| !classes.is_unimportant(graph, e))
        .collect();

    let mut adjacency: HashMap<EntityId, Vec<(EdgeId, EntityId)>> = HashMap::new();
    for &e in &kept {
        let t = graph.edge(e);
        adjacency.entry(t.subj).or_default().push((e, t.obj));
        adjacency.entry(t.obj).or_default().push((e, t.subj));
    }
    let start = tuple.entities()[0];
    let mut seen = HashSet::from([start]);
    let mut component = Vec::new();
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &(e, w) in adjacency.get(&u).map_or(&[][..], Vec::as_slice) {
            if seen.insert(w) {
                stack.push(w);
            }
            component.push(e);
        }
    }
    if let Some(lost) = tuple.entities().iter().find(|v| !seen.contains(v)) {
        return Err(Error::Internal(format!(
            "reduction separated query entity `{}` from `{}`",
            graph.entity_name(*lost),
            graph.entity_name(start)
        )));
    }
    Ok(Neighborhood::from_edges(graph, hood.d, tuple.entities().to_vec(), component))
}
