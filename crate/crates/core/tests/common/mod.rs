//! Fixtures, random instance generation and brute-force oracles shared by
//! the integration tests and the acceptance harness.
//!
//! The oracles only read `DataGraph::edges()` and the MQG's edge list; they
//! share no code with the join, lattice or exploration modules.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::PathBuf;

use exemplar_core::engine::{Prepared, QueryParams};
use exemplar_core::mqg::{MaximalQueryGraph, QueryNode};
use exemplar_core::{DataGraph, EdgeSet, Engine, EntityId, Triple, Tuple};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn excerpt() -> DataGraph {
    DataGraph::from_path(fixture("excerpt.tsv")).unwrap()
}

pub fn languages() -> DataGraph {
    DataGraph::from_path(fixture("languages.tsv")).unwrap()
}

pub fn triple(g: &DataGraph, s: &str, l: &str, o: &str) -> Triple {
    Triple {
        subj: g.entity(s).unwrap_or_else(|| panic!("no entity {s}")),
        label: g.label(l).unwrap_or_else(|| panic!("no label {l}")),
        obj: g.entity(o).unwrap_or_else(|| panic!("no entity {o}")),
    }
}

pub fn names(g: &DataGraph, tuple: &[EntityId]) -> Vec<String> {
    tuple.iter().map(|&e| g.entity_name(e).to_string()).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random labeled graph with `entities` nodes named `e0..`, labels `l0..`.
pub fn random_graph(rng: &mut ChaCha8Rng, entities: usize, labels: usize, edges: usize) -> DataGraph {
    let mut rows = Vec::with_capacity(edges);
    while rows.len() < edges {
        let s = rng.random_range(0..entities);
        let o = rng.random_range(0..entities);
        if s == o {
            continue;
        }
        let l = rng.random_range(0..labels);
        rows.push((format!("e{s}"), format!("l{l}"), format!("e{o}")));
    }
    DataGraph::from_triples(rows).unwrap()
}

/// Undirected hop distances from `from`, computed from the raw edge list.
pub fn distances(g: &DataGraph, from: EntityId) -> HashMap<EntityId, usize> {
    let mut adj: HashMap<EntityId, Vec<EntityId>> = HashMap::new();
    for t in g.edges() {
        adj.entry(t.subj).or_default().push(t.obj);
        adj.entry(t.obj).or_default().push(t.subj);
    }
    let mut dist = HashMap::from([(from, 0)]);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &w in adj.get(&u).map_or(&[][..], Vec::as_slice) {
            if !dist.contains_key(&w) {
                dist.insert(w, dist[&u] + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// A tuple of `arity` distinct entities, each within distance `d` of the
/// first one.
pub fn random_tuple(rng: &mut ChaCha8Rng, g: &DataGraph, arity: usize, d: usize) -> Option<Tuple> {
    let first = EntityId(rng.random_range(0..g.entity_count() as u32));
    let near: Vec<EntityId> = distances(g, first)
        .into_iter()
        .filter(|&(v, k)| v != first && k <= d)
        .map(|(v, _)| v)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if near.len() + 1 < arity {
        return None;
    }
    let mut picked = vec![first];
    while picked.len() < arity {
        let v = *near.choose(rng).unwrap();
        if !picked.contains(&v) {
            picked.push(v);
        }
    }
    Tuple::new(picked).ok()
}

pub struct Instance {
    pub seed: u64,
    pub graph: DataGraph,
    pub tuples: Vec<Tuple>,
    pub params: QueryParams,
    pub prepared: Prepared,
}

impl Instance {
    pub fn mqg(&self) -> &MaximalQueryGraph {
        &self.prepared.mqg
    }

    pub fn excluded(&self) -> Vec<Vec<EntityId>> {
        self.tuples.iter().map(|t| t.entities().to_vec()).collect()
    }
}

/// Store of at most 60 edges with an MQG of at most `max_mqg` edges; one in
/// five queries uses two example tuples.
pub fn random_instance(seed: u64, max_mqg: usize) -> Option<Instance> {
    let mut rng = rng(seed);
    let entities = rng.random_range(12..=20);
    let labels = rng.random_range(3..=4);
    let edges = rng.random_range(20..=60);
    let graph = random_graph(&mut rng, entities, labels, edges);
    let arity = rng.random_range(1..=2);
    let d = 2;
    let mut tuples = vec![random_tuple(&mut rng, &graph, arity, d)?];
    if rng.random_bool(0.2) {
        let second = random_tuple(&mut rng, &graph, arity, d)?;
        if second == tuples[0] {
            return None;
        }
        tuples.push(second);
    }
    let params = QueryParams {
        d,
        r: rng.random_range(4..=8),
        k: 5,
        k_prime: usize::MAX,
        parallel: false,
        ..QueryParams::default()
    };
    let prepared = Engine::new(&graph).prepare(&tuples, &params).ok()?;
    if prepared.mqg.edge_count() > max_mqg {
        return None;
    }
    Some(Instance {
        seed,
        graph,
        tuples,
        params,
        prepared,
    })
}

/// The first `count` instances found scanning seeds upward from `start`.
pub fn instances(start: u64, count: usize, max_mqg: usize) -> Vec<Instance> {
    let mut out = Vec::with_capacity(count);
    let mut seed = start;
    while out.len() < count {
        if let Some(i) = random_instance(seed, max_mqg) {
            out.push(i);
        }
        seed += 1;
    }
    out
}

// ---------------------------------------------------------------------------
// Lattice oracle

fn edge_list(m: &MaximalQueryGraph) -> Vec<(usize, usize)> {
    m.edges().iter().map(|e| (e.src, e.dst)).collect()
}

/// Non-empty, weakly connected and touching every query node; checked by
/// flood fill over the edge list.
pub fn brute_valid(m: &MaximalQueryGraph, bits: u64) -> bool {
    if bits == 0 {
        return false;
    }
    let edges = edge_list(m);
    let chosen: Vec<(usize, usize)> = (0..edges.len()).filter(|i| bits >> i & 1 == 1).map(|i| edges[i]).collect();
    let mut nodes: BTreeSet<usize> = chosen.iter().flat_map(|&(a, b)| [a, b]).collect();
    if m.query_nodes().iter().any(|q| !nodes.contains(q)) {
        return false;
    }
    let mut reached = BTreeSet::from([m.query_nodes()[0]]);
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in &chosen {
            if reached.contains(&a) != reached.contains(&b) {
                reached.insert(a);
                reached.insert(b);
                changed = true;
            }
        }
    }
    nodes.retain(|v| !reached.contains(v));
    nodes.is_empty()
}

/// Every valid query graph of `m`, by subset enumeration.
pub fn all_valid(m: &MaximalQueryGraph) -> Vec<EdgeSet> {
    let n = m.edge_count();
    assert!(n <= 16, "exhaustive enumeration of {n} edges");
    (1u64..1 << n).filter(|&b| brute_valid(m, b)).map(EdgeSet).collect()
}

/// Valid query graphs with no valid proper subset.
pub fn brute_minimal(m: &MaximalQueryGraph) -> BTreeSet<EdgeSet> {
    let valid = all_valid(m);
    valid
        .iter()
        .copied()
        .filter(|q| !valid.iter().any(|o| o.0 != q.0 && o.0 & !q.0 == 0))
        .collect()
}

/// Structure score summed independently of the library.
pub fn brute_score(m: &MaximalQueryGraph, q: EdgeSet) -> f64 {
    (0..m.edge_count()).filter(|&i| q.0 >> i & 1 == 1).map(|i| m.edges()[i].weight).sum()
}

// ---------------------------------------------------------------------------
// Matching oracle

/// All injective mappings of `q`'s nodes onto entities such that every query
/// edge maps onto a data edge with the same label and direction.
pub fn brute_matches(g: &DataGraph, m: &MaximalQueryGraph, q: EdgeSet) -> Vec<BTreeMap<usize, EntityId>> {
    let edges: Vec<(usize, u32, usize)> = (0..m.edge_count())
        .filter(|&i| q.0 >> i & 1 == 1)
        .map(|i| (m.edges()[i].src, m.edges()[i].label.0, m.edges()[i].dst))
        .collect();
    let data: BTreeSet<(EntityId, u32, EntityId)> = g.edges().iter().map(|t| (t.subj, t.label.0, t.obj)).collect();
    let mut nodes: Vec<usize> = Vec::new();
    // Order nodes so each one after the first is adjacent to an earlier one.
    let mut pending: BTreeSet<usize> = edges.iter().flat_map(|&(a, _, b)| [a, b]).collect();
    let start = m.query_nodes()[0];
    pending.remove(&start);
    nodes.push(start);
    while !pending.is_empty() {
        let next = *pending
            .iter()
            .find(|&&v| edges.iter().any(|&(a, _, b)| (a == v && nodes.contains(&b)) || (b == v && nodes.contains(&a))))
            .expect("connected query graph");
        pending.remove(&next);
        nodes.push(next);
    }
    let entities: Vec<EntityId> = (0..g.entity_count() as u32).map(EntityId).collect();
    let mut out = Vec::new();
    let mut assignment: BTreeMap<usize, EntityId> = BTreeMap::new();
    extend_match(&nodes, 0, &edges, &data, &entities, &mut assignment, &mut out);
    out
}

fn extend_match(
    order: &[usize],
    pos: usize,
    edges: &[(usize, u32, usize)],
    data: &BTreeSet<(EntityId, u32, EntityId)>,
    entities: &[EntityId],
    assignment: &mut BTreeMap<usize, EntityId>,
    out: &mut Vec<BTreeMap<usize, EntityId>>,
) {
    if pos == order.len() {
        out.push(assignment.clone());
        return;
    }
    let v = order[pos];
    for &x in entities {
        if assignment.values().any(|&y| y == x) {
            continue;
        }
        assignment.insert(v, x);
        let consistent = edges.iter().all(|&(a, l, b)| match (assignment.get(&a), assignment.get(&b)) {
            (Some(&fa), Some(&fb)) => data.contains(&(fa, l, fb)),
            _ => true,
        });
        if consistent {
            extend_match(order, pos + 1, edges, data, entities, assignment, out);
        }
        assignment.remove(&v);
    }
}

pub fn projection(m: &MaximalQueryGraph, mapping: &BTreeMap<usize, EntityId>) -> Vec<EntityId> {
    m.query_nodes().iter().map(|q| mapping[q]).collect()
}

/// Answer tuples of `q`, input tuples excluded.
pub fn brute_answers(g: &DataGraph, m: &MaximalQueryGraph, q: EdgeSet, excluded: &[Vec<EntityId>]) -> BTreeSet<Vec<EntityId>> {
    brute_matches(g, m, q)
        .iter()
        .map(|f| projection(m, f))
        .filter(|t| !excluded.contains(t))
        .collect()
}

/// Per answer tuple, the best structure score over every valid query graph.
pub fn exhaustive_scores(g: &DataGraph, m: &MaximalQueryGraph, excluded: &[Vec<EntityId>]) -> BTreeMap<Vec<EntityId>, f64> {
    let mut best: BTreeMap<Vec<EntityId>, f64> = BTreeMap::new();
    for q in all_valid(m) {
        let s = brute_score(m, q);
        for t in brute_answers(g, m, q, excluded) {
            let slot = best.entry(t).or_insert(f64::NEG_INFINITY);
            if s > *slot {
                *slot = s;
            }
        }
    }
    best
}

/// Content credit computed straight from the matching rule.
pub fn brute_content(m: &MaximalQueryGraph, q: EdgeSet, f: &BTreeMap<usize, EntityId>) -> f64 {
    let identical = |v: usize| match m.nodes()[v] {
        QueryNode::Entity(e) => f[&v] == e,
        QueryNode::Virtual(j) => m.anchors(j).contains(&f[&v]),
    };
    let degree = |v: usize| m.edges().iter().filter(|e| e.src == v || e.dst == v).count() as f64;
    (0..m.edge_count())
        .filter(|&i| q.0 >> i & 1 == 1)
        .map(|i| {
            let e = &m.edges()[i];
            match (identical(e.src), identical(e.dst)) {
                (true, true) => e.weight / degree(e.src).min(degree(e.dst)),
                (true, false) => e.weight / degree(e.src),
                (false, true) => e.weight / degree(e.dst),
                (false, false) => 0.0,
            }
        })
        .sum()
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

// ---------------------------------------------------------------------------
// Small hand-wired query graphs

/// Two query nodes q1 = 0 and q2 = 1 plus g = 2, x = 3, p = 4, with edge bits
/// F(q1 -> q2) = 0, G(q1 -> g) = 1, H(q2 -> x) = 2, L(q1 -> x) = 3 and
/// P(q2 -> p) = 4. Every edge gets base weight 1.
pub fn five_edge_mqg() -> MaximalQueryGraph {
    use exemplar_core::LabelId;
    let nodes = (0..5).map(|i| QueryNode::Entity(EntityId(i))).collect();
    MaximalQueryGraph::from_parts(
        nodes,
        vec![0, 1],
        vec![vec![EntityId(0)], vec![EntityId(1)]],
        vec![
            (0, LabelId(0), 1, 1.0),
            (0, LabelId(1), 2, 1.0),
            (1, LabelId(2), 3, 1.0),
            (0, LabelId(3), 3, 1.0),
            (1, LabelId(4), 4, 1.0),
        ],
    )
    .unwrap()
}

/// Lattice node from edge letters of [`five_edge_mqg`].
pub fn letters(s: &str) -> EdgeSet {
    EdgeSet::from_indices(s.chars().map(|c| "FGHLP".find(c).expect("edge letter")))
}

/// Single-tuple query graph over excerpt entities; `query` names the query
/// nodes, the rest are added in order of appearance.
pub fn excerpt_mqg(g: &DataGraph, query: &[&str], edges: &[(&str, &str, &str, f64)]) -> MaximalQueryGraph {
    let mut names: Vec<&str> = query.to_vec();
    for &(s, _, o, _) in edges {
        for v in [s, o] {
            if !names.contains(&v) {
                names.push(v);
            }
        }
    }
    let pos = |x: &str| names.iter().position(|&n| n == x).unwrap();
    let nodes = names.iter().map(|n| QueryNode::Entity(g.entity(n).unwrap())).collect();
    let parts = edges.iter().map(|&(s, l, o, w)| (pos(s), g.label(l).unwrap(), pos(o), w)).collect();
    let anchors = query.iter().map(|n| vec![g.entity(n).unwrap()]).collect();
    MaximalQueryGraph::from_parts(nodes, (0..query.len()).collect(), anchors, parts).unwrap()
}

/// Query graphs of two founder tuples sharing a founded and a places_lived
/// edge pattern, with different headquarters.
pub fn founder_pair(g: &DataGraph) -> [MaximalQueryGraph; 2] {
    [
        excerpt_mqg(
            g,
            &["Steve Wozniak", "Apple Inc."],
            &[
                ("Steve Wozniak", "founded", "Apple Inc.", 1.0),
                ("Steve Wozniak", "places_lived", "San Jose", 0.5),
                ("Apple Inc.", "headquartered_in", "Cupertino", 0.75),
                ("Steve Wozniak", "nationality", "USA", 0.25),
            ],
        ),
        excerpt_mqg(
            g,
            &["Jerry Yang", "Yahoo!"],
            &[
                ("Jerry Yang", "founded", "Yahoo!", 1.5),
                ("Jerry Yang", "places_lived", "San Jose", 0.8),
                ("Yahoo!", "headquartered_in", "Sunnyvale", 0.75),
                ("Jerry Yang", "education", "Stanford", 0.6),
            ],
        ),
    ]
}

/// `(src, label, dst, weight)` of every MQG edge, by display name.
pub fn edge_table(g: &DataGraph, m: &MaximalQueryGraph) -> BTreeSet<(String, String, String, String)> {
    m.edge_views(g)
        .into_iter()
        .map(|e| (e.subj, e.label, e.obj, format!("{:.6}", e.weight)))
        .collect()
}

/// Extracts and reduces the neighborhood of a random tuple, then checks
/// that every query entity survived. `None` when the seed yields no usable
/// tuple.
pub fn reduce_random(seed: u64) -> Option<Result<(), String>> {
    use exemplar_core::neighborhood::{classify_edges, extract, reduce};
    let mut r = rng(seed);
    let g = random_graph(&mut r, 16, 3, 40);
    let d = 1 + seed as usize % 3;
    let t = random_tuple(&mut r, &g, 1 + seed as usize % 3, d)?;
    let hood = extract(&g, &t, d).ok()?;
    let classes = classify_edges(&g, &hood, &t);
    let reduced = match reduce(&g, &hood, &classes, &t) {
        Ok(h) => h,
        Err(e) => return Some(Err(format!("seed {seed}: {e}"))),
    };
    if let Some(q) = t.entities().iter().find(|&&q| !reduced.contains_node(q)) {
        return Some(Err(format!("seed {seed}: lost {q:?}")));
    }
    if reduced
        .edges()
        .iter()
        .any(|&e| !hood.contains_edge(e) || classes.is_unimportant(&g, e))
    {
        return Some(Err(format!("seed {seed}: kept an edge it should have dropped")));
    }
    Some(Ok(()))
}
