//! Lattice exploration and two-stage answer ranking.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use crate::error::Result;
use crate::lattice::{minimal_query_trees, parents, EdgeSet, LatticeState, TraceEvent};
use crate::mqg::MaximalQueryGraph;
use crate::store::{DataGraph, EntityId};

use super::join::{evaluate_chain, extend, AnswerTable, JoinConfig};
use super::scoring::{c_score, s_score};

/// Witnesses kept per answer tuple for the second ranking stage.
pub const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Highest upper bound first, with early termination.
    BestFirst,
    /// Bottom-up, smallest query graphs first, until the lattice is spent.
    Baseline,
}

#[derive(Debug, Clone, Copy)]
pub struct ExploreConfig {
    pub strategy: Strategy,
    /// Number of answer tuples that must be secured before stopping early.
    pub k_prime: usize,
    pub join: JoinConfig,
    pub trace: bool,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::BestFirst,
            k_prime: 100,
            join: JoinConfig::default(),
            trace: false,
        }
    }
}

/// One answer graph retained for content scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub query: EdgeSet,
    pub structure: f64,
    pub content: f64,
    /// `(MQG node, entity)` pairs, sorted by node.
    pub mapping: Vec<(usize, EntityId)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnswerRecord {
    pub tuple: Vec<EntityId>,
    /// Best structure score over the evaluated query graphs producing it.
    pub structure_score: f64,
    pub witnesses: Vec<Witness>,
}

/// Why the best-first loop stopped before spending the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStop {
    /// Structure score of the `k'`-th retained tuple.
    pub threshold: f64,
    /// Largest upper bound left in the lower frontier.
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct Exploration {
    /// Every answer tuple found, by descending structure score.
    pub records: Vec<AnswerRecord>,
    /// Evaluated query graphs in order, with their answer-graph counts.
    pub evaluated: Vec<(EdgeSet, usize)>,
    pub nulls: Vec<EdgeSet>,
    /// Candidates skipped because they contained a null node.
    pub pruned: usize,
    pub early_stop: Option<EarlyStop>,
    pub trace: Vec<TraceEvent>,
}

impl Exploration {
    pub fn nodes_evaluated(&self) -> usize {
        self.evaluated.len()
    }
}

#[derive(Default)]
struct Collector {
    records: HashMap<Vec<EntityId>, AnswerRecord>,
}

impl Collector {
    fn absorb(&mut self, mqg: &MaximalQueryGraph, q: EdgeSet, table: &AnswerTable) {
        let structure = s_score(mqg, q);
        // Best content score per tuple within this query graph.
        let mut best: HashMap<Vec<EntityId>, (f64, usize)> = HashMap::new();
        for i in 0..table.len() {
            let tuple = table.project(i, mqg.query_nodes());
            let content = c_score(mqg, q, table.columns(), table.row(i));
            let slot = best.entry(tuple).or_insert((content, i));
            if content > slot.0 {
                *slot = (content, i);
            }
        }
        for (tuple, (content, i)) in best {
            let mut mapping: Vec<(usize, EntityId)> =
                table.columns().iter().copied().zip(table.row(i).iter().copied()).collect();
            mapping.sort_unstable();
            let record = self.records.entry(tuple.clone()).or_insert_with(|| AnswerRecord {
                tuple,
                structure_score: structure,
                witnesses: Vec::new(),
            });
            if structure > record.structure_score {
                record.structure_score = structure;
            }
            record.witnesses.push(Witness {
                query: q,
                structure,
                content,
                mapping,
            });
            record.witnesses.sort_by(|a, b| {
                b.structure
                    .total_cmp(&a.structure)
                    .then(b.content.total_cmp(&a.content))
                    .then(a.query.cmp(&b.query))
            });
            record.witnesses.truncate(MAX_WITNESSES);
        }
    }

    /// Structure score of the `k`-th best tuple, if there are `k` of them.
    fn kth_score(&self, k: usize) -> Option<f64> {
        if k == 0 || self.records.len() < k {
            return None;
        }
        let mut scores: Vec<f64> = self.records.values().map(|r| r.structure_score).collect();
        let (_, kth, _) = scores.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
        Some(*kth)
    }

    fn finish(self) -> Vec<AnswerRecord> {
        let mut records: Vec<AnswerRecord> = self.records.into_values().collect();
        records.sort_by(|a, b| b.structure_score.total_cmp(&a.structure_score).then(a.tuple.cmp(&b.tuple)));
        records
    }
}

struct Evaluator<'a> {
    graph: &'a DataGraph,
    mqg: &'a MaximalQueryGraph,
    excluded: &'a [Vec<EntityId>],
    config: JoinConfig,
    tables: HashMap<EdgeSet, AnswerTable>,
}

impl Evaluator<'_> {
    /// Joins onto the smallest materialized child when there is one, else
    /// runs the full join chain.
    fn evaluate(&mut self, q: EdgeSet) -> Result<AnswerTable> {
        let child = q
            .iter()
            .filter_map(|i| self.tables.get(&q.without(i)).map(|t| (i, t)))
            .min_by_key(|(i, t)| (t.len(), *i));
        let table = match child {
            Some((i, t)) => extend(self.graph, self.mqg, t, i, &self.config)?,
            None => evaluate_chain(self.graph, self.mqg, q, &self.config)?,
        };
        Ok(table.without_tuples(self.mqg.query_nodes(), self.excluded))
    }
}

/// Explores the query lattice of `mqg` and collects answer tuples with
/// their structure scores. Tuples in `excluded` are never answers.
pub fn explore(
    graph: &DataGraph,
    mqg: &MaximalQueryGraph,
    excluded: &[Vec<EntityId>],
    config: &ExploreConfig,
) -> Result<Exploration> {
    let mut evaluator = Evaluator {
        graph,
        mqg,
        excluded,
        config: config.join,
        tables: HashMap::new(),
    };
    match config.strategy {
        Strategy::BestFirst => best_first(&mut evaluator, config),
        Strategy::Baseline => baseline(&mut evaluator),
    }
}

fn best_first(ev: &mut Evaluator<'_>, config: &ExploreConfig) -> Result<Exploration> {
    let mut state = LatticeState::new(ev.mqg, config.trace);
    let mut collector = Collector::default();
    let mut evaluated = Vec::new();
    let mut early_stop = None;
    while let Some(bound) = state.max_upper_bound() {
        if let Some(threshold) = collector.kth_score(config.k_prime) {
            if threshold >= bound {
                early_stop = Some(EarlyStop { threshold, bound });
                break;
            }
        }
        let q = state.best().expect("lower frontier is non-empty");
        let table = ev.evaluate(q)?;
        evaluated.push((q, table.len()));
        state.record(q, table.is_empty());
        if !table.is_empty() {
            collector.absorb(ev.mqg, q, &table);
            ev.tables.insert(q, table);
        }
    }
    Ok(Exploration {
        records: collector.finish(),
        evaluated,
        nulls: state.nulls().to_vec(),
        pruned: state.pruned_candidates(),
        early_stop,
        trace: state.take_trace(),
    })
}

fn baseline(ev: &mut Evaluator<'_>) -> Result<Exploration> {
    let mqg = ev.mqg;
    let mut queue: BTreeSet<(usize, EdgeSet)> = minimal_query_trees(mqg).into_iter().map(|q| (q.len(), q)).collect();
    let mut done: BTreeSet<EdgeSet> = BTreeSet::new();
    let mut nulls: Vec<EdgeSet> = Vec::new();
    let mut collector = Collector::default();
    let mut evaluated = Vec::new();
    let mut pruned = 0;
    while let Some((_, q)) = queue.pop_first() {
        if !done.insert(q) {
            continue;
        }
        if nulls.iter().any(|n| n.is_subset(q)) {
            pruned += 1;
            continue;
        }
        let table = ev.evaluate(q)?;
        evaluated.push((q, table.len()));
        if table.is_empty() {
            nulls.push(q);
            continue;
        }
        collector.absorb(mqg, q, &table);
        ev.tables.insert(q, table);
        for p in parents(mqg, q) {
            if !done.contains(&p) {
                queue.insert((p.len(), p));
            }
        }
    }
    Ok(Exploration {
        records: collector.finish(),
        evaluated,
        nulls,
        pruned,
        early_stop: None,
        trace: Vec::new(),
    })
}

/// A ranked answer tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredResult {
    pub tuple: Vec<EntityId>,
    /// Best structure plus content score over the retained witnesses.
    pub full_score: f64,
    pub structure_score: f64,
}

fn by_names(graph: &DataGraph, a: &[EntityId], b: &[EntityId]) -> Ordering {
    a.iter()
        .map(|&e| graph.entity_name(e))
        .cmp(b.iter().map(|&e| graph.entity_name(e)))
}

/// Keeps the `k_prime` tuples with the best structure scores, re-scores
/// them with content credit and returns the top `k`.
pub fn rank_answers(graph: &DataGraph, records: &[AnswerRecord], k: usize, k_prime: usize) -> Vec<ScoredResult> {
    let mut stage1: Vec<&AnswerRecord> = records.iter().collect();
    stage1.sort_by(|a, b| {
        b.structure_score
            .total_cmp(&a.structure_score)
            .then_with(|| by_names(graph, &a.tuple, &b.tuple))
    });
    stage1.truncate(k_prime);

    let mut results: Vec<ScoredResult> = stage1
        .into_iter()
        .map(|r| ScoredResult {
            tuple: r.tuple.clone(),
            full_score: r
                .witnesses
                .iter()
                .map(|w| w.structure + w.content)
                .fold(r.structure_score, f64::max),
            structure_score: r.structure_score,
        })
        .collect();
    results.sort_by(|a, b| {
        b.full_score
            .total_cmp(&a.full_score)
            .then(b.structure_score.total_cmp(&a.structure_score))
            .then_with(|| by_names(graph, &a.tuple, &b.tuple))
    });
    results.truncate(k);
    results
}
