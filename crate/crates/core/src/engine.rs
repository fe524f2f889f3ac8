//! End-to-end query pipeline over one data graph.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::executor::{explore, rank_answers, ExploreConfig, Exploration, JoinConfig, Strategy};
use crate::mqg::{self, MaximalQueryGraph};
use crate::neighborhood::{self, Neighborhood};
use crate::par;
use crate::store::{DataGraph, Tuple};

#[derive(Debug, Clone, PartialEq)]
pub struct QueryParams {
    /// Answers returned.
    pub k: usize,
    /// Answers kept from the first ranking stage.
    pub k_prime: usize,
    /// Path length threshold of the neighborhood.
    pub d: usize,
    /// Target maximal query graph size.
    pub r: usize,
    pub row_limit: usize,
    pub parallel: bool,
    pub strategy: Strategy,
    pub trace: bool,
}

impl Default for QueryParams {
    fn default() -> Self {
        Self {
            k: 10,
            k_prime: 100,
            d: 2,
            r: 15,
            row_limit: JoinConfig::default().row_limit,
            parallel: true,
            strategy: Strategy::BestFirst,
            trace: false,
        }
    }
}

impl QueryParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.k_prime < self.k {
            return bad("k' must be at least k");
        }
        if self.d == 0 {
            return bad("d must be at least 1");
        }
        if self.r == 0 {
            return bad("r must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub entities: Vec<String>,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryStats {
    pub nodes_evaluated: usize,
    pub nodes_pruned: usize,
    pub millis: u64,
}

/// Per-tuple neighborhoods and the (merged) maximal query graph.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub tuples: Vec<Tuple>,
    /// Reduced neighborhood of each tuple.
    pub neighborhoods: Vec<Neighborhood>,
    pub mqg: MaximalQueryGraph,
}

#[derive(Debug, Clone)]
pub struct QueryOutcome {
    pub answers: Vec<Answer>,
    pub prepared: Prepared,
    pub exploration: Exploration,
    pub stats: QueryStats,
}

#[derive(Debug, Clone, Copy)]
pub struct Engine<'g> {
    graph: &'g DataGraph,
}

impl<'g> Engine<'g> {
    pub fn new(graph: &'g DataGraph) -> Self {
        Self { graph }
    }

    pub fn graph(&self) -> &'g DataGraph {
        self.graph
    }

    /// Resolves example tuples by exact entity name. Arity is checked before
    /// names.
    pub fn resolve<S: AsRef<str>>(&self, tuples: &[Vec<S>]) -> Result<Vec<Tuple>> {
        let first = tuples
            .first()
            .ok_or_else(|| Error::InvalidTuple("at least one example tuple is required".into()))?;
        for t in tuples {
            if t.len() != first.len() {
                return Err(Error::ArityMismatch {
                    expected: first.len(),
                    found: t.len(),
                });
            }
        }
        tuples.iter().map(|t| Tuple::resolve(self.graph, t)).collect()
    }

    /// Extracts, reduces and distills each tuple's neighborhood, merging the
    /// per-tuple query graphs when there are several.
    pub fn prepare(&self, tuples: &[Tuple], params: &QueryParams) -> Result<Prepared> {
        params.validate()?;
        let parts = par::map(tuples, params.parallel, |t| -> Result<(Neighborhood, MaximalQueryGraph)> {
            let hood = neighborhood::extract(self.graph, t, params.d)?;
            let classes = neighborhood::classify_edges(self.graph, &hood, t);
            let reduced = neighborhood::reduce(self.graph, &hood, &classes, t)?;
            let m = mqg::discover(self.graph, &reduced, t, params.r)?;
            Ok((reduced, m))
        });
        let (neighborhoods, mut graphs): (Vec<_>, Vec<_>) = parts.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
        let mqg = if graphs.len() == 1 {
            graphs.pop().unwrap()
        } else {
            mqg::merge(&graphs, params.r)?
        };
        Ok(Prepared {
            tuples: tuples.to_vec(),
            neighborhoods,
            mqg,
        })
    }

    /// Explores the lattice of a prepared query and ranks the answers.
    pub fn run(&self, prepared: Prepared, params: &QueryParams) -> Result<QueryOutcome> {
        params.validate()?;
        let start = Instant::now();
        let excluded: Vec<_> = prepared.tuples.iter().map(|t| t.entities().to_vec()).collect();
        let config = ExploreConfig {
            strategy: params.strategy,
            k_prime: params.k_prime,
            join: JoinConfig {
                row_limit: params.row_limit,
                parallel: params.parallel,
            },
            trace: params.trace,
        };
        let exploration = explore(self.graph, &prepared.mqg, &excluded, &config)?;
        let ranked = rank_answers(self.graph, &exploration.records, params.k, params.k_prime);
        let answers = ranked
            .into_iter()
            .enumerate()
            .map(|(i, r)| Answer {
                entities: r.tuple.iter().map(|&e| self.graph.entity_name(e).to_string()).collect(),
                score: r.full_score,
                rank: i + 1,
            })
            .collect();
        let stats = QueryStats {
            nodes_evaluated: exploration.nodes_evaluated(),
            nodes_pruned: exploration.pruned,
            millis: start.elapsed().as_millis() as u64,
        };
        Ok(QueryOutcome {
            answers,
            prepared,
            exploration,
            stats,
        })
    }

    /// Resolves, prepares and runs in one go.
    pub fn query<S: AsRef<str>>(&self, tuples: &[Vec<S>], params: &QueryParams) -> Result<QueryOutcome> {
        let start = Instant::now();
        let resolved = self.resolve(tuples)?;
        let prepared = self.prepare(&resolved, params)?;
        let mut outcome = self.run(prepared, params)?;
        outcome.stats.millis = start.elapsed().as_millis() as u64;
        Ok(outcome)
    }
}
