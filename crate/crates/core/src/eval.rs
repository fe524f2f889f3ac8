//! Accuracy metrics against ground-truth tables and batch suite runs.
//!
//! Results and truth rows are compared as whole tuples, position by
//! position. Every metric uses binary relevance.

use std::collections::HashSet;
use std::hash::Hash;
use std::io::{BufRead, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::{Engine, QueryParams};
use crate::error::{Error, Result};
use crate::par;

fn relevance<T: Eq + Hash>(results: &[T], truth: &[T], k: usize) -> Result<Vec<bool>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let truth: HashSet<&T> = truth.iter().collect();
    Ok(results.iter().take(k).map(|r| truth.contains(r)).collect())
}

/// Fraction of the top `k` that is relevant. Missing results count as
/// misses: the denominator is always `k`.
pub fn precision_at_k<T: Eq + Hash>(results: &[T], truth: &[T], k: usize) -> Result<f64> {
    let rel = relevance(results, truth, k)?;
    Ok(rel.iter().filter(|&&r| r).count() as f64 / k as f64)
}

/// `sum_{i<=k} P@i * rel_i / |truth|`.
pub fn average_precision<T: Eq + Hash>(results: &[T], truth: &[T], k: usize) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::InvalidParameter("ground truth is empty".into()));
    }
    let rel = relevance(results, truth, k)?;
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &r) in rel.iter().enumerate() {
        if r {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / truth.len() as f64)
}

fn dcg(rel: impl Iterator<Item = bool>) -> f64 {
    rel.enumerate()
        .filter(|&(_, r)| r)
        .map(|(i, _)| if i == 0 { 1.0 } else { 1.0 / ((i + 1) as f64).log2() })
        .sum()
}

/// `DCG_k / IDCG_k` with `DCG_k = rel_1 + sum_{i>=2} rel_i / log2(i)`; the
/// ideal ranking puts `min(k, |truth|)` relevant results first.
pub fn ndcg<T: Eq + Hash>(results: &[T], truth: &[T], k: usize) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::InvalidParameter("ground truth is empty".into()));
    }
    let rel = relevance(results, truth, k)?;
    let ideal = dcg(std::iter::repeat_n(true, k.min(truth.len())));
    Ok(dcg(rel.into_iter()) / ideal)
}

/// One line of a suite file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub query: Vec<Vec<String>>,
    pub truth: Vec<Vec<String>>,
    pub k: usize,
}

/// Reads JSON lines; blank lines are skipped.
pub fn read_suite<R: BufRead>(reader: R) -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: SuiteEntry = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(entry);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    /// 1-based position in the suite.
    pub query_id: usize,
    pub precision: f64,
    pub average_precision: f64,
    pub ndcg: f64,
    pub nodes_evaluated: usize,
    pub millis: u128,
}

/// Runs every suite entry and scores it. `params.k` is replaced by each
/// entry's own `k` (and `k_prime` raised to at least that).
pub fn run_suite(engine: &Engine<'_>, suite: &[SuiteEntry], params: &QueryParams) -> Result<Vec<ReportRow>> {
    let indexed: Vec<(usize, &SuiteEntry)> = suite.iter().enumerate().collect();
    let rows = par::map(&indexed, params.parallel, |&(i, entry)| -> Result<ReportRow> {
        let mut p = params.clone();
        p.k = entry.k;
        p.k_prime = p.k_prime.max(entry.k);
        // Joins inside one query stay sequential while queries run side by side.
        p.parallel = false;
        let start = Instant::now();
        let outcome = engine.query(&entry.query, &p)?;
        let millis = start.elapsed().as_millis();
        let results: Vec<Vec<String>> = outcome.answers.into_iter().map(|a| a.entities).collect();
        Ok(ReportRow {
            query_id: i + 1,
            precision: precision_at_k(&results, &entry.truth, entry.k)?,
            average_precision: average_precision(&results, &entry.truth, entry.k)?,
            ndcg: ndcg(&results, &entry.truth, entry.k)?,
            nodes_evaluated: outcome.stats.nodes_evaluated,
            millis,
        })
    });
    rows.into_iter().collect()
}

pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["query_id", "P@k", "AvgP", "nDCG", "nodes_evaluated", "millis"])?;
    for r in rows {
        w.write_record([
            r.query_id.to_string(),
            r.precision.to_string(),
            r.average_precision.to_string(),
            r.ndcg.to_string(),
            r.nodes_evaluated.to_string(),
            r.millis.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
