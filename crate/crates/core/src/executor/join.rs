//! Hash-join evaluation of query graphs.
//!
//! Answers of a query graph are kept as a flat table: one column per bound
//! MQG node, one row per answer graph. Extending a table by an edge probes
//! the label's subject or object index with the already bound endpoint;
//! when both endpoints are bound it degenerates to a membership filter.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lattice::EdgeSet;
use crate::mqg::MaximalQueryGraph;
use crate::par;
use crate::store::{DataGraph, EntityId, LabelTable};

#[derive(Debug, Clone, Copy)]
pub struct JoinConfig {
    /// Largest intermediate table allowed before giving up.
    pub row_limit: usize,
    pub parallel: bool,
}

impl Default for JoinConfig {
    fn default() -> Self {
        Self {
            row_limit: 2_000_000,
            parallel: true,
        }
    }
}

/// Materialized answer graphs of one query graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnswerTable {
    columns: Vec<usize>,
    rows: Vec<EntityId>,
}

impl AnswerTable {
    /// MQG node of each column, in binding order.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        if self.columns.is_empty() {
            0
        } else {
            self.rows.len() / self.columns.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[EntityId] {
        let w = self.columns.len();
        &self.rows[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[EntityId]> {
        self.rows.chunks(self.columns.len().max(1))
    }

    pub fn column_of(&self, node: usize) -> Option<usize> {
        self.columns.iter().position(|&c| c == node)
    }

    /// Every answer graph as a node-to-entity map.
    pub fn mappings(&self) -> Vec<BTreeMap<usize, EntityId>> {
        self.rows()
            .map(|row| self.columns.iter().copied().zip(row.iter().copied()).collect())
            .collect()
    }

    /// Projection of row `i` onto the query nodes, in query-position order.
    pub fn project(&self, i: usize, query_nodes: &[usize]) -> Vec<EntityId> {
        let row = self.row(i);
        query_nodes
            .iter()
            .map(|&q| row[self.column_of(q).expect("query node is bound")])
            .collect()
    }

    /// Drops answer graphs whose query-node projection equals one of
    /// `excluded` (the input tuples match themselves trivially).
    pub fn without_tuples(mut self, query_nodes: &[usize], excluded: &[Vec<EntityId>]) -> Self {
        if excluded.is_empty() || self.is_empty() {
            return self;
        }
        let positions: Vec<usize> = query_nodes
            .iter()
            .map(|&q| self.column_of(q).expect("query node is bound"))
            .collect();
        let w = self.columns.len();
        let mut kept = Vec::with_capacity(self.rows.len());
        for row in self.rows.chunks(w) {
            let is_input = excluded
                .iter()
                .any(|t| positions.iter().zip(t).all(|(&p, &e)| row[p] == e));
            if !is_input {
                kept.extend_from_slice(row);
            }
        }
        self.rows = kept;
        self
    }
}

fn label_table<'g>(graph: &'g DataGraph, mqg: &MaximalQueryGraph, edge: usize) -> Option<&'g LabelTable> {
    let label = mqg.edges()[edge].label;
    (label.index() < graph.label_count()).then(|| graph.table(label))
}

/// Joins `table` with the data edges matching MQG edge `edge`.
pub fn extend(
    graph: &DataGraph,
    mqg: &MaximalQueryGraph,
    table: &AnswerTable,
    edge: usize,
    config: &JoinConfig,
) -> Result<AnswerTable> {
    let e = &mqg.edges()[edge];
    let (src_col, dst_col) = (table.column_of(e.src), table.column_of(e.dst));
    let Some(data) = label_table(graph, mqg, edge) else {
        let mut columns = table.columns.clone();
        columns.extend([e.src, e.dst].into_iter().filter(|v| !table.columns.contains(v)));
        return Ok(AnswerTable { columns, rows: Vec::new() });
    };

    if table.columns.is_empty() {
        let rows: Vec<EntityId> = data.rows().iter().flat_map(|&(s, o)| [s, o]).collect();
        check_limit(rows.len() / 2, config)?;
        return Ok(AnswerTable {
            columns: vec![e.src, e.dst],
            rows,
        });
    }

    let w = table.columns.len();
    let (columns, rows) = match (src_col, dst_col) {
        (Some(s), Some(o)) => {
            let rows = par::expand_rows(&table.rows, w, config.parallel, |row, out| {
                if data.contains(row[s], row[o]) {
                    out.extend_from_slice(row);
                }
            });
            (table.columns.clone(), rows)
        }
        (Some(s), None) => {
            let rows = par::expand_rows(&table.rows, w, config.parallel, |row, out| {
                for &obj in data.objects_of(row[s]) {
                    if !row.contains(&obj) {
                        out.extend_from_slice(row);
                        out.push(obj);
                    }
                }
            });
            (with_column(&table.columns, e.dst), rows)
        }
        (None, Some(o)) => {
            let rows = par::expand_rows(&table.rows, w, config.parallel, |row, out| {
                for &subj in data.subjects_of(row[o]) {
                    if !row.contains(&subj) {
                        out.extend_from_slice(row);
                        out.push(subj);
                    }
                }
            });
            (with_column(&table.columns, e.src), rows)
        }
        (None, None) => {
            return Err(Error::Internal(format!(
                "edge {edge} shares no node with the bound columns {:?}",
                table.columns
            )))
        }
    };
    check_limit(rows.len() / columns.len(), config)?;
    Ok(AnswerTable { columns, rows })
}

fn with_column(columns: &[usize], node: usize) -> Vec<usize> {
    let mut c = columns.to_vec();
    c.push(node);
    c
}

fn check_limit(rows: usize, config: &JoinConfig) -> Result<()> {
    if rows > config.row_limit {
        Err(Error::RowLimit {
            limit: config.row_limit,
        })
    } else {
        Ok(())
    }
}

/// Evaluates a connected query graph from scratch: a chain of joins in
/// breadth-first edge order starting at the first query node.
pub fn evaluate_chain(
    graph: &DataGraph,
    mqg: &MaximalQueryGraph,
    q: EdgeSet,
    config: &JoinConfig,
) -> Result<AnswerTable> {
    let mut table = AnswerTable::default();
    let mut bound: u128 = 1u128 << mqg.query_nodes()[0];
    let mut remaining = q;
    while !remaining.is_empty() {
        let next = remaining
            .iter()
            .find(|&i| {
                let e = &mqg.edges()[i];
                bound >> e.src & 1 == 1 || bound >> e.dst & 1 == 1
            })
            .ok_or_else(|| Error::Internal(format!("query graph {q} is not connected")))?;
        table = extend(graph, mqg, &table, next, config)?;
        let e = &mqg.edges()[next];
        bound |= 1u128 << e.src | 1u128 << e.dst;
        remaining = remaining.without(next);
        if table.is_empty() {
            // Bind the rest of the columns so projections stay well formed.
            for i in remaining.iter() {
                let e = &mqg.edges()[i];
                for v in [e.src, e.dst] {
                    if !table.columns.contains(&v) {
                        table.columns.push(v);
                    }
                }
            }
            break;
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mqg::QueryNode;
    use crate::store::LabelId;

    fn setup() -> (DataGraph, MaximalQueryGraph) {
        let g = DataGraph::from_triples([
            ("a", "r", "b"),
            ("a", "r", "c"),
            ("c", "s", "b"),
            ("d", "r", "e"),
            ("e", "s", "d"),
        ])
        .unwrap();
        let (a, b, c) = (g.entity("a").unwrap(), g.entity("b").unwrap(), g.entity("c").unwrap());
        let (r, s) = (g.label("r").unwrap(), g.label("s").unwrap());
        // x -r-> y, z -s-> y, x -r-> z
        let m = MaximalQueryGraph::from_parts(
            vec![QueryNode::Entity(a), QueryNode::Entity(b), QueryNode::Entity(c)],
            vec![0],
            vec![vec![a]],
            vec![(0, r, 1, 1.0), (2, s, 1, 1.0), (0, r, 2, 1.0)],
        )
        .unwrap();
        (g, m)
    }

    #[test]
    fn chain_enforces_injectivity() {
        let (g, m) = setup();
        let t = evaluate_chain(&g, &m, m.all_edges(), &JoinConfig::default()).unwrap();
        // x=a, y=b, z=c is the only injective match; d/e would need x=d, z=e, y=d.
        assert_eq!(t.len(), 1);
        let row = t.mappings().pop().unwrap();
        assert_eq!(g.entity_name(row[&0]), "a");
        assert_eq!(g.entity_name(row[&1]), "b");
        assert_eq!(g.entity_name(row[&2]), "c");
    }

    #[test]
    fn missing_label_gives_empty_table() {
        let (g, _) = setup();
        let a = g.entity("a").unwrap();
        let m = MaximalQueryGraph::from_parts(
            vec![QueryNode::Entity(a), QueryNode::Entity(g.entity("b").unwrap())],
            vec![0],
            vec![vec![a]],
            vec![(0, LabelId(99), 1, 1.0)],
        )
        .unwrap();
        assert!(evaluate_chain(&g, &m, m.all_edges(), &JoinConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn row_limit_is_enforced() {
        let (g, m) = setup();
        let config = JoinConfig {
            row_limit: 1,
            parallel: false,
        };
        assert!(matches!(
            evaluate_chain(&g, &m, EdgeSet::single(0), &config),
            Err(Error::RowLimit { limit: 1 })
        ));
    }
}
