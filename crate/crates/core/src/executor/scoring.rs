//! Structure and content scores of answer graphs.

use crate::lattice::EdgeSet;
use crate::mqg::{MaximalQueryGraph, QueryNode};
use crate::store::EntityId;

/// Total scoring weight of the query graph's edges.
pub fn s_score(mqg: &MaximalQueryGraph, q: EdgeSet) -> f64 {
    mqg.total_weight(q)
}

/// Whether `entity` is the node itself; a virtual node matches any entity
/// it stands for.
pub fn is_identical(mqg: &MaximalQueryGraph, node: usize, entity: EntityId) -> bool {
    match mqg.nodes()[node] {
        QueryNode::Entity(e) => e == entity,
        QueryNode::Virtual(j) => mqg.anchors(j).contains(&entity),
    }
}

/// Credit for one query edge whose endpoints map to `fu` and `fv`.
///
/// An identical endpoint earns `w / |E(u)|`; two identical endpoints earn
/// `w / min(|E(u)|, |E(v)|)`. Degrees are counted in the MQG.
pub fn match_credit(mqg: &MaximalQueryGraph, edge: usize, fu: EntityId, fv: EntityId) -> f64 {
    let e = &mqg.edges()[edge];
    let (iu, iv) = (is_identical(mqg, e.src, fu), is_identical(mqg, e.dst, fv));
    let (du, dv) = (mqg.degree(e.src) as f64, mqg.degree(e.dst) as f64);
    match (iu, iv) {
        (true, true) => e.weight / du.min(dv),
        (true, false) => e.weight / du,
        (false, true) => e.weight / dv,
        (false, false) => 0.0,
    }
}

/// Content score of one answer graph of `q`, given as the bound `columns`
/// and the matching `row` of entities.
pub fn c_score(mqg: &MaximalQueryGraph, q: EdgeSet, columns: &[usize], row: &[EntityId]) -> f64 {
    let value = |node: usize| row[columns.iter().position(|&c| c == node).expect("node is bound")];
    q.iter()
        .map(|i| {
            let e = &mqg.edges()[i];
            match_credit(mqg, i, value(e.src), value(e.dst))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::LabelId;

    #[test]
    fn single_identical_endpoint_divides_by_its_degree() {
        let ids: Vec<EntityId> = (0..4).map(EntityId).collect();
        let m = MaximalQueryGraph::from_parts(
            ids.iter().map(|&e| QueryNode::Entity(e)).collect(),
            vec![0],
            vec![vec![ids[0]]],
            vec![(0, LabelId(0), 1, 1.5), (2, LabelId(1), 1, 1.0), (3, LabelId(2), 1, 1.0), (0, LabelId(3), 3, 1.0)],
        )
        .unwrap();
        assert_eq!(m.degree(1), 3);
        // u -> some other entity, v -> itself
        assert_eq!(match_credit(&m, 0, EntityId(9), ids[1]), 1.5 / 3.0);
        assert_eq!(match_credit(&m, 0, EntityId(9), EntityId(8)), 0.0);
        assert_eq!(match_credit(&m, 0, ids[0], ids[1]), 1.5 / 2.0);
    }
}
