//! Vertically partitioned, in-memory data graph.
//!
//! Every distinct edge label owns a two-column `(subj, obj)` table with two
//! hash indexes on it, one keyed on the subject and one on the object. The
//! whole graph is hashed this way at load time, together with the label
//! statistics that the edge weighting needs (`ief` per label, participation
//! degree per edge).

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense handle of an entity, `0..entity_count()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityId(pub u32);

/// Dense handle of an edge label, `0..label_count()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabelId(pub u32);

/// Index into [`DataGraph::edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl LabelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subj: EntityId,
    pub label: LabelId,
    pub obj: EntityId,
}

impl Triple {
    /// The endpoint across the edge from `v`.
    pub fn other(&self, v: EntityId) -> EntityId {
        if self.subj == v {
            self.obj
        } else {
            self.subj
        }
    }
}

/// One vertical partition: all edges carrying a single label.
#[derive(Debug, Default)]
pub struct LabelTable {
    rows: Vec<(EntityId, EntityId)>,
    by_subj: HashMap<EntityId, Vec<EntityId>>,
    by_obj: HashMap<EntityId, Vec<EntityId>>,
    pairs: HashSet<(EntityId, EntityId)>,
}

impl LabelTable {
    pub fn rows(&self) -> &[(EntityId, EntityId)] {
        &self.rows
    }

    /// Objects of all edges leaving `subj`.
    pub fn objects_of(&self, subj: EntityId) -> &[EntityId] {
        self.by_subj.get(&subj).map_or(&[], Vec::as_slice)
    }

    /// Subjects of all edges entering `obj`.
    pub fn subjects_of(&self, obj: EntityId) -> &[EntityId] {
        self.by_obj.get(&obj).map_or(&[], Vec::as_slice)
    }

    pub fn contains(&self, subj: EntityId, obj: EntityId) -> bool {
        self.pairs.contains(&(subj, obj))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn push(&mut self, subj: EntityId, obj: EntityId) {
        self.rows.push((subj, obj));
        self.by_subj.entry(subj).or_default().push(obj);
        self.by_obj.entry(obj).or_default().push(subj);
        self.pairs.insert((subj, obj));
    }
}

/// Immutable, fully indexed data graph.
pub struct DataGraph {
    entity_names: Vec<String>,
    entity_lookup: HashMap<String, EntityId>,
    label_names: Vec<String>,
    label_lookup: HashMap<String, LabelId>,
    edges: Vec<Triple>,
    edge_lookup: HashMap<Triple, EdgeId>,
    tables: Vec<LabelTable>,
    ief: Vec<f64>,
    incident: Vec<Vec<EdgeId>>,
    // (lowercased name, id), sorted; backs prefix search.
    name_index: Vec<(String, EntityId)>,
}

impl fmt::Debug for DataGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DataGraph")
            .field("entities", &self.entity_names.len())
            .field("labels", &self.label_names.len())
            .field("edges", &self.edges.len())
            .finish()
    }
}

impl DataGraph {
    /// Parses the tab-separated triple format: `subject\tlabel\tobject`, one
    /// per line. Blank lines and lines starting with `#` are skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut raw = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            }
            if fields.iter().any(|f| f.trim().is_empty()) {
                return Err(Error::Parse {
                    line: line_no,
                    message: "empty field".to_string(),
                });
            }
            if fields[0] == fields[2] {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("self-loop on `{}`", fields[0]),
                });
            }
            raw.push((fields[0].to_string(), fields[1].to_string(), fields[2].to_string()));
        }
        Self::build(raw)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    /// Builds a graph from in-memory `(subject, label, object)` triples.
    pub fn from_triples<I, S>(triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, S)>,
        S: Into<String>,
    {
        let mut raw = Vec::new();
        for (idx, (s, l, o)) in triples.into_iter().enumerate() {
            let (s, l, o) = (s.into(), l.into(), o.into());
            if s.is_empty() || l.is_empty() || o.is_empty() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "empty field".to_string(),
                });
            }
            if s == o {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("self-loop on `{s}`"),
                });
            }
            raw.push((s, l, o));
        }
        Self::build(raw)
    }

    fn build(raw: Vec<(String, String, String)>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyGraph);
        }
        // Ids follow sorted name order so any row permutation of the same
        // triple set produces the identical graph.
        let names: BTreeSet<&str> = raw
            .iter()
            .flat_map(|(s, _, o)| [s.as_str(), o.as_str()])
            .collect();
        let labels: BTreeSet<&str> = raw.iter().map(|(_, l, _)| l.as_str()).collect();

        let entity_names: Vec<String> = names.into_iter().map(str::to_string).collect();
        let label_names: Vec<String> = labels.into_iter().map(str::to_string).collect();
        let entity_lookup: HashMap<String, EntityId> = entity_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), EntityId(i as u32)))
            .collect();
        let label_lookup: HashMap<String, LabelId> = label_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), LabelId(i as u32)))
            .collect();

        let triples: BTreeSet<Triple> = raw
            .iter()
            .map(|(s, l, o)| Triple {
                subj: entity_lookup[s],
                label: label_lookup[l],
                obj: entity_lookup[o],
            })
            .collect();
        let edges: Vec<Triple> = triples.into_iter().collect();

        let mut tables: Vec<LabelTable> = (0..label_names.len()).map(|_| LabelTable::default()).collect();
        let mut incident = vec![Vec::new(); entity_names.len()];
        let mut edge_lookup = HashMap::with_capacity(edges.len());
        for (i, t) in edges.iter().enumerate() {
            let id = EdgeId(i as u32);
            tables[t.label.index()].push(t.subj, t.obj);
            incident[t.subj.index()].push(id);
            incident[t.obj.index()].push(id);
            edge_lookup.insert(*t, id);
        }
        let total = edges.len() as f64;
        let ief = tables.iter().map(|t| (total / t.len() as f64).ln()).collect();

        let mut name_index: Vec<(String, EntityId)> = entity_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.to_lowercase(), EntityId(i as u32)))
            .collect();
        name_index.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| entity_names[a.1.index()].cmp(&entity_names[b.1.index()])));

        Ok(Self {
            entity_names,
            entity_lookup,
            label_names,
            label_lookup,
            edges,
            edge_lookup,
            tables,
            ief,
            incident,
            name_index,
        })
    }

    pub fn entity_count(&self) -> usize {
        self.entity_names.len()
    }

    pub fn label_count(&self) -> usize {
        self.label_names.len()
    }

    /// Total number of edges, |E(G)|.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Triple] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Triple {
        self.edges[id.index()]
    }

    pub fn edge_id(&self, triple: &Triple) -> Option<EdgeId> {
        self.edge_lookup.get(triple).copied()
    }

    /// Edges incident on `v` in either direction.
    pub fn incident(&self, v: EntityId) -> &[EdgeId] {
        &self.incident[v.index()]
    }

    pub fn entity(&self, name: &str) -> Option<EntityId> {
        self.entity_lookup.get(name).copied()
    }

    pub fn label(&self, name: &str) -> Option<LabelId> {
        self.label_lookup.get(name).copied()
    }

    pub fn entity_name(&self, id: EntityId) -> &str {
        &self.entity_names[id.index()]
    }

    pub fn label_name(&self, id: LabelId) -> &str {
        &self.label_names[id.index()]
    }

    pub fn table(&self, label: LabelId) -> &LabelTable {
        &self.tables[label.index()]
    }

    /// Number of edges carrying `label`.
    pub fn label_frequency(&self, label: LabelId) -> usize {
        self.tables[label.index()].len()
    }

    /// Inverse edge label frequency, `ln(|E(G)| / #label)`.
    pub fn ief(&self, label: LabelId) -> Result<f64> {
        self.ief
            .get(label.index())
            .copied()
            .ok_or_else(|| Error::UnknownLabel(format!("#{}", label.0)))
    }

    /// Participation degree: edges sharing `triple`'s label and its subject
    /// or its object, the edge itself included.
    pub fn participation(&self, triple: &Triple) -> Result<usize> {
        if !self.edge_lookup.contains_key(triple) {
            return Err(self.unknown_edge(triple));
        }
        let table = self.table(triple.label);
        // Both index lists contain the edge itself; duplicates are collapsed
        // at load, so it is the only edge counted twice.
        Ok(table.objects_of(triple.subj).len() + table.subjects_of(triple.obj).len() - 1)
    }

    /// Discovery weight of an edge, `ief / p`.
    pub fn edge_weight(&self, triple: &Triple) -> Result<f64> {
        Ok(self.ief(triple.label)? / self.participation(triple)? as f64)
    }

    /// Case-insensitive prefix search over entity names, in name order.
    pub fn autocomplete(&self, prefix: &str, limit: usize) -> Vec<(EntityId, &str)> {
        let needle = prefix.to_lowercase();
        let start = self.name_index.partition_point(|(lower, _)| lower.as_str() < needle.as_str());
        self.name_index[start..]
            .iter()
            .take_while(|(lower, _)| lower.starts_with(&needle))
            .take(limit)
            .map(|&(_, id)| (id, self.entity_name(id)))
            .collect()
    }

    /// Renders a triple in the on-disk format, without the newline.
    pub fn format_triple(&self, triple: &Triple) -> String {
        format!(
            "{}\t{}\t{}",
            self.entity_name(triple.subj),
            self.label_name(triple.label),
            self.entity_name(triple.obj)
        )
    }

    fn unknown_edge(&self, triple: &Triple) -> Error {
        let name = |id: EntityId| self.entity_names.get(id.index()).cloned().unwrap_or_else(|| format!("#{}", id.0));
        Error::UnknownEdge {
            subj: name(triple.subj),
            label: self
                .label_names
                .get(triple.label.index())
                .cloned()
                .unwrap_or_else(|| format!("#{}", triple.label.0)),
            obj: name(triple.obj),
        }
    }
}

/// An ordered list of pairwise distinct entities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tuple(Vec<EntityId>);

impl Tuple {
    pub fn new(entities: Vec<EntityId>) -> Result<Self> {
        if entities.is_empty() {
            return Err(Error::InvalidTuple("a tuple needs at least one entity".into()));
        }
        let distinct: HashSet<_> = entities.iter().collect();
        if distinct.len() != entities.len() {
            return Err(Error::InvalidTuple("tuple entities must be pairwise distinct".into()));
        }
        Ok(Self(entities))
    }

    /// Resolves entity names exactly.
    pub fn resolve<S: AsRef<str>>(graph: &DataGraph, names: &[S]) -> Result<Self> {
        let ids = names
            .iter()
            .map(|n| graph.entity(n.as_ref()).ok_or_else(|| Error::UnknownEntity(n.as_ref().to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ids)
    }

    pub fn entities(&self) -> &[EntityId] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, v: EntityId) -> bool {
        self.0.contains(&v)
    }

    pub fn names<'g>(&self, graph: &'g DataGraph) -> Vec<&'g str> {
        self.0.iter().map(|&v| graph.entity_name(v)).collect()
    }
}
