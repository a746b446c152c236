//! Continuous-time heterogeneous graphs: data model, ingestion and neighborhood queries.
//!
//! Node labels are densified to IDs `0..N` at load time and kept in a side dictionary.
//! Edges form a multigraph: duplicates and self-loops are retained. Each node's
//! incidence list is sorted by timestamp so that temporally valid continuations
//! (timestamp `>=` the previous one) are a suffix of the list.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub type NodeId = u32;

/// A single, optionally timestamped edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub timestamp: Option<i64>,
    pub weight: f64,
    pub edge_type: u32,
}

impl Edge {
    pub fn new(src: NodeId, dst: NodeId) -> Self {
        Edge { src, dst, timestamp: None, weight: 1.0, edge_type: 0 }
    }

    pub fn at(src: NodeId, dst: NodeId, timestamp: i64) -> Self {
        Edge { timestamp: Some(timestamp), ..Edge::new(src, dst) }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }
}

/// One entry in a node's incidence list. `timestamp` is 0 for non-temporal graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Incidence {
    pub neighbor: NodeId,
    pub timestamp: i64,
    pub weight: f64,
    pub edge: u32,
}

/// Neighbors of `origin` reachable through edges with timestamp `>= t_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalNeighborhood {
    pub origin: NodeId,
    pub t_min: Option<i64>,
    pub entries: Vec<NeighborEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborEntry {
    pub neighbor: NodeId,
    pub timestamp: Option<i64>,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DegreeProfile {
    pub total: u32,
    pub in_degree: u32,
    pub out_degree: u32,
}

/// Columns that may appear in an edge-list file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Src,
    Dst,
    Timestamp,
    Weight,
    EdgeType,
    /// Present in the file but ignored.
    Skip,
}

/// Column layout of an edge-list file, e.g. `"src dst timestamp"` or `"src,dst,weight"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSchema {
    columns: Vec<Column>,
}

impl EdgeSchema {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let count = |c: Column| columns.iter().filter(|&&x| x == c).count();
        if count(Column::Src) != 1 || count(Column::Dst) != 1 {
            return Err(Error::validation("schema needs exactly one src and one dst column"));
        }
        for c in [Column::Timestamp, Column::Weight, Column::EdgeType] {
            if count(c) > 1 {
                return Err(Error::validation(format!("column {c:?} repeated in schema")));
            }
        }
        Ok(EdgeSchema { columns })
    }

    /// Parses a whitespace- or comma-separated list of column names.
    pub fn parse(spec: &str) -> Result<Self> {
        let columns = split_fields(spec)
            .map(|name| match name.to_ascii_lowercase().as_str() {
                "src" | "source" => Ok(Column::Src),
                "dst" | "target" => Ok(Column::Dst),
                "timestamp" | "time" | "ts" => Ok(Column::Timestamp),
                "weight" | "w" => Ok(Column::Weight),
                "edge_type" | "type" | "etype" => Ok(Column::EdgeType),
                "_" | "skip" => Ok(Column::Skip),
                other => Err(Error::validation(format!("unknown schema column '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        EdgeSchema::new(columns)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn has(&self, column: Column) -> bool {
        self.columns.contains(&column)
    }
}

impl Default for EdgeSchema {
    fn default() -> Self {
        EdgeSchema { columns: vec![Column::Src, Column::Dst, Column::Timestamp] }
    }
}

impl fmt::Display for EdgeSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Src => "src",
                Column::Dst => "dst",
                Column::Timestamp => "timestamp",
                Column::Weight => "weight",
                Column::EdgeType => "edge_type",
                Column::Skip => "_",
            })
            .collect();
        write!(f, "{}", names.join(" "))
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub schema: EdgeSchema,
    pub directed: bool,
}

/// Maps node label to node-type label, read from `label<TAB>type` lines.
#[derive(Debug, Clone, Default)]
pub struct NodeTypeTable {
    entries: Vec<(String, String)>,
}

impl NodeTypeTable {
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::parse(i + 1, e.to_string()))?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut parts = trimmed.splitn(2, '\t');
            match (parts.next(), parts.next()) {
                (Some(label), Some(ty)) if !label.is_empty() && !ty.trim().is_empty() => {
                    entries.push((label.trim().to_string(), ty.trim().to_string()));
                }
                _ => return Err(Error::parse(i + 1, "expected 'label<TAB>type'")),
            }
        }
        Ok(NodeTypeTable { entries })
    }

    pub fn insert(&mut self, label: impl Into<String>, node_type: impl Into<String>) {
        self.entries.push((label.into(), node_type.into()));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn split_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty())
}

fn parse_timestamp(field: &str, line: usize) -> Result<i64> {
    if let Ok(t) = field.parse::<i64>() {
        return Ok(t);
    }
    // Some dumps write integral timestamps as floats ("1.2e9", "17.0").
    match field.parse::<f64>() {
        Ok(t) if t.is_finite() && t.fract() == 0.0 && t.abs() < 9.0e18 => Ok(t as i64),
        _ => Err(Error::parse(line, format!("invalid timestamp '{field}'"))),
    }
}

/// Dense string interner.
#[derive(Debug, Clone, Default, PartialEq)]
struct Interner {
    labels: Vec<String>,
    index: HashMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, label: &str) -> u32 {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len() as u32;
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    fn from_labels(labels: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i as u32).is_some() {
                return Err(Error::validation(format!("duplicate label '{l}'")));
            }
        }
        Ok(Interner { labels, index })
    }
}

/// Loads an edge list, densifying node labels in order of first appearance.
///
/// Nodes listed only in the type table become isolated nodes appended after the
/// nodes seen in edges. Nodes missing from the type table get type 0.
pub fn load_edge_list<R: BufRead>(
    source: R,
    options: &LoadOptions,
    node_types: Option<&NodeTypeTable>,
) -> Result<TemporalGraph> {
    let schema = &options.schema;
    let temporal = schema.has(Column::Timestamp);
    let mut nodes = Interner::default();
    let mut edge_types = Interner::default();
    let mut edges = Vec::new();

    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = split_fields(trimmed).collect();
        if fields.len() < schema.columns.len() {
            let missing = schema.columns[fields.len()..].iter().find(|c| **c != Column::Skip);
            let message = match missing {
                Some(Column::Timestamp) => "timestamp column missing".to_string(),
                _ => format!("expected {} fields, found {}", schema.columns.len(), fields.len()),
            };
            return Err(Error::parse(lineno, message));
        }

        let (mut src, mut dst) = (None, None);
        let mut edge = Edge::new(0, 0);
        for (column, field) in schema.columns.iter().zip(&fields) {
            match column {
                Column::Src => src = Some(*field),
                Column::Dst => dst = Some(*field),
                Column::Timestamp => edge.timestamp = Some(parse_timestamp(field, lineno)?),
                Column::Weight => {
                    let w: f64 = field
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("invalid weight '{field}'")))?;
                    if !w.is_finite() || w <= 0.0 {
                        return Err(Error::validation(format!(
                            "line {lineno}: weight must be positive, got {w}"
                        )));
                    }
                    edge.weight = w;
                }
                Column::EdgeType => edge.edge_type = edge_types.intern(field),
                Column::Skip => {}
            }
        }
        // Both are guaranteed by EdgeSchema::new.
        edge.src = nodes.intern(src.unwrap());
        edge.dst = nodes.intern(dst.unwrap());
        edges.push(edge);
    }

    let mut type_names = Interner::default();
    let mut type_of: HashMap<u32, u32> = HashMap::new();
    if let Some(table) = node_types {
        for (label, ty) in &table.entries {
            let node = nodes.intern(label);
            let t = type_names.intern(ty);
            type_of.insert(node, t);
        }
    }
    if type_names.labels.is_empty() {
        type_names.intern("default");
    }
    let node_types: Vec<u32> =
        (0..nodes.labels.len() as u32).map(|n| type_of.get(&n).copied().unwrap_or(0)).collect();
    if edge_types.labels.is_empty() {
        edge_types.intern("default");
    }

    TemporalGraph::build(nodes, node_types, type_names, edges, edge_types, options.directed, temporal)
}

/// Immutable temporal heterogeneous multigraph.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraph {
    nodes: Interner,
    node_types: Vec<u32>,
    type_names: Interner,
    edge_types: Interner,
    edges: Vec<Edge>,
    directed: bool,
    temporal: bool,
    offsets: Vec<usize>,
    incidence: Vec<Incidence>,
    degrees: Vec<DegreeProfile>,
}

impl TemporalGraph {
    /// Builds a graph from already-densified parts. Node labels default to the
    /// decimal node ID; all nodes get type 0 unless `node_types` is given.
    pub fn from_edges(
        num_nodes: usize,
        edges: Vec<Edge>,
        directed: bool,
        node_types: Option<Vec<u32>>,
    ) -> Result<Self> {
        let temporal = edges.first().is_some_and(|e| e.timestamp.is_some());
        let labels = (0..num_nodes).map(|i| i.to_string()).collect();
        let node_types = node_types.unwrap_or_else(|| vec![0; num_nodes]);
        let type_count = node_types.iter().max().map_or(1, |&m| m as usize + 1);
        let type_names = (0..type_count).map(|t| format!("type{t}")).collect();
        let edge_type_count = edges.iter().map(|e| e.edge_type).max().map_or(1, |m| m as usize + 1);
        let edge_type_names = (0..edge_type_count).map(|t| format!("etype{t}")).collect();
        TemporalGraph::from_labeled_parts(
            labels,
            node_types,
            type_names,
            edges,
            edge_type_names,
            directed,
            temporal,
        )
    }

    /// Builds a graph from labeled parts; validates every invariant.
    pub fn from_labeled_parts(
        labels: Vec<String>,
        node_types: Vec<u32>,
        type_names: Vec<String>,
        edges: Vec<Edge>,
        edge_type_names: Vec<String>,
        directed: bool,
        temporal: bool,
    ) -> Result<Self> {
        TemporalGraph::build(
            Interner::from_labels(labels)?,
            node_types,
            Interner::from_labels(type_names)?,
            edges,
            Interner::from_labels(edge_type_names)?,
            directed,
            temporal,
        )
    }

    fn build(
        nodes: Interner,
        node_types: Vec<u32>,
        type_names: Interner,
        edges: Vec<Edge>,
        edge_types: Interner,
        directed: bool,
        temporal: bool,
    ) -> Result<Self> {
        let n = nodes.labels.len();
        if node_types.len() != n {
            return Err(Error::validation(format!(
                "node type map covers {} nodes, graph has {n}",
                node_types.len()
            )));
        }
        if type_names.labels.is_empty() {
            return Err(Error::validation("at least one node type is required"));
        }
        if let Some(t) = node_types.iter().find(|&&t| t as usize >= type_names.labels.len()) {
            return Err(Error::validation(format!("node type {t} has no name")));
        }
        if edges.len() > u32::MAX as usize {
            return Err(Error::validation("too many edges"));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.src as usize >= n || e.dst as usize >= n {
                return Err(Error::validation(format!(
                    "edge {i} ({} -> {}) references a node outside 0..{n}",
                    e.src, e.dst
                )));
            }
            if e.timestamp.is_some() != temporal {
                return Err(Error::validation(format!(
                    "edge {i}: timestamps must be present on all edges or on none"
                )));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::validation(format!("edge {i}: weight must be positive")));
            }
            if e.edge_type as usize >= edge_types.labels.len().max(1) {
                return Err(Error::validation(format!("edge {i}: unknown edge type")));
            }
        }

        let mut degrees = vec![DegreeProfile::default(); n];
        let mut counts = vec![0usize; n];
        for e in &edges {
            degrees[e.src as usize].out_degree += 1;
            degrees[e.dst as usize].in_degree += 1;
            counts[e.src as usize] += 1;
            if !directed {
                counts[e.dst as usize] += 1;
            }
        }
        for d in &mut degrees {
            d.total = d.in_degree + d.out_degree;
            if !directed {
                d.in_degree = d.total;
                d.out_degree = d.total;
            }
        }

        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let mut cursor = offsets[..n].to_vec();
        let empty = Incidence { neighbor: 0, timestamp: 0, weight: 0.0, edge: 0 };
        let mut incidence = vec![empty; offsets[n]];
        let mut place = |from: NodeId, to: NodeId, e: &Edge, idx: usize| {
            let slot = &mut cursor[from as usize];
            incidence[*slot] = Incidence {
                neighbor: to,
                timestamp: e.timestamp.unwrap_or(0),
                weight: e.weight,
                edge: idx as u32,
            };
            *slot += 1;
        };
        for (idx, e) in edges.iter().enumerate() {
            place(e.src, e.dst, e, idx);
            if !directed {
                place(e.dst, e.src, e, idx);
            }
        }
        for u in 0..n {
            // Stable: ties keep edge order.
            incidence[offsets[u]..offsets[u + 1]].sort_by_key(|inc| inc.timestamp);
        }

        Ok(TemporalGraph {
            nodes,
            node_types,
            type_names,
            edge_types,
            edges,
            directed,
            temporal,
            offsets,
            incidence,
            degrees,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_node_types(&self) -> usize {
        self.type_names.labels.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn is_temporal(&self) -> bool {
        self.temporal
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_type(&self, u: NodeId) -> u32 {
        self.node_types[u as usize]
    }

    pub fn node_types(&self) -> &[u32] {
        &self.node_types
    }

    pub fn node_type_names(&self) -> &[String] {
        &self.type_names.labels
    }

    pub fn edge_type_names(&self) -> &[String] {
        &self.edge_types.labels
    }

    pub fn label(&self, u: NodeId) -> &str {
        &self.nodes.labels[u as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.nodes.labels
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.nodes.index.get(label).copied()
    }

    /// Resolves a label, failing with a domain error when absent.
    pub fn require_node(&self, label: &str) -> Result<NodeId> {
        self.node_id(label).ok_or_else(|| Error::Domain(format!("unknown node '{label}'")))
    }

    pub fn check_node(&self, u: NodeId) -> Result<()> {
        if (u as usize) < self.num_nodes() {
            Ok(())
        } else {
            Err(Error::Domain(format!("node {u} out of range 0..{}", self.num_nodes())))
        }
    }

    /// `(min, max)` edge timestamp, or `None` for non-temporal or edgeless graphs.
    pub fn timestamp_range(&self) -> Option<(i64, i64)> {
        let mut it = self.edges.iter().filter_map(|e| e.timestamp);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), t| (lo.min(t), hi.max(t))))
    }

    pub(crate) fn incidence(&self, u: NodeId) -> &[Incidence] {
        let u = u as usize;
        &self.incidence[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Incidence entries of `u` with timestamp `>= t_min` (all of them when non-temporal).
    pub(crate) fn incidence_from(&self, u: NodeId, t_min: i64) -> &[Incidence] {
        let all = self.incidence(u);
        if !self.temporal {
            return all;
        }
        let start = all.partition_point(|inc| inc.timestamp < t_min);
        &all[start..]
    }

    /// Edges leaving `u` (both directions when undirected) with timestamp `>= t_min`.
    /// `None` means no lower bound; non-temporal graphs ignore the bound.
    pub fn temporal_neighbors(&self, u: NodeId, t_min: Option<i64>) -> Result<TemporalNeighborhood> {
        self.check_node(u)?;
        let entries = self
            .incidence_from(u, t_min.unwrap_or(i64::MIN))
            .iter()
            .map(|inc| NeighborEntry {
                neighbor: inc.neighbor,
                timestamp: self.temporal.then_some(inc.timestamp),
                weight: inc.weight,
            })
            .collect();
        Ok(TemporalNeighborhood { origin: u, t_min, entries })
    }

    pub fn degree_profile(&self, u: NodeId) -> Result<DegreeProfile> {
        self.check_node(u)?;
        Ok(self.degrees[u as usize])
    }

    pub(crate) fn degrees(&self) -> &[DegreeProfile] {
        &self.degrees
    }

    /// Writes edges as `src dst [timestamp] weight edge_type` using node labels.
    /// Reload with [`TemporalGraph::canonical_schema`].
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.edges {
            write!(out, "{} {}", self.label(e.src), self.label(e.dst))?;
            if let Some(t) = e.timestamp {
                write!(out, " {t}")?;
            }
            writeln!(out, " {} {}", e.weight, self.edge_types.labels[e.edge_type as usize])?;
        }
        Ok(())
    }

    /// Writes every node as a `label<TAB>type` line.
    pub fn write_node_types<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (label, &t) in self.nodes.labels.iter().zip(&self.node_types) {
            writeln!(out, "{label}\t{}", self.type_names.labels[t as usize])?;
        }
        Ok(())
    }

    pub fn canonical_schema(&self) -> EdgeSchema {
        let mut columns = vec![Column::Src, Column::Dst];
        if self.temporal {
            columns.push(Column::Timestamp);
        }
        columns.extend([Column::Weight, Column::EdgeType]);
        EdgeSchema { columns }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, schema: &str, directed: bool) -> Result<TemporalGraph> {
        let options = LoadOptions { schema: EdgeSchema::parse(schema)?, directed };
        load_edge_list(text.as_bytes(), &options, None)
    }

    #[test]
    fn loads_three_line_temporal_file() {
        let g = load("a b 1\na c 2\nb c 3\n", "src dst timestamp", true).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 3);
        assert!(g.is_temporal());
        assert_eq!(g.node_id("c"), Some(2));
    }

    #[test]
    fn empty_file_gives_empty_graph() {
        let g = load("", "src dst timestamp", false).unwrap();
        assert_eq!((g.num_nodes(), g.num_edges()), (0, 0));
        assert_eq!(g.num_node_types(), 1);
    }

    #[test]
    fn node_type_table_makes_bipartite_graph() {
        let table = NodeTypeTable::parse("a\tauthor\nb\tvenue\n".as_bytes()).unwrap();
        let options = LoadOptions { schema: EdgeSchema::parse("src dst").unwrap(), directed: false };
        let g = load_edge_list("a b\n".as_bytes(), &options, Some(&table)).unwrap();
        assert_eq!(g.num_node_types(), 2);
        assert_eq!(g.node_type_names(), &["author".to_string(), "venue".to_string()]);
        let a = g.node_id("a").unwrap();
        let b = g.node_id("b").unwrap();
        assert_eq!(g.node_type(a), 0);
        assert_eq!(g.node_type(b), 1);
        assert!(!g.is_temporal());
        assert_eq!(g.edges()[0], Edge::new(a, b));
    }

    #[test]
    fn comments_commas_and_multiedges() {
        let g = load("# header\nx,y,1\nx,y,1\n\ny,y,2\n", "src,dst,timestamp", false).unwrap();
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.degree_profile(1).unwrap().total, 4);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = load("a b 1\na c\n", "src dst timestamp", false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("timestamp"));
        let err = load("a b x\n", "src dst timestamp", false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = load("a b -2\n", "src dst weight", false).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn float_timestamps_are_accepted_when_integral() {
        let g = load("a b 17.0\n", "src dst timestamp", true).unwrap();
        assert_eq!(g.edges()[0].timestamp, Some(17));
        assert!(load("a b 1.5\n", "src dst timestamp", true).is_err());
    }

    #[test]
    fn temporal_neighbors_filters_by_time() {
        let g = TemporalGraph::from_edges(3, vec![Edge::at(0, 1, 1), Edge::at(0, 2, 3)], true, None)
            .unwrap();
        let nb = g.temporal_neighbors(0, Some(2)).unwrap();
        assert_eq!(nb.entries, vec![NeighborEntry { neighbor: 2, timestamp: Some(3), weight: 1.0 }]);
        assert!(g.temporal_neighbors(0, Some(4)).unwrap().entries.is_empty());
        assert_eq!(g.temporal_neighbors(0, None).unwrap().entries.len(), 2);
        assert!(matches!(g.temporal_neighbors(7, None), Err(Error::Domain(_))));
    }

    #[test]
    fn non_temporal_graph_ignores_t_min() {
        let g = TemporalGraph::from_edges(3, vec![Edge::new(0, 1), Edge::new(2, 0)], false, None)
            .unwrap();
        let nb = g.temporal_neighbors(0, Some(1_000)).unwrap();
        let mut ids: Vec<_> = nb.entries.iter().map(|e| e.neighbor).collect();
        ids.sort();
        assert_eq!(ids, vec![1, 2]);
    }

    #[test]
    fn degree_profiles() {
        let star = TemporalGraph::from_edges(
            5,
            (1..5).map(|v| Edge::new(0, v)).collect(),
            false,
            None,
        )
        .unwrap();
        let d = star.degree_profile(0).unwrap();
        assert_eq!((d.total, d.in_degree, d.out_degree), (4, 4, 4));

        let g = TemporalGraph::from_edges(4, vec![Edge::new(0, 1), Edge::new(2, 0)], true, None)
            .unwrap();
        let d = g.degree_profile(0).unwrap();
        assert_eq!((d.total, d.in_degree, d.out_degree), (2, 1, 1));
        assert_eq!(g.degree_profile(3).unwrap(), DegreeProfile::default());
    }

    #[test]
    fn rejects_invalid_parts() {
        assert!(TemporalGraph::from_edges(1, vec![Edge::new(0, 1)], true, None).is_err());
        let mixed = vec![Edge::at(0, 1, 1), Edge::new(1, 0)];
        assert!(TemporalGraph::from_edges(2, mixed, true, None).is_err());
        let zero = vec![Edge::new(0, 1).with_weight(0.0)];
        assert!(TemporalGraph::from_edges(2, zero, true, None).is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        let table = NodeTypeTable::parse("a\tuser\nc\tip\nz\tip\n".as_bytes()).unwrap();
        let options = LoadOptions {
            schema: EdgeSchema::parse("src dst timestamp weight edge_type").unwrap(),
            directed: true,
        };
        let text = "a b 5 2.5 click\nb c 3 1 view\na b 5 2.5 click\n";
        let g = load_edge_list(text.as_bytes(), &options, Some(&table)).unwrap();
        assert_eq!(g.num_nodes(), 4);

        let mut edges = Vec::new();
        g.write_edge_list(&mut edges).unwrap();
        let mut types = Vec::new();
        g.write_node_types(&mut types).unwrap();
        let table2 = NodeTypeTable::parse(types.as_slice()).unwrap();
        let options2 = LoadOptions { schema: g.canonical_schema(), directed: true };
        let g2 = load_edge_list(edges.as_slice(), &options2, Some(&table2)).unwrap();
        assert_eq!(g2.num_nodes(), g.num_nodes());
        assert_eq!(g2.edges(), g.edges());
        assert_eq!(g2.labels(), g.labels());
        let names = |g: &TemporalGraph| -> Vec<String> {
            (0..g.num_nodes() as u32)
                .map(|u| g.node_type_names()[g.node_type(u) as usize].clone())
                .collect()
        };
        assert_eq!(names(&g2), names(&g));
    }
}
