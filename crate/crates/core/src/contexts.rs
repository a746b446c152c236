//! Temporal contexts and the type- and feature-conditioned histograms built from them.
//!
//! The context of `u` at distance `dt` is the multiset of nodes found exactly `dt`
//! positions away from an occurrence of `u` in some walk (in either direction).
//! Histograms replace each context member by its binned feature values and count
//! them in the block of the member's node type.
//!
//! [`ContextStore`] materializes contexts and is meant for inspection and small
//! graphs. The embedding pipeline uses [`HistogramTable`], which adds every in-walk
//! pair straight into the owner's histogram and never stores contexts.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{BinningScheme, FeatureMatrix};
use crate::graph::{NodeId, TemporalGraph};
use crate::walks::{edge_rng, Walk, WalkCorpus, WalkParams, WalkSampler};

/// Multiset contexts `C_u^dt` for `dt` in `1..=max_dt`, as node -> multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextStore {
    max_dt: usize,
    contexts: Vec<Vec<BTreeMap<NodeId, u32>>>,
}

impl ContextStore {
    pub fn max_dt(&self) -> usize {
        self.max_dt
    }

    pub fn num_nodes(&self) -> usize {
        self.contexts.len()
    }

    /// Context of `u` at distance `dt` (1-based).
    pub fn context(&self, u: NodeId, dt: usize) -> &BTreeMap<NodeId, u32> {
        &self.contexts[u as usize][dt - 1]
    }

    /// Number of members of `C_u^dt`, counting multiplicity.
    pub fn context_size(&self, u: NodeId, dt: usize) -> u64 {
        self.context(u, dt).values().map(|&c| c as u64).sum()
    }
}

fn check_max_dt(max_dt: usize) -> Result<()> {
    if max_dt == 0 {
        return Err(Error::validation("max temporal distance must be at least 1"));
    }
    Ok(())
}

/// Collects contexts from every walk of the corpus.
pub fn extract_contexts(corpus: &WalkCorpus, num_nodes: usize, max_dt: usize) -> Result<ContextStore> {
    extract_contexts_from_walks(&corpus.walks, num_nodes, max_dt)
}

pub fn extract_contexts_from_walks(walks: &[Walk], num_nodes: usize, max_dt: usize) -> Result<ContextStore> {
    check_max_dt(max_dt)?;
    let mut contexts = vec![vec![BTreeMap::new(); max_dt]; num_nodes];
    for walk in walks {
        if let Some(&bad) = walk.nodes.iter().find(|&&v| v as usize >= num_nodes) {
            return Err(Error::Domain(format!("walk visits node {bad} outside 0..{num_nodes}")));
        }
        let nodes = &walk.nodes;
        for i in 0..nodes.len() {
            for dt in 1..=max_dt {
                let Some(&v) = nodes.get(i + dt) else { break };
                let u = nodes[i];
                *contexts[u as usize][dt - 1].entry(v).or_insert(0) += 1;
                *contexts[v as usize][dt - 1].entry(u).or_insert(0) += 1;
            }
        }
    }
    Ok(ContextStore { max_dt, contexts })
}

/// A context member after replacing its ID by its feature row.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextMember {
    pub node_type: u32,
    pub values: Vec<f64>,
    pub multiplicity: u32,
}

/// Contexts with node IDs replaced by feature tuples (node type kept alongside).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureContextStore {
    max_dt: usize,
    num_features: usize,
    members: Vec<Vec<Vec<ContextMember>>>,
}

impl FeatureContextStore {
    pub fn max_dt(&self) -> usize {
        self.max_dt
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn context(&self, u: NodeId, dt: usize) -> &[ContextMember] {
        &self.members[u as usize][dt - 1]
    }

    /// The multiset of feature-`j` values in `C_u^dt`, expanded by multiplicity.
    pub fn feature_values(&self, u: NodeId, dt: usize, j: usize) -> Vec<f64> {
        self.context(u, dt)
            .iter()
            .flat_map(|m| std::iter::repeat_n(m.values[j], m.multiplicity as usize))
            .collect()
    }
}

pub fn substitute_features(
    store: &ContextStore,
    features: &FeatureMatrix,
    node_types: &[u32],
) -> Result<FeatureContextStore> {
    let members = store
        .contexts
        .iter()
        .map(|per_dt| {
            per_dt
                .iter()
                .map(|ctx| {
                    ctx.iter()
                        .map(|(&v, &multiplicity)| {
                            if v as usize >= features.num_rows() || v as usize >= node_types.len() {
                                return Err(Error::Domain(format!(
                                    "context node {v} has no feature row or node type"
                                )));
                            }
                            Ok(ContextMember {
                                node_type: node_types[v as usize],
                                values: features.row(v).to_vec(),
                                multiplicity,
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureContextStore { max_dt: store.max_dt, num_features: features.num_features(), members })
}

/// Index arithmetic for a histogram made of `(node type, feature)` blocks of `bins` counts.
///
/// Blocks are ordered type-major: all features of type 0, then all features of type 1, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistogramLayout {
    pub num_features: usize,
    pub num_types: usize,
    pub bins: usize,
}

impl HistogramLayout {
    pub fn new(bins: &BinningScheme, num_types: usize) -> Self {
        HistogramLayout { num_features: bins.num_features(), num_types, bins: bins.num_bins() }
    }

    pub fn dim(&self) -> usize {
        self.num_features * self.num_types * self.bins
    }

    pub fn index(&self, node_type: usize, feature: usize, bin: usize) -> usize {
        (node_type * self.num_features + feature) * self.bins + bin
    }
}

/// Histogram of `C_u^dt`, in [`HistogramLayout`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextHistogram {
    pub owner: NodeId,
    pub dt: usize,
    pub counts: Vec<u32>,
}

pub fn aggregate_histogram(
    u: NodeId,
    dt: usize,
    store: &FeatureContextStore,
    bins: &BinningScheme,
    num_types: usize,
) -> Result<ContextHistogram> {
    if dt == 0 || dt > store.max_dt {
        return Err(Error::validation(format!("distance {dt} outside 1..={}", store.max_dt)));
    }
    if store.num_features != bins.num_features() {
        return Err(Error::validation("binning scheme and contexts disagree on feature count"));
    }
    let layout = HistogramLayout::new(bins, num_types);
    let mut counts = vec![0u32; layout.dim()];
    for member in store.context(u, dt) {
        let t = member.node_type as usize;
        if t >= num_types {
            return Err(Error::Domain(format!("node type {t} outside 0..{num_types}")));
        }
        for (j, &value) in member.values.iter().enumerate() {
            counts[layout.index(t, j, bins.bin(j, value))] += member.multiplicity;
        }
    }
    Ok(ContextHistogram { owner: u, dt, counts })
}

/// Histograms of every node at every distance, `N x max_dt x dim` counts.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramTable {
    layout: HistogramLayout,
    max_dt: usize,
    num_nodes: usize,
    /// Per node, the histogram slot each feature lands in (`|F|` entries).
    slots: Vec<u32>,
    counts: Vec<u32>,
}

impl HistogramTable {
    /// Empty table; precomputes every node's bin slots.
    pub fn new(
        features: &FeatureMatrix,
        bins: &BinningScheme,
        node_types: &[u32],
        num_types: usize,
        max_dt: usize,
    ) -> Result<Self> {
        check_max_dt(max_dt)?;
        if features.num_rows() != node_types.len() {
            return Err(Error::validation("feature matrix and node types disagree on node count"));
        }
        if features.num_features() != bins.num_features() {
            return Err(Error::validation("binning scheme and features disagree on feature count"));
        }
        let layout = HistogramLayout::new(bins, num_types);
        let mut slots = Vec::with_capacity(node_types.len() * layout.num_features);
        for (u, &t) in node_types.iter().enumerate() {
            if t as usize >= num_types {
                return Err(Error::Domain(format!("node type {t} outside 0..{num_types}")));
            }
            for j in 0..layout.num_features {
                let bin = bins.bin(j, features.get(u as NodeId, j));
                slots.push(layout.index(t as usize, j, bin) as u32);
            }
        }
        let num_nodes = node_types.len();
        Ok(HistogramTable {
            layout,
            max_dt,
            num_nodes,
            slots,
            counts: vec![0; num_nodes * max_dt * layout.dim()],
        })
    }

    pub fn layout(&self) -> HistogramLayout {
        self.layout
    }

    pub fn max_dt(&self) -> usize {
        self.max_dt
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn histogram(&self, u: NodeId, dt: usize) -> &[u32] {
        let dim = self.layout.dim();
        let start = (u as usize * self.max_dt + dt - 1) * dim;
        &self.counts[start..start + dim]
    }

    fn empty_like(&self) -> Self {
        HistogramTable { counts: vec![0; self.counts.len()], ..self.clone_shape() }
    }

    fn clone_shape(&self) -> Self {
        HistogramTable {
            layout: self.layout,
            max_dt: self.max_dt,
            num_nodes: self.num_nodes,
            slots: self.slots.clone(),
            counts: Vec::new(),
        }
    }

    #[inline]
    fn add_member(&mut self, owner: NodeId, dt: usize, member: NodeId) {
        let f = self.layout.num_features;
        let base = (owner as usize * self.max_dt + dt - 1) * self.layout.dim();
        let slots = &self.slots[member as usize * f..(member as usize + 1) * f];
        for &s in slots {
            self.counts[base + s as usize] += 1;
        }
    }

    /// Adds every pair of positions at distance `<= max_dt`, in both directions.
    pub fn add_walk(&mut self, nodes: &[NodeId]) {
        for i in 0..nodes.len() {
            for dt in 1..=self.max_dt {
                let Some(&v) = nodes.get(i + dt) else { break };
                let u = nodes[i];
                self.add_member(u, dt, v);
                self.add_member(v, dt, u);
            }
        }
    }

    /// Adds another table's counts into this one.
    pub fn merge(&mut self, other: &HistogramTable) -> Result<()> {
        if self.counts.len() != other.counts.len() || self.layout != other.layout {
            return Err(Error::validation("cannot merge histogram tables of different shapes"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// One CSV row per (node, dt): `label,dt,c0,c1,...`.
    pub fn write_csv<W: std::io::Write>(&self, labels: &[String], mut out: W) -> std::io::Result<()> {
        let dim = self.layout.dim();
        write!(out, "node,dt")?;
        for i in 0..dim {
            write!(out, ",h{i}")?;
        }
        writeln!(out)?;
        for u in 0..self.num_nodes {
            for dt in 1..=self.max_dt {
                let label = labels.get(u).map(String::as_str).unwrap_or("");
                write!(out, "{label},{dt}")?;
                for c in self.histogram(u as NodeId, dt) {
                    write!(out, ",{c}")?;
                }
                writeln!(out)?;
            }
        }
        Ok(())
    }

    pub fn from_corpus(
        corpus: &WalkCorpus,
        features: &FeatureMatrix,
        bins: &BinningScheme,
        node_types: &[u32],
        num_types: usize,
        max_dt: usize,
    ) -> Result<Self> {
        let mut table = HistogramTable::new(features, bins, node_types, num_types, max_dt)?;
        for walk in &corpus.walks {
            if walk.nodes.iter().any(|&v| v as usize >= table.num_nodes) {
                return Err(Error::Domain("walk visits a node without features".into()));
            }
            table.add_walk(&walk.nodes);
        }
        Ok(table)
    }
}

/// Samples walks edge by edge and folds them straight into histograms.
///
/// Workers keep partial tables merged by addition; each edge uses its own RNG
/// stream, so the result does not depend on the thread count.
pub fn accumulate_histograms(
    g: &TemporalGraph,
    features: &FeatureMatrix,
    bins: &BinningScheme,
    params: &WalkParams,
    max_dt: usize,
) -> Result<HistogramTable> {
    params.validate()?;
    let empty =
        HistogramTable::new(features, bins, g.node_types(), g.num_node_types(), max_dt)?;
    let sampler = WalkSampler::new(g, params.policy);
    let min_len = (g.num_edges() / (rayon::current_num_threads() * 4)).max(256);
    let table = (0..g.num_edges())
        .into_par_iter()
        .with_min_len(min_len)
        .fold(
            || (empty.empty_like(), Walk::default(), Vec::new()),
            |(mut table, mut walk, mut scratch), edge| {
                let mut rng = edge_rng(params.seed, edge);
                for _ in 0..params.walks_per_edge {
                    sampler.sample_into(edge, params.walk_length, &mut rng, &mut walk, &mut scratch);
                    table.add_walk(&walk.nodes);
                }
                (table, walk, scratch)
            },
        )
        .map(|(table, _, _)| table)
        .reduce_with(|mut a, b| {
            for (x, y) in a.counts.iter_mut().zip(&b.counts) {
                *x += y;
            }
            a
        });
    Ok(table.unwrap_or(empty))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{fit_log_bins, FeatureKind};
    use crate::graph::Edge;
    use crate::walks::{WalkMode, WalkPolicy};

    // Node ids: a = 0, b = 1, c = 2.
    fn figure_walk() -> Vec<Walk> {
        vec![Walk { nodes: vec![1, 0, 1, 2], timestamps: vec![] }]
    }

    fn ids(ctx: &BTreeMap<NodeId, u32>) -> Vec<NodeId> {
        ctx.iter().flat_map(|(&v, &m)| std::iter::repeat_n(v, m as usize)).collect()
    }

    #[test]
    fn contexts_of_worked_walk() {
        let store = extract_contexts_from_walks(&figure_walk(), 3, 2).unwrap();
        assert_eq!(ids(store.context(0, 2)), vec![2]);
        assert_eq!(ids(store.context(0, 1)), vec![1, 1]);
        assert_eq!(ids(store.context(1, 2)), vec![1, 1]);
        assert_eq!(ids(store.context(2, 1)), vec![1]);

        let short = extract_contexts_from_walks(&figure_walk(), 3, 1).unwrap();
        assert_eq!(ids(short.context(0, 1)), vec![1, 1]);
        assert!(extract_contexts_from_walks(&figure_walk(), 3, 0).is_err());
    }

    #[test]
    fn single_node_walk_contributes_nothing() {
        let walks = vec![Walk { nodes: vec![0], timestamps: vec![] }];
        let store = extract_contexts_from_walks(&walks, 2, 3).unwrap();
        assert!((1..=3).all(|dt| store.context(0, dt).is_empty()));
    }

    fn one_feature(values: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(values.len(), vec!["deg".into()], vec![FeatureKind::Derived], values.to_vec())
            .unwrap()
    }

    #[test]
    fn substitution_replaces_ids_with_features() {
        let store = extract_contexts_from_walks(&figure_walk(), 3, 1).unwrap();
        let m = one_feature(&[2.0, 2.0, 1.0]);
        let fs = substitute_features(&store, &m, &[0, 0, 0]).unwrap();
        assert_eq!(fs.feature_values(0, 1, 0), vec![2.0, 2.0]);

        let empty = extract_contexts_from_walks(&[], 3, 1).unwrap();
        let fe = substitute_features(&empty, &m, &[0, 0, 0]).unwrap();
        assert!(fe.context(0, 1).is_empty());

        let two = FeatureMatrix::new(
            3,
            vec!["x".into(), "y".into()],
            vec![FeatureKind::Derived; 2],
            vec![1.0, 10.0, 2.0, 20.0, 3.0, 30.0],
        )
        .unwrap();
        let f2 = substitute_features(&store, &two, &[0, 0, 0]).unwrap();
        assert_eq!(f2.feature_values(2, 1, 0), vec![2.0]);
        assert_eq!(f2.feature_values(2, 1, 1), vec![20.0]);

        assert!(substitute_features(&store, &one_feature(&[1.0]), &[0]).is_err());
    }

    #[test]
    fn one_hot_histogram() {
        let walks = vec![Walk { nodes: vec![0, 1], timestamps: vec![] }];
        let store = extract_contexts_from_walks(&walks, 2, 1).unwrap();
        let m = one_feature(&[0.0, 2.0]);
        let bins = fit_log_bins(&m, 5).unwrap();
        let fs = substitute_features(&store, &m, &[0, 0]).unwrap();
        let h = aggregate_histogram(0, 1, &fs, &bins, 1).unwrap();
        assert_eq!(h.counts, vec![0, 0, 1, 0, 0]);

        let none = extract_contexts_from_walks(&[], 2, 1).unwrap();
        let fe = substitute_features(&none, &m, &[0, 0]).unwrap();
        assert!(aggregate_histogram(0, 1, &fe, &bins, 1).unwrap().counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn different_types_land_in_different_blocks() {
        // Node 0 sees 1 (type 0) and 2 (type 1); both have feature value 1.
        let walks = vec![Walk { nodes: vec![1, 0, 2], timestamps: vec![] }];
        let store = extract_contexts_from_walks(&walks, 3, 1).unwrap();
        let m = one_feature(&[3.0, 1.0, 1.0]);
        let bins = fit_log_bins(&m, 3).unwrap();
        let fs = substitute_features(&store, &m, &[0, 0, 1]).unwrap();
        let h = aggregate_histogram(0, 1, &fs, &bins, 2).unwrap();
        assert_eq!(h.counts, vec![0, 1, 0, 0, 1, 0]);
    }

    #[test]
    fn streaming_table_matches_materialized_contexts() {
        let walks = vec![
            Walk { nodes: vec![1, 0, 1, 2, 3], timestamps: vec![] },
            Walk { nodes: vec![3, 2], timestamps: vec![] },
        ];
        let m = one_feature(&[1.0, 4.0, 0.0, 2.0]);
        let types = [0, 1, 0, 1];
        let bins = fit_log_bins(&m, 4).unwrap();
        let params = WalkParams {
            walks_per_edge: 1,
            walk_length: 5,
            policy: WalkPolicy::static_walks(),
            seed: 0,
        };
        let corpus = WalkCorpus { walks: walks.clone(), params };
        let table = HistogramTable::from_corpus(&corpus, &m, &bins, &types, 2, 3).unwrap();
        let store = extract_contexts(&corpus, 4, 3).unwrap();
        let fs = substitute_features(&store, &m, &types).unwrap();
        for u in 0..4 {
            for dt in 1..=3 {
                let h = aggregate_histogram(u, dt, &fs, &bins, 2).unwrap();
                assert_eq!(table.histogram(u, dt), h.counts.as_slice(), "u={u} dt={dt}");
            }
        }
    }

    #[test]
    fn accumulation_is_thread_count_independent() {
        let edges: Vec<Edge> =
            (0..40u32).map(|i| Edge::at(i % 9, (i * 7 + 3) % 9, (i % 5) as i64)).collect();
        let g = TemporalGraph::from_edges(9, edges, true, None).unwrap();
        let m = crate::features::derive_structural_features(&g);
        let bins = fit_log_bins(&m, 5).unwrap();
        let params = WalkParams {
            walks_per_edge: 3,
            walk_length: 8,
            policy: WalkPolicy::for_graph(&g, WalkMode::ShortTerm).unwrap(),
            seed: 5,
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| accumulate_histograms(&g, &m, &bins, &params, 3).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        let corpus = crate::walks::generate_walk_corpus(&g, &params).unwrap();
        let from_corpus =
            HistogramTable::from_corpus(&corpus, &m, &bins, g.node_types(), 1, 3).unwrap();
        assert_eq!(one, from_corpus);
    }
}
