//! End-to-end runs: embedding, supervised stitching and unsupervised stitching.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::contexts::{accumulate_histograms, HistogramTable};
use crate::error::{Result, StageExt};
use crate::eval::{
    compute_metrics, decision_metrics, inject_replicas, sample_negatives, split_pairs, MetricReport,
    ReplicaGroundTruth, ReplicaParams,
};
use crate::features::{derive_structural_features, fit_log_bins, BinningScheme, FeatureMatrix};
use crate::graph::{NodeId, TemporalGraph};
use crate::hashing::{hash_histograms, segment_lengths, HyperplaneSet, SketchMatrix};
use crate::stitching::{
    build_buckets, predict_pairs, stitch_unsupervised, train_logistic, BucketTable, LabeledPair,
    LogisticConfig, LogisticModel, PairDataset,
};
use crate::walks::{WalkMode, WalkParams, WalkPolicy};

/// Derives an independent seed for one purpose from the run seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, purpose: u64) -> u64 {
    let mut z = seed ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const WALK_SEED: u64 = 1;
const PLANE_SEED: u64 = 2;
const REPLICA_SEED: u64 = 3;
const NEGATIVE_SEED: u64 = 4;
const SPLIT_SEED: u64 = 5;
const BAND_SEED: u64 = 6;
const SHUFFLE_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedParams {
    pub walks_per_edge: usize,
    pub walk_length: usize,
    pub max_dt: usize,
    pub dim: usize,
    pub bins: usize,
    /// `None` means short-term on temporal graphs and static otherwise.
    pub policy: Option<WalkMode>,
    pub seed: u64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams::from(&RunConfig::default())
    }
}

impl From<&RunConfig> for EmbedParams {
    fn from(c: &RunConfig) -> Self {
        EmbedParams {
            walks_per_edge: c.walks,
            walk_length: c.walk_length,
            max_dt: c.max_dt,
            dim: c.dim,
            bins: c.bins,
            policy: c.policy,
            seed: c.seed,
        }
    }
}

impl EmbedParams {
    pub fn resolve_mode(&self, g: &TemporalGraph) -> WalkMode {
        self.policy.unwrap_or(if g.is_temporal() { WalkMode::ShortTerm } else { WalkMode::Static })
    }
}

/// Everything produced while embedding one graph.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub features: FeatureMatrix,
    pub binning: BinningScheme,
    pub policy: WalkPolicy,
    pub histograms: HistogramTable,
    pub planes: HyperplaneSet,
    pub sketches: SketchMatrix,
}

/// Optional node attributes appended to the degree features.
#[derive(Debug, Clone, Default)]
pub struct Attributes {
    pub values: HashMap<NodeId, Vec<f64>>,
    pub fill: f64,
}

pub fn embed(g: &TemporalGraph, attributes: Option<&Attributes>, params: &EmbedParams) -> Result<Embedding> {
    let lengths = segment_lengths(params.dim, params.max_dt).stage("hashing")?;
    let mut features = derive_structural_features(g);
    if let Some(attrs) = attributes {
        features = features.attach_attributes(&attrs.values, attrs.fill).stage("features")?;
    }
    let binning = fit_log_bins(&features, params.bins).stage("features")?;

    let policy = WalkPolicy::for_graph(g, params.resolve_mode(g)).stage("walks")?;
    let walk_params = WalkParams {
        walks_per_edge: params.walks_per_edge,
        walk_length: params.walk_length,
        policy,
        seed: derive_seed(params.seed, WALK_SEED),
    };
    walk_params.validate().stage("walks")?;

    let histograms =
        accumulate_histograms(g, &features, &binning, &walk_params, params.max_dt).stage("contexts")?;
    let dim = histograms.layout().dim();
    let planes = HyperplaneSet::generate(dim, &lengths, derive_seed(params.seed, PLANE_SEED)).stage("hashing")?;
    let sketches = hash_histograms(&histograms, &planes).stage("hashing")?;
    Ok(Embedding { features, binning, policy, histograms, planes, sketches })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalParams {
    pub embed: EmbedParams,
    pub replicas: ReplicaParams,
    pub logistic: LogisticConfig,
    pub split_ratio: f64,
    pub band_bits: usize,
    /// Permute training labels (a control that should give AUC near 0.5).
    pub shuffle_labels: bool,
    pub seed: u64,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams::from(&RunConfig::default())
    }
}

impl From<&RunConfig> for EvalParams {
    fn from(c: &RunConfig) -> Self {
        EvalParams {
            embed: EmbedParams::from(c),
            replicas: ReplicaParams {
                fraction: c.fraction,
                p1: c.p1,
                p2: c.p2,
                seed: derive_seed(c.seed, REPLICA_SEED),
            },
            logistic: LogisticConfig { lambda: c.lambda, tol: c.tol, max_iter: c.max_iter },
            split_ratio: c.split_ratio,
            band_bits: c.band_bits,
            shuffle_labels: c.shuffle_labels,
            seed: c.seed,
        }
    }
}

/// Gives every replica its original's attribute vector.
pub fn replica_attributes(attributes: &Attributes, truth: &ReplicaGroundTruth) -> Attributes {
    let mut out = attributes.clone();
    for &(u, r) in &truth.pairs {
        if let Some(v) = attributes.values.get(&u) {
            out.values.insert(r, v.clone());
        }
    }
    out
}

/// Perturbed graph, its ground truth and the labeled benchmark pairs.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub graph: TemporalGraph,
    pub truth: ReplicaGroundTruth,
    /// Replica pairs (label 1) followed by as many random pairs (label 0).
    pub pairs: Vec<LabeledPair>,
}

pub fn build_benchmark(g: &TemporalGraph, params: &EvalParams) -> Result<Benchmark> {
    let (graph, truth) = inject_replicas(g, &params.replicas).stage("replicas")?;
    let pool: Vec<NodeId> = (0..graph.num_nodes() as NodeId).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, NEGATIVE_SEED));
    let negatives = sample_negatives(&truth.pairs, &pool, &mut rng).stage("negatives")?;
    let pairs = truth
        .pairs
        .iter()
        .map(|&(u, v)| LabeledPair::new(u, v, true))
        .chain(negatives.into_iter().map(|(u, v)| LabeledPair::new(u, v, false)))
        .collect();
    Ok(Benchmark { graph, truth, pairs })
}

/// Result of training and testing the pair classifier.
#[derive(Debug, Clone)]
pub struct PairRun {
    pub train: Vec<LabeledPair>,
    pub test: Vec<LabeledPair>,
    pub model: LogisticModel,
    pub scores: Vec<f64>,
    pub report: MetricReport,
}

/// Stratified split, logistic regression on `[z_u, z_v]` (both orders for
/// training) and metrics on the held-out pairs.
pub fn classify_pairs(z: &SketchMatrix, pairs: &[LabeledPair], params: &EvalParams) -> Result<PairRun> {
    let (mut train, test) =
        split_pairs(pairs, params.split_ratio, derive_seed(params.seed, SPLIT_SEED)).stage("split")?;
    if params.shuffle_labels {
        let mut labels: Vec<bool> = train.iter().map(|p| p.label).collect();
        labels.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(params.seed, SHUFFLE_SEED)));
        for (p, l) in train.iter_mut().zip(labels) {
            p.label = l;
        }
    }
    let train_data = PairDataset::from_sketches_both_orders(z, &train).stage("classifier")?;
    let model = train_logistic(&train_data, &params.logistic).stage("classifier")?;
    let test_data = PairDataset::from_sketches(z, &test).stage("classifier")?;
    let predictions = predict_pairs(&model, &test_data).stage("classifier")?;
    let report = compute_metrics(&predictions.scores, test_data.labels(), 0.5).stage("metrics")?;
    Ok(PairRun { train, test, model, scores: predictions.scores, report })
}

#[derive(Debug, Clone)]
pub struct SupervisedOutcome {
    pub benchmark: Benchmark,
    pub embedding: Embedding,
    pub run: PairRun,
}

/// Replica injection, embedding, 50/50 split, logistic regression, test metrics.
pub fn evaluate_supervised(
    g: &TemporalGraph,
    attributes: Option<&Attributes>,
    params: &EvalParams,
) -> Result<SupervisedOutcome> {
    let benchmark = build_benchmark(g, params)?;
    let attributes = attributes.map(|a| replica_attributes(a, &benchmark.truth));
    let embedding = embed(&benchmark.graph, attributes.as_ref(), &params.embed)?;
    let run = classify_pairs(&embedding.sketches, &benchmark.pairs, params)?;
    Ok(SupervisedOutcome { benchmark, embedding, run })
}

#[derive(Debug, Clone)]
pub struct UnsupervisedOutcome {
    pub benchmark: Benchmark,
    pub embedding: Embedding,
    pub table: BucketTable,
    pub decisions: Vec<bool>,
    pub report: MetricReport,
}

/// Bands the sketches of the perturbed graph and labels each benchmark pair by
/// co-bucketing. Only accuracy and F1 are defined.
pub fn evaluate_unsupervised(
    g: &TemporalGraph,
    attributes: Option<&Attributes>,
    params: &EvalParams,
) -> Result<UnsupervisedOutcome> {
    let benchmark = build_benchmark(g, params)?;
    let attributes = attributes.map(|a| replica_attributes(a, &benchmark.truth));
    let embedding = embed(&benchmark.graph, attributes.as_ref(), &params.embed)?;
    let table = bucket_sketches(&embedding.sketches, params.band_bits, params.seed)?;
    let queries: Vec<(NodeId, NodeId)> = benchmark.pairs.iter().map(|p| (p.u, p.v)).collect();
    let decisions = stitch_unsupervised(&table, &queries).stage("buckets")?;
    let labels: Vec<bool> = benchmark.pairs.iter().map(|p| p.label).collect();
    let report = decision_metrics(&decisions, &labels).stage("metrics")?;
    Ok(UnsupervisedOutcome { benchmark, embedding, table, decisions, report })
}

pub fn bucket_sketches(z: &SketchMatrix, band_bits: usize, seed: u64) -> Result<BucketTable> {
    build_buckets(z, band_bits, derive_seed(seed, BAND_SEED)).stage("buckets")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    #[test]
    fn derived_seeds_differ_by_purpose() {
        assert_ne!(derive_seed(0, WALK_SEED), derive_seed(0, PLANE_SEED));
        assert_eq!(derive_seed(42, 3), derive_seed(42, 3));
    }

    #[test]
    fn toy_embedding_shape() {
        let g = TemporalGraph::from_edges(3, vec![Edge::at(0, 1, 1), Edge::at(1, 2, 2)], false, None).unwrap();
        let params = EmbedParams { dim: 8, max_dt: 1, ..EmbedParams::default() };
        let e = embed(&g, None, &params).unwrap();
        assert_eq!(e.sketches.num_rows(), 3);
        assert_eq!(e.sketches.num_bits(), 8);
        assert_eq!(e.policy.mode, WalkMode::ShortTerm);
    }

    #[test]
    fn short_policy_on_static_graph_fails_in_walk_stage() {
        let g = TemporalGraph::from_edges(2, vec![Edge::new(0, 1)], false, None).unwrap();
        let params = EmbedParams { policy: Some(WalkMode::ShortTerm), ..EmbedParams::default() };
        let err = embed(&g, None, &params).unwrap_err();
        assert!(err.to_string().starts_with("walks:"), "{err}");
        assert!(err.is_data_error());
    }
}
