//! Temporal structural sketches for identity stitching.
//!
//! Nodes of a (possibly temporal, heterogeneous) graph are embedded as binary
//! sketches: temporal random walks give per-distance contexts, contexts become
//! histograms over binned node features, and histograms are hashed with SimHash.
//! Sketches can then be compared pairwise with a logistic model or grouped by
//! banded bucketing.

pub mod config;
pub mod contexts;
pub mod error;
pub mod eval;
pub mod features;
pub mod graph;
pub mod hashing;
pub mod pipeline;
pub mod stitching;
pub mod walks;

pub use config::RunConfig;
pub use contexts::{accumulate_histograms, extract_contexts, HistogramTable};
pub use error::{Error, Result};
pub use eval::{compute_metrics, inject_replicas, roc_auc, MetricReport, ReplicaGroundTruth, ReplicaParams};
pub use features::{derive_structural_features, fit_log_bins, BinningScheme, FeatureMatrix};
pub use graph::{load_edge_list, Edge, EdgeSchema, LoadOptions, NodeId, NodeTypeTable, TemporalGraph};
pub use hashing::{simhash, BitVector, HyperplaneSet, SketchFormat, SketchMatrix};
pub use pipeline::{embed, evaluate_supervised, evaluate_unsupervised, EmbedParams, Embedding, EvalParams};
pub use stitching::{build_buckets, train_logistic, BucketTable, LabeledPair, LogisticConfig, LogisticModel};
pub use walks::{generate_walk_corpus, WalkMode, WalkParams, WalkPolicy};
