//! Temporal and static random walks started from every edge.
//!
//! Temporal walks only continue along edges whose timestamp is `>=` the previously
//! traversed one. The next edge is drawn from a softmax over candidate timestamps
//! scaled by the graph's total time span `d`: `exp(-t/d)` favours early
//! continuations (short-term), `exp(t/d)` late ones (long-term). Static walks
//! ignore time and pick neighbors proportionally to edge weight.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Incidence, NeighborEntry, NodeId, TemporalGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WalkMode {
    ShortTerm,
    LongTerm,
    Static,
}

impl WalkMode {
    pub fn is_temporal(self) -> bool {
        !matches!(self, WalkMode::Static)
    }
}

impl FromStr for WalkMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "short" | "short_term" | "short-term" => Ok(WalkMode::ShortTerm),
            "long" | "long_term" | "long-term" => Ok(WalkMode::LongTerm),
            "static" => Ok(WalkMode::Static),
            other => Err(Error::validation(format!("unknown walk policy '{other}'"))),
        }
    }
}

impl fmt::Display for WalkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WalkMode::ShortTerm => "short",
            WalkMode::LongTerm => "long",
            WalkMode::Static => "static",
        })
    }
}

/// Transition policy plus the graph's time span used to scale timestamps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkPolicy {
    pub mode: WalkMode,
    pub duration: f64,
}

impl WalkPolicy {
    pub fn new(mode: WalkMode, duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::validation(format!("walk duration must be positive, got {duration}")));
        }
        Ok(WalkPolicy { mode, duration })
    }

    /// Uses `max(t) - min(t)` over the graph's edges; a single distinct timestamp gives 1.
    pub fn for_graph(g: &TemporalGraph, mode: WalkMode) -> Result<Self> {
        if mode.is_temporal() && !g.is_temporal() {
            return Err(Error::validation(format!(
                "policy '{mode}' needs a temporal graph; use 'static'"
            )));
        }
        let duration = match g.timestamp_range() {
            Some((lo, hi)) if hi > lo => (hi as f64) - (lo as f64),
            _ => 1.0,
        };
        WalkPolicy::new(mode, duration)
    }

    pub fn static_walks() -> Self {
        WalkPolicy { mode: WalkMode::Static, duration: 1.0 }
    }
}

/// Node sequence plus, for temporal modes, the timestamps of traversed edges.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Walk {
    pub nodes: Vec<NodeId>,
    pub timestamps: Vec<i64>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn clear(&mut self) {
        self.nodes.clear();
        self.timestamps.clear();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    pub walks_per_edge: usize,
    pub walk_length: usize,
    pub policy: WalkPolicy,
    pub seed: u64,
}

impl WalkParams {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_edge == 0 {
            return Err(Error::validation("walks per edge must be at least 1"));
        }
        if self.walk_length < 2 {
            return Err(Error::validation("walk length must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkCorpus {
    pub walks: Vec<Walk>,
    pub params: WalkParams,
}

impl WalkCorpus {
    pub fn len(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }
}

/// Unnormalized softmax weights over `cands`, shifted so the largest weight is 1.
/// `cands` must be sorted by timestamp.
fn temporal_weights(cands: &[Incidence], policy: &WalkPolicy, out: &mut Vec<f64>) {
    out.clear();
    let (Some(first), Some(last)) = (cands.first(), cands.last()) else {
        return;
    };
    let d = policy.duration;
    match policy.mode {
        WalkMode::ShortTerm => {
            let t0 = first.timestamp as f64;
            out.extend(cands.iter().map(|c| (-((c.timestamp as f64) - t0) / d).exp()));
        }
        WalkMode::LongTerm => {
            let t1 = last.timestamp as f64;
            out.extend(cands.iter().map(|c| (((c.timestamp as f64) - t1) / d).exp()));
        }
        WalkMode::Static => out.extend(cands.iter().map(|c| c.weight)),
    }
}

/// Probability of each outgoing edge of `u` usable after `t_prev`.
///
/// Each parallel edge is its own outcome. An empty vector means the walk ends at `u`.
pub fn transition_distribution(
    g: &TemporalGraph,
    u: NodeId,
    t_prev: Option<i64>,
    policy: &WalkPolicy,
) -> Result<Vec<(NeighborEntry, f64)>> {
    g.check_node(u)?;
    let cands = match policy.mode {
        WalkMode::Static => g.incidence(u),
        _ => g.incidence_from(u, t_prev.unwrap_or(i64::MIN)),
    };
    let mut weights = Vec::new();
    temporal_weights(cands, policy, &mut weights);
    let total: f64 = weights.iter().sum();
    Ok(cands
        .iter()
        .zip(weights)
        .map(|(c, w)| {
            let entry = NeighborEntry {
                neighbor: c.neighbor,
                timestamp: g.is_temporal().then_some(c.timestamp),
                weight: c.weight,
            };
            (entry, w / total)
        })
        .collect())
}

/// Independent RNG stream for one edge's walks.
pub fn edge_rng(seed: u64, edge: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(edge as u64);
    rng
}

/// Samples walks over one graph under a fixed policy.
#[derive(Debug, Clone)]
pub struct WalkSampler<'g> {
    graph: &'g TemporalGraph,
    policy: WalkPolicy,
    uniform_weights: bool,
}

impl<'g> WalkSampler<'g> {
    pub fn new(graph: &'g TemporalGraph, policy: WalkPolicy) -> Self {
        let uniform_weights = graph
            .edges()
            .first()
            .is_none_or(|first| graph.edges().iter().all(|e| e.weight == first.weight));
        WalkSampler { graph, policy, uniform_weights }
    }

    pub fn policy(&self) -> &WalkPolicy {
        &self.policy
    }

    fn choose<R: Rng>(&self, cands: &[Incidence], rng: &mut R, scratch: &mut Vec<f64>) -> Incidence {
        debug_assert!(!cands.is_empty());
        let flat = match self.policy.mode {
            WalkMode::Static => self.uniform_weights,
            _ => cands[0].timestamp == cands[cands.len() - 1].timestamp,
        };
        if flat || cands.len() == 1 {
            return cands[rng.gen_range(0..cands.len())];
        }
        temporal_weights(cands, &self.policy, scratch);
        let total: f64 = scratch.iter().sum();
        let mut target = rng.gen::<f64>() * total;
        for (c, w) in cands.iter().zip(scratch.iter()) {
            if target < *w {
                return *c;
            }
            target -= w;
        }
        cands[cands.len() - 1]
    }

    /// Fills `walk` with a walk of at most `max_len` nodes starting with edge `edge`.
    pub fn sample_into<R: Rng>(
        &self,
        edge: usize,
        max_len: usize,
        rng: &mut R,
        walk: &mut Walk,
        scratch: &mut Vec<f64>,
    ) {
        walk.clear();
        let e = &self.graph.edges()[edge];
        let temporal = self.policy.mode.is_temporal();
        walk.nodes.extend([e.src, e.dst].into_iter().take(max_len));
        if walk.nodes.len() < 2 {
            return;
        }
        let mut t_prev = e.timestamp.unwrap_or(0);
        if temporal {
            walk.timestamps.push(t_prev);
        }
        let mut current = e.dst;
        while walk.nodes.len() < max_len {
            let cands = if temporal {
                self.graph.incidence_from(current, t_prev)
            } else {
                self.graph.incidence(current)
            };
            if cands.is_empty() {
                break;
            }
            let next = self.choose(cands, rng, scratch);
            walk.nodes.push(next.neighbor);
            if temporal {
                walk.timestamps.push(next.timestamp);
                t_prev = next.timestamp;
            }
            current = next.neighbor;
        }
    }

    pub fn sample<R: Rng>(&self, edge: usize, max_len: usize, rng: &mut R) -> Walk {
        let mut walk = Walk::default();
        self.sample_into(edge, max_len, rng, &mut walk, &mut Vec::new());
        walk
    }
}

/// One walk of at most `max_len` nodes beginning with the endpoints of edge `edge`.
pub fn sample_temporal_walk<R: Rng>(
    g: &TemporalGraph,
    edge: usize,
    max_len: usize,
    policy: &WalkPolicy,
    rng: &mut R,
) -> Walk {
    WalkSampler::new(g, *policy).sample(edge, max_len, rng)
}

/// `R` walks per edge, ordered by (edge, repetition). Identical for a fixed seed
/// whatever the thread count.
pub fn generate_walk_corpus(g: &TemporalGraph, params: &WalkParams) -> Result<WalkCorpus> {
    params.validate()?;
    let sampler = WalkSampler::new(g, params.policy);
    let per_edge: Vec<Vec<Walk>> = (0..g.num_edges())
        .into_par_iter()
        .map(|edge| {
            let mut rng = edge_rng(params.seed, edge);
            let mut scratch = Vec::new();
            (0..params.walks_per_edge)
                .map(|_| {
                    let mut walk = Walk::default();
                    sampler.sample_into(edge, params.walk_length, &mut rng, &mut walk, &mut scratch);
                    walk
                })
                .collect()
        })
        .collect();
    Ok(WalkCorpus { walks: per_edge.into_iter().flatten().collect(), params: *params })
}
