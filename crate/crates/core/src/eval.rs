//! Replica-injection benchmark and classification metrics.
//!
//! A replica `u'` of a high-degree node `u` takes over part of `u`'s edges: every
//! original edge stays at `u` with probability `p1` and otherwise moves to `u'`;
//! independently it is also copied to `u'` with probability `p2`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, NodeId, TemporalGraph};
use crate::stitching::LabeledPair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicaParams {
    /// Fraction of the above-average-degree nodes that get a replica.
    pub fraction: f64,
    pub p1: f64,
    pub p2: f64,
    pub seed: u64,
}

impl Default for ReplicaParams {
    fn default() -> Self {
        ReplicaParams { fraction: 0.05, p1: 0.6, p2: 0.3, seed: 0 }
    }
}

impl ReplicaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::validation(format!("replica fraction {} outside (0, 1]", self.fraction)));
        }
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaGroundTruth {
    /// `(original, replica)` in ascending original ID.
    pub pairs: Vec<(NodeId, NodeId)>,
    pub params: ReplicaParams,
}

impl ReplicaGroundTruth {
    /// `label_u<TAB>label_u'` lines.
    pub fn write<W: Write>(&self, g: &TemporalGraph, mut out: W) -> std::io::Result<()> {
        for &(u, r) in &self.pairs {
            writeln!(out, "{}\t{}", g.label(u), g.label(r))?;
        }
        out.flush()
    }
}

/// Suffix appended to a node label to name its replica.
pub const REPLICA_SUFFIX: &str = "~rep";

pub fn inject_replicas(g: &TemporalGraph, params: &ReplicaParams) -> Result<(TemporalGraph, ReplicaGroundTruth)> {
    params.validate()?;
    let n = g.num_nodes();
    let degrees: Vec<u32> = (0..n as NodeId).map(|u| g.degree_profile(u).map(|d| d.total)).collect::<Result<_>>()?;
    let mean = degrees.iter().map(|&d| d as f64).sum::<f64>() / n.max(1) as f64;
    let eligible: Vec<NodeId> = (0..n as NodeId).filter(|&u| degrees[u as usize] as f64 > mean).collect();
    if eligible.is_empty() {
        return Err(Error::validation("no node has a degree above the mean"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let count = ((params.fraction * eligible.len() as f64).round() as usize).clamp(1, eligible.len());
    let mut sampled: Vec<NodeId> = sample(&mut rng, eligible.len(), count).into_iter().map(|i| eligible[i]).collect();
    sampled.sort_unstable();

    let original = g.edges();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in original.iter().enumerate() {
        incident[e.src as usize].push(i);
        if e.dst != e.src {
            incident[e.dst as usize].push(i);
        }
    }

    let mut edges: Vec<Edge> = original.to_vec();
    let mut labels = g.labels().to_vec();
    let mut node_types = g.node_types().to_vec();
    let mut pairs = Vec::with_capacity(sampled.len());
    for &u in &sampled {
        let replica = labels.len() as NodeId;
        labels.push(format!("{}{REPLICA_SUFFIX}", g.label(u)));
        node_types.push(g.node_type(u));
        pairs.push((u, replica));
        let redirect = |e: &Edge| -> Edge {
            let mut out = e.clone();
            if out.src == u {
                out.src = replica;
            }
            if out.dst == u {
                out.dst = replica;
            }
            out
        };
        for &i in &incident[u as usize] {
            let keep = rng.gen::<f64>() < params.p1;
            let duplicate = rng.gen::<f64>() < params.p2;
            let before = edges[i].clone();
            if !keep {
                edges[i] = redirect(&before);
            }
            if duplicate {
                edges.push(redirect(&before));
            }
        }
    }

    let perturbed = TemporalGraph::from_labeled_parts(
        labels,
        node_types,
        g.node_type_names().to_vec(),
        edges,
        g.edge_type_names().to_vec(),
        g.is_directed(),
        g.is_temporal(),
    )?;
    Ok((perturbed, ReplicaGroundTruth { pairs, params: *params }))
}

fn unordered(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    (u.min(v), u.max(v))
}

/// As many uniformly drawn node pairs from `pool` as there are positives, none of
/// them a self-pair, a positive pair, or a repeat.
pub fn sample_negatives<R: Rng>(
    positives: &[(NodeId, NodeId)],
    pool: &[NodeId],
    rng: &mut R,
) -> Result<Vec<(NodeId, NodeId)>> {
    let mut nodes: Vec<NodeId> = pool.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    let forbidden: HashSet<(NodeId, NodeId)> = positives.iter().map(|&(u, v)| unordered(u, v)).collect();
    let members: HashSet<NodeId> = nodes.iter().copied().collect();
    let blocked = forbidden.iter().filter(|(u, v)| u != v && members.contains(u) && members.contains(v)).count();
    let total = nodes.len() * nodes.len().saturating_sub(1) / 2;
    let available = total - blocked;
    let wanted = positives.len();
    if available < wanted {
        return Err(Error::validation(format!(
            "node pool allows only {available} negative pairs, {wanted} needed"
        )));
    }

    if available <= 4 * wanted {
        let mut all = Vec::with_capacity(available);
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &nodes[i + 1..] {
                if !forbidden.contains(&(u, v)) {
                    all.push((u, v));
                }
            }
        }
        return Ok(all.choose_multiple(rng, wanted).copied().collect());
    }

    let mut chosen = HashSet::with_capacity(wanted);
    let mut out = Vec::with_capacity(wanted);
    while out.len() < wanted {
        let u = nodes[rng.gen_range(0..nodes.len())];
        let v = nodes[rng.gen_range(0..nodes.len())];
        let key = unordered(u, v);
        if u == v || forbidden.contains(&key) || !chosen.insert(key) {
            continue;
        }
        out.push((u, v));
    }
    Ok(out)
}

/// Stratified split: within each class, `round(ratio * count)` pairs go to training.
pub fn split_pairs(pairs: &[LabeledPair], ratio: f64, seed: u64) -> Result<(Vec<LabeledPair>, Vec<LabeledPair>)> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::validation(format!("split ratio {ratio} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [true, false] {
        let mut members: Vec<LabeledPair> = pairs.iter().copied().filter(|p| p.label == class).collect();
        if members.is_empty() {
            return Err(Error::validation(format!("no pairs with label {}", u8::from(class))));
        }
        members.shuffle(&mut rng);
        let cut = (ratio * members.len() as f64).round() as usize;
        test.extend_from_slice(&members[cut..]);
        train.extend_from_slice(&members[..cut]);
    }
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    /// `None` when the labels hold a single class.
    pub auc: Option<f64>,
    pub accuracy: f64,
    pub f1: f64,
    pub positives: usize,
    pub negatives: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

impl MetricReport {
    pub fn auc(&self) -> Result<f64> {
        self.auc.ok_or(Error::UndefinedAuc)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.true_positives, self.true_positives + self.false_positives)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.true_positives, self.true_positives + self.false_negatives)
    }

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        if let Some(auc) = self.auc {
            let _ = writeln!(s, "auc={auc:.6}");
        }
        let _ = writeln!(s, "accuracy={:.6}", self.accuracy);
        let _ = writeln!(s, "f1={:.6}", self.f1);
        let _ = writeln!(s, "positives={}", self.positives);
        let _ = writeln!(s, "negatives={}", self.negatives);
        s
    }

    pub fn to_json(&self) -> String {
        let auc = self.auc.map_or("null".to_string(), |a| format!("{a:.6}"));
        format!(
            "{{\"auc\": {auc}, \"accuracy\": {:.6}, \"f1\": {:.6}, \"positives\": {}, \"negatives\": {}, \
             \"tp\": {}, \"fp\": {}, \"tn\": {}, \"fn\": {}}}",
            self.accuracy,
            self.f1,
            self.positives,
            self.negatives,
            self.true_positives,
            self.false_positives,
            self.true_negatives,
            self.false_negatives
        )
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Probability that a random positive outscores a random negative, ties counting half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::validation("scores and labels differ in length"));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedAuc);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::validation("scores contain NaN"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Mid-ranks (1-based) for tied groups.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let p = positives as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}

/// AUC, accuracy and positive-class F1 with predictions `score >= threshold`.
pub fn compute_metrics(scores: &[f64], labels: &[bool], threshold: f64) -> Result<MetricReport> {
    let predicted: Vec<bool> = scores.iter().map(|&s| s >= threshold).collect();
    let mut report = decision_metrics(&predicted, labels)?;
    report.auc = match roc_auc(scores, labels) {
        Ok(a) => Some(a),
        Err(Error::UndefinedAuc) => None,
        Err(e) => return Err(e),
    };
    Ok(report)
}

/// Accuracy and F1 of hard decisions; AUC is left undefined.
pub fn decision_metrics(predicted: &[bool], labels: &[bool]) -> Result<MetricReport> {
    if predicted.len() != labels.len() {
        return Err(Error::validation("predictions and labels differ in length"));
    }
    let (mut tp, mut fp, mut tn, mut fneg) = (0, 0, 0, 0);
    for (&p, &l) in predicted.iter().zip(labels) {
        match (p, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fneg += 1,
        }
    }
    let f1 = ratio(2 * tp, 2 * tp + fp + fneg);
    Ok(MetricReport {
        auc: None,
        accuracy: ratio(tp + tn, labels.len()),
        f1,
        positives: tp + fneg,
        negatives: tn + fp,
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fneg,
    })
}
