//! User stitching over sketches: a supervised pair classifier and unsupervised
//! candidate generation by banding.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::hashing::{BitVector, SketchMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabeledPair {
    pub u: NodeId,
    pub v: NodeId,
    pub label: bool,
}

impl LabeledPair {
    pub fn new(u: NodeId, v: NodeId, label: bool) -> Self {
        LabeledPair { u, v, label }
    }

    pub fn swapped(self) -> Self {
        LabeledPair { u: self.v, v: self.u, label: self.label }
    }
}

/// Reads `label_u<TAB>label_v<TAB>{0,1}` lines. Blank lines and `#` comments are skipped.
pub fn parse_pairs<R: BufRead>(reader: R, lookup: impl Fn(&str) -> Option<NodeId>) -> Result<Vec<LabeledPair>> {
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(i + 1, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [a, b, label] = fields[..] else {
            return Err(Error::parse(i + 1, "expected 'label_u<TAB>label_v<TAB>0|1'"));
        };
        let resolve = |name: &str| {
            lookup(name).ok_or_else(|| Error::Domain(format!("line {}: unknown node '{name}'", i + 1)))
        };
        let label = match label.trim() {
            "1" => true,
            "0" => false,
            other => return Err(Error::parse(i + 1, format!("pair label must be 0 or 1, got '{other}'"))),
        };
        pairs.push(LabeledPair::new(resolve(a.trim())?, resolve(b.trim())?, label));
    }
    Ok(pairs)
}

pub fn write_pairs<W: Write>(pairs: &[LabeledPair], labels: &[String], mut out: W) -> std::io::Result<()> {
    for p in pairs {
        writeln!(out, "{}\t{}\t{}", labels[p.u as usize], labels[p.v as usize], u8::from(p.label))?;
    }
    out.flush()
}

/// Feature rows for the classifier. Built from sketches, a row is `[z_u, z_v]` as 0/1 reals.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<bool>,
    pairs: Vec<LabeledPair>,
}

impl PairDataset {
    pub fn from_sketches(z: &SketchMatrix, pairs: &[LabeledPair]) -> Result<Self> {
        let k = z.num_bits();
        let mut features = Vec::with_capacity(pairs.len() * 2 * k);
        for p in pairs {
            for node in [p.u, p.v] {
                if node as usize >= z.num_rows() {
                    return Err(Error::Domain(format!("pair references node {node} without a sketch")));
                }
                features.extend(z.row_as_f64(node as usize));
            }
        }
        Ok(PairDataset {
            dim: 2 * k,
            features,
            labels: pairs.iter().map(|p| p.label).collect(),
            pairs: pairs.to_vec(),
        })
    }

    /// Every pair in both `(u, v)` and `(v, u)` order.
    pub fn from_sketches_both_orders(z: &SketchMatrix, pairs: &[LabeledPair]) -> Result<Self> {
        let both: Vec<LabeledPair> = pairs.iter().flat_map(|&p| [p, p.swapped()]).collect();
        PairDataset::from_sketches(z, &both)
    }

    /// Arbitrary feature rows, for models not tied to sketches.
    pub fn from_features(rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::validation("feature rows and labels differ in count"));
        }
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::validation("feature rows differ in length"));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::validation("feature values must be finite"));
        }
        let pairs = labels.iter().map(|&l| LabeledPair::new(0, 0, l)).collect();
        Ok(PairDataset { dim, features: rows.concat(), labels, pairs })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn pairs(&self) -> &[LabeledPair] {
        &self.pairs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticConfig {
    /// Inverse regularization strength (larger means weaker L2 penalty).
    pub lambda: f64,
    /// Stop once every gradient component is below this in absolute value.
    pub tol: f64,
    /// Newton iterations.
    pub max_iter: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig { lambda: 1.0, tol: 1e-4, max_iter: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub tol: f64,
    pub iterations: usize,
    pub converged: bool,
    trained: bool,
}

impl LogisticModel {
    pub fn untrained(dim: usize, config: &LogisticConfig) -> Self {
        LogisticModel {
            weights: vec![0.0; dim],
            bias: 0.0,
            lambda: config.lambda,
            tol: config.tol,
            iterations: 0,
            converged: false,
            trained: false,
        }
    }

    /// A model with fixed parameters, marked trained.
    pub fn with_parameters(weights: Vec<f64>, bias: f64) -> Self {
        LogisticModel {
            weights,
            bias,
            lambda: f64::INFINITY,
            tol: 0.0,
            iterations: 0,
            converged: true,
            trained: true,
        }
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Objective `mean_i log(1 + exp(-y_i (w.x_i + b))) + |w|^2 / (2 lambda n)` with
/// `y_i` in `{-1, +1}`, and its gradient `(dw, db)`. The bias is not penalized.
pub fn logistic_objective(data: &PairDataset, weights: &[f64], bias: f64, lambda: f64) -> (f64, Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; data.dim];
    let mut grad_b = 0.0;
    for i in 0..data.len() {
        let x = data.row(i);
        let z = dot(weights, x) + bias;
        let y = if data.labels[i] { 1.0 } else { -1.0 };
        loss += softplus(-y * z);
        // d/dz log(1 + exp(-y z)) = sigmoid(z) - [y = 1]
        let r = sigmoid(z) - if data.labels[i] { 1.0 } else { 0.0 };
        if r != 0.0 {
            for (g, xi) in grad.iter_mut().zip(x) {
                *g += r * xi;
            }
        }
        grad_b += r;
    }
    let reg = 1.0 / (lambda * n);
    let penalty: f64 = weights.iter().map(|w| w * w).sum::<f64>() * reg / 2.0;
    for (g, w) in grad.iter_mut().zip(weights) {
        *g = *g / n + reg * w;
    }
    (loss / n + penalty, grad, grad_b / n)
}

/// Hessian of [`logistic_objective`] over `(w, b)`; the bias is the last coordinate.
fn logistic_hessian(data: &PairDataset, weights: &[f64], bias: f64, lambda: f64) -> DMatrix<f64> {
    let d = data.dim;
    let n = data.len() as f64;
    let mut h = DMatrix::<f64>::zeros(d + 1, d + 1);
    let mut x1 = vec![1.0; d + 1];
    for i in 0..data.len() {
        let x = data.row(i);
        let p = sigmoid(dot(weights, x) + bias);
        let s = p * (1.0 - p) / n;
        if s == 0.0 {
            continue;
        }
        x1[..d].copy_from_slice(x);
        // Lower triangle only; mirrored below.
        for a in 0..=d {
            if x1[a] == 0.0 {
                continue;
            }
            let sa = s * x1[a];
            for b in 0..=a {
                h[(a, b)] += sa * x1[b];
            }
        }
    }
    let reg = 1.0 / (lambda * n);
    for a in 0..d {
        h[(a, a)] += reg;
    }
    h[(d, d)] += 1e-12;
    h.fill_upper_triangle_with_lower_triangle();
    h
}

/// Newton's method with backtracking on the (strictly convex) objective. Falls
/// back to a gradient step if the Hessian is numerically singular.
pub fn train_logistic(data: &PairDataset, config: &LogisticConfig) -> Result<LogisticModel> {
    if data.is_empty() {
        return Err(Error::validation("cannot train on an empty dataset"));
    }
    let positives = data.labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == data.len() {
        return Err(Error::validation("training data must contain both classes"));
    }
    if !(config.lambda > 0.0 && config.tol > 0.0) {
        return Err(Error::validation("lambda and tol must be positive"));
    }

    let d = data.dim;
    let mut model = LogisticModel::untrained(d, config);
    let (mut value, mut grad, mut grad_b) = logistic_objective(data, &model.weights, model.bias, config.lambda);
    for iter in 0..config.max_iter {
        let gmax = grad.iter().fold(grad_b.abs(), |m, g| m.max(g.abs()));
        if gmax < config.tol {
            model.converged = true;
            model.iterations = iter;
            break;
        }
        let g = DVector::from_iterator(d + 1, grad.iter().copied().chain([grad_b]));
        let hessian = logistic_hessian(data, &model.weights, model.bias, config.lambda);
        let direction = match hessian.cholesky() {
            Some(c) => c.solve(&g),
            None => g.clone(),
        };
        let slope = direction.dot(&g);
        let mut step = 1.0;
        loop {
            let w: Vec<f64> = model.weights.iter().zip(direction.iter()).map(|(w, p)| w - step * p).collect();
            let b = model.bias - step * direction[d];
            let (v, gw, gb) = logistic_objective(data, &w, b, config.lambda);
            if v <= value - 1e-4 * step * slope || step < 1e-10 {
                model.weights = w;
                model.bias = b;
                value = v;
                grad = gw;
                grad_b = gb;
                break;
            }
            step *= 0.5;
        }
        model.iterations = iter + 1;
    }
    if !model.converged {
        let gmax = grad.iter().fold(grad_b.abs(), |m, g| m.max(g.abs()));
        model.converged = gmax < config.tol;
    }
    model.trained = true;
    Ok(model)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub scores: Vec<f64>,
    pub labels: Vec<bool>,
}

/// Scores in (0, 1) and labels at threshold 0.5.
pub fn predict_pairs(model: &LogisticModel, data: &PairDataset) -> Result<Predictions> {
    if !model.trained {
        return Err(Error::State("model has not been trained".into()));
    }
    if data.dim != model.weights.len() {
        return Err(Error::validation(format!(
            "model expects {} features, data has {}",
            model.weights.len(),
            data.dim
        )));
    }
    let scores: Vec<f64> = (0..data.len()).map(|i| model.score(data.row(i))).collect();
    let labels = scores.iter().map(|&s| s >= 0.5).collect();
    Ok(Predictions { scores, labels })
}

/// One band: sampled bit positions and the buckets of nodes sharing them.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    /// Absolute bit positions within a sketch row.
    pub positions: Vec<usize>,
    buckets: Vec<Vec<NodeId>>,
    assignment: Vec<u32>,
}

impl Band {
    pub fn buckets(&self) -> &[Vec<NodeId>] {
        &self.buckets
    }

    pub fn bucket_of(&self, u: NodeId) -> u32 {
        self.assignment[u as usize]
    }
}

/// One band per sketch segment. Nodes agreeing on all sampled bits of a band share
/// its bucket (AND); a pair is a candidate when it shares a bucket in any band (OR).
#[derive(Debug, Clone, PartialEq)]
pub struct BucketTable {
    pub band_bits: usize,
    pub seed: u64,
    num_nodes: usize,
    bands: Vec<Band>,
}

/// Bit positions for each band. Below the full segment width, positions are drawn
/// uniformly with replacement; at full width the band is the whole segment.
pub fn sample_band_positions(z: &SketchMatrix, band_bits: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let smallest = z.segment_lengths().iter().copied().min().unwrap_or(0);
    if band_bits == 0 || band_bits > smallest {
        return Err(Error::validation(format!(
            "band width {band_bits} must be in 1..={smallest} (smallest segment)"
        )));
    }
    let mut out = Vec::with_capacity(z.segment_lengths().len());
    for dt in 1..=z.segment_lengths().len() {
        let range = z.segment_range(dt);
        if band_bits == range.len() {
            out.push(range.collect());
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(dt as u64);
        out.push((0..band_bits).map(|_| rng.gen_range(range.clone())).collect());
    }
    Ok(out)
}

pub fn build_buckets(z: &SketchMatrix, band_bits: usize, seed: u64) -> Result<BucketTable> {
    let positions = sample_band_positions(z, band_bits, seed)?;
    let bands = positions
        .into_iter()
        .map(|positions| {
            let signatures: Vec<BitVector> = (0..z.num_rows())
                .into_par_iter()
                .map(|u| {
                    let mut sig = BitVector::zeros(positions.len());
                    for (o, &p) in positions.iter().enumerate() {
                        if z.bit(u, p) {
                            sig.set(o, true);
                        }
                    }
                    sig
                })
                .collect();
            let mut index: HashMap<BitVector, u32> = HashMap::new();
            let mut buckets: Vec<Vec<NodeId>> = Vec::new();
            let mut assignment = Vec::with_capacity(signatures.len());
            for (u, sig) in signatures.into_iter().enumerate() {
                let id = *index.entry(sig).or_insert_with(|| {
                    buckets.push(Vec::new());
                    (buckets.len() - 1) as u32
                });
                buckets[id as usize].push(u as NodeId);
                assignment.push(id);
            }
            Band { positions, buckets, assignment }
        })
        .collect();
    Ok(BucketTable { band_bits, seed, num_nodes: z.num_rows(), bands })
}

impl BucketTable {
    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn is_candidate(&self, u: NodeId, v: NodeId) -> Result<bool> {
        for node in [u, v] {
            if node as usize >= self.num_nodes {
                return Err(Error::Domain(format!("node {node} is not in the bucket table")));
            }
        }
        Ok(self.bands.iter().any(|b| b.bucket_of(u) == b.bucket_of(v)))
    }

    /// `sum over bands and buckets of C(|bucket|, 2)`; bounds the candidate count.
    pub fn candidate_pair_bound(&self) -> usize {
        self.bands
            .iter()
            .flat_map(|b| b.buckets.iter())
            .map(|bucket| bucket.len() * bucket.len().saturating_sub(1) / 2)
            .sum()
    }

    /// All distinct co-bucketed pairs `(u, v)` with `u < v`, sorted.
    pub fn candidate_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut seen = HashSet::new();
        for band in &self.bands {
            for bucket in &band.buckets {
                for (i, &u) in bucket.iter().enumerate() {
                    for &v in &bucket[i + 1..] {
                        seen.insert((u.min(v), u.max(v)));
                    }
                }
            }
        }
        let mut out: Vec<_> = seen.into_iter().collect();
        out.sort_unstable();
        out
    }
}

/// Positive exactly when the two nodes share a bucket in at least one band.
pub fn stitch_unsupervised(table: &BucketTable, pairs: &[(NodeId, NodeId)]) -> Result<Vec<bool>> {
    pairs.iter().map(|&(u, v)| table.is_candidate(u, v)).collect()
}
