//! Monte Carlo and numerical checks against closed-form or brute-force oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tempsketch::eval::{compute_metrics, decision_metrics, inject_replicas, sample_negatives};
use tempsketch::hashing::{estimate_similarity, generate_hyperplanes};
use tempsketch::pipeline::{derive_seed, evaluate_supervised, EvalParams};
use tempsketch::stitching::{logistic_objective, train_logistic, LogisticConfig, PairDataset};
use tempsketch::{simhash, Edge, ReplicaParams, TemporalGraph};

fn random_dataset(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> PairDataset {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let labels = rows.iter().map(|r| r[0] + 0.3 * r[1] + rng.gen_range(-0.5..0.5) > 0.0).collect();
    PairDataset::from_features(rows, labels).unwrap()
}

#[test]
fn logistic_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = random_dataset(&mut rng, 60, 5);
    let h = 1e-5;
    for _ in 0..10 {
        let w: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let lambda = rng.gen_range(0.1..3.0);
        let (_, grad, grad_b) = logistic_objective(&data, &w, b, lambda);
        let f = |w: &[f64], b: f64| logistic_objective(&data, w, b, lambda).0;
        for j in 0..=5 {
            let numeric = if j < 5 {
                let (mut up, mut down) = (w.clone(), w.clone());
                up[j] += h;
                down[j] -= h;
                (f(&up, b) - f(&down, b)) / (2.0 * h)
            } else {
                (f(&w, b + h) - f(&w, b - h)) / (2.0 * h)
            };
            let analytic = if j < 5 { grad[j] } else { grad_b };
            let rel = (numeric - analytic).abs() / analytic.abs().max(1e-8);
            assert!(rel < 1e-4 || (numeric - analytic).abs() < 1e-9, "coord {j}: {analytic} vs {numeric}");
        }
    }
}

#[test]
fn training_reaches_the_stopping_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data = random_dataset(&mut rng, 200, 4);
    let config = LogisticConfig::default();
    let model = train_logistic(&data, &config).unwrap();
    assert!(model.converged);
    let (_, grad, grad_b) = logistic_objective(&data, &model.weights, model.bias, config.lambda);
    assert!(grad.iter().chain([&grad_b]).all(|g| g.abs() < config.tol));
}

// The penalty is divided by n, so duplicating every row only leaves the optimum
// unchanged when lambda is halved as well.
#[test]
fn duplicated_data_with_half_lambda_gives_the_same_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..80).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let labels: Vec<bool> = rows.iter().map(|r| r[0] - r[2] > rng.gen_range(-0.4..0.4)).collect();
    let single = PairDataset::from_features(rows.clone(), labels.clone()).unwrap();
    let double = PairDataset::from_features(
        rows.iter().chain(&rows).cloned().collect(),
        labels.iter().chain(&labels).copied().collect(),
    )
    .unwrap();
    let tight = LogisticConfig { tol: 1e-9, ..LogisticConfig::default() };
    let a = train_logistic(&single, &tight).unwrap();
    let b = train_logistic(&double, &LogisticConfig { lambda: 0.5, ..tight }).unwrap();
    for (x, y) in a.weights.iter().zip(&b.weights) {
        assert!((x - y).abs() < 1e-6, "{x} vs {y}");
    }
    assert!((a.bias - b.bias).abs() < 1e-6);
}

#[test]
fn f1_matches_confusion_matrix_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let n = rng.gen_range(1..30);
        let predicted: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        let r = decision_metrics(&predicted, &labels).unwrap();
        let count = |p: bool, l: bool| predicted.iter().zip(&labels).filter(|&(&a, &b)| a == p && b == l).count() as f64;
        let (tp, fp, fneg) = (count(true, true), count(true, false), count(false, true));
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fneg > 0.0 { tp / (tp + fneg) } else { 0.0 };
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        assert!((r.f1 - f1).abs() < 1e-12);
        assert!((r.accuracy - (tp + count(false, false)) / n as f64).abs() < 1e-12);
    }
}

#[test]
fn worked_auc_example() {
    let r = compute_metrics(&[0.9, 0.8, 0.4, 0.3], &[true, false, true, false], 0.5).unwrap();
    assert_eq!(r.auc, Some(0.75));
    let r = compute_metrics(&[0.3, 0.3, 0.3], &[true, false, true], 0.5).unwrap();
    assert_eq!(r.auc, Some(0.5));
}

fn chi_square(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

// Critical value of chi-square with 13 degrees of freedom at p = 0.001 is 34.53.
#[test]
fn negative_pairs_are_uniform() {
    let pool: Vec<u32> = (0..6).collect();
    let positives = [(0, 1)];
    let index = |u: u32, v: u32| {
        let (a, b) = (u.min(v), u.max(v));
        (a * 6 + b) as usize
    };
    let slots: Vec<usize> = (0..6u32)
        .flat_map(|a| (a + 1..6).map(move |b| (a, b)))
        .filter(|&p| p != (0, 1))
        .map(|(a, b)| index(a, b))
        .collect();
    assert_eq!(slots.len(), 14);
    for wanted in [1usize, 4] {
        let positives: Vec<(u32, u32)> = positives.iter().copied().cycle().take(wanted).collect();
        let mut counts = vec![0usize; 36];
        let mut rng = ChaCha8Rng::seed_from_u64(5 + wanted as u64);
        for _ in 0..20_000 {
            for (u, v) in sample_negatives(&positives, &pool, &mut rng).unwrap() {
                assert_ne!(u, v);
                counts[index(u, v)] += 1;
            }
        }
        let observed: Vec<usize> = slots.iter().map(|&s| counts[s]).collect();
        assert_eq!(counts[index(0, 1)], 0);
        let stat = chi_square(&observed);
        assert!(stat < 34.53, "chi-square {stat} for {wanted} draws per call");
    }
}

fn hub_graph(seed: u64) -> TemporalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 120u32;
    let edges = (0..900)
        .map(|_| {
            // Skewed endpoints give a spread of degrees.
            let u = (rng.gen::<f64>().powi(2) * n as f64) as u32;
            let mut v = rng.gen_range(0..n);
            if v == u {
                v = (v + 1) % n;
            }
            Edge::at(u, v, rng.gen_range(0..1000))
        })
        .collect();
    TemporalGraph::from_edges(n as usize, edges, false, None).unwrap()
}

#[test]
fn replica_moves_and_copies_at_the_stated_rates() {
    let g = hub_graph(6);
    let m = g.num_edges();
    let (mut kept, mut incident) = (0usize, 0usize);
    let (mut observed, mut expected) = (0.0, 0.0);
    for seed in 0..400 {
        let params = ReplicaParams { fraction: 0.1, p1: 0.6, p2: 0.3, seed };
        let (h, truth) = inject_replicas(&g, &params).unwrap();
        let mut touched = 0usize;
        for (i, e) in g.edges().iter().enumerate() {
            let now = &h.edges()[i];
            for &(u, r) in &truth.pairs {
                if e.src == u || e.dst == u {
                    touched += 1;
                    incident += 1;
                    if now.src == u || now.dst == u {
                        kept += 1;
                    } else {
                        assert!(now.src == r || now.dst == r);
                    }
                }
            }
        }
        observed += h.num_edges() as f64;
        expected += m as f64 + params.p2 * touched as f64;
    }
    let keep_rate = kept as f64 / incident as f64;
    assert!((keep_rate - 0.6).abs() < 0.02, "kept {keep_rate}");
    let rel = (observed - expected).abs() / expected;
    assert!(rel < 0.02, "mean edge count off by {rel}");
}

#[test]
fn replicas_only_for_above_average_degree() {
    let g = hub_graph(7);
    let mean = (0..g.num_nodes() as u32).map(|u| g.degree_profile(u).unwrap().total as f64).sum::<f64>()
        / g.num_nodes() as f64;
    let eligible = (0..g.num_nodes() as u32).filter(|&u| g.degree_profile(u).unwrap().total as f64 > mean).count();
    let (h, truth) = inject_replicas(&g, &ReplicaParams::default()).unwrap();
    assert_eq!(truth.pairs.len(), ((0.05 * eligible as f64).round() as usize).max(1));
    for (i, &(u, r)) in truth.pairs.iter().enumerate() {
        assert!(g.degree_profile(u).unwrap().total as f64 > mean);
        assert_eq!(r as usize, g.num_nodes() + i);
        assert_eq!(h.label(r), format!("{}~rep", g.label(u)));
    }
}

#[test]
fn agreement_at_right_angle_is_one_half() {
    let planes = generate_hyperplanes(2, 4096, 8).unwrap();
    let a = simhash(&[1.0, 0.0], &planes).unwrap();
    let b = simhash(&[0.0, 1.0], &planes).unwrap();
    assert!((estimate_similarity(&a, &b).unwrap() - 0.5).abs() < 0.03);
}

#[test]
fn mean_agreement_falls_with_angle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h: Vec<f64> = (0..30).map(|_| rng.gen_range(0.0..5.0)).collect();
    let near: Vec<f64> = h.iter().map(|x| x + rng.gen_range(0.0..1.0)).collect();
    let far: Vec<f64> = h.iter().map(|x| x + rng.gen_range(0.0..8.0)).collect();
    let cos = |a: &[f64], b: &[f64]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        dot / (a.iter().map(|x| x * x).sum::<f64>().sqrt() * b.iter().map(|x| x * x).sum::<f64>().sqrt())
    };
    assert!(cos(&h, &near) > cos(&h, &far));
    let (mut sum_near, mut sum_far) = (0.0, 0.0);
    for seed in 0..300 {
        let planes = generate_hyperplanes(30, 64, seed).unwrap();
        let z = simhash(&h, &planes).unwrap();
        sum_near += estimate_similarity(&z, &simhash(&near, &planes).unwrap()).unwrap();
        sum_far += estimate_similarity(&z, &simhash(&far, &planes).unwrap()).unwrap();
    }
    assert!(sum_near >= sum_far);
}

fn synthetic_200() -> TemporalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 200u32;
    let edges = (0..500)
        .map(|_| {
            let u = (rng.gen::<f64>().powf(2.0) * n as f64) as u32;
            let v = rng.gen_range(0..n);
            Edge::at(u, v, rng.gen_range(0..10_000))
        })
        .collect();
    TemporalGraph::from_edges(n as usize, edges, false, None).unwrap()
}

fn eval_params(seed: u64) -> EvalParams {
    let mut params = EvalParams::default();
    params.seed = seed;
    params.embed.seed = seed;
    params.replicas.seed = derive_seed(seed, 3);
    params.replicas.fraction = 0.5;
    params
}

// With p1 = p2 = 1 a replica copies the whole neighborhood of its original.
#[test]
fn full_neighborhood_replicas_are_recognized() {
    let g = synthetic_200();
    let mut total = 0.0;
    for seed in 0..5 {
        let mut params = eval_params(seed);
        params.replicas.p1 = 1.0;
        params.replicas.p2 = 1.0;
        let out = evaluate_supervised(&g, None, &params).unwrap();
        let (u, r) = out.benchmark.truth.pairs[0];
        assert_eq!(out.embedding.sketches.row(u as usize), out.embedding.sketches.row(r as usize));
        total += out.run.report.auc.unwrap();
    }
    let mean = total / 5.0;
    assert!(mean >= 0.65, "mean AUC {mean}");
}

#[test]
fn shuffled_labels_give_chance_auc() {
    let g = synthetic_200();
    let mut total = 0.0;
    for seed in 0..10 {
        let mut params = eval_params(seed);
        params.shuffle_labels = true;
        total += evaluate_supervised(&g, None, &params).unwrap().run.report.auc.unwrap();
    }
    let mean = total / 10.0;
    assert!((mean - 0.5).abs() <= 0.05, "mean AUC {mean}");
}
