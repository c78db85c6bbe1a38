//! Naive reference implementations and fixtures shared by the integration
//! tests. The references are written for clarity, not speed, and share no
//! code with the library.
#![allow(dead_code, clippy::needless_range_loop)]

use fedlearn_edu::dataset::EncodedDataset;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn naive_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let mut hits = 0;
    for i in 0..truth.len() {
        if pred[i] == truth[i] {
            hits += 1;
        }
    }
    hits as f64 * 100.0 / truth.len() as f64
}

fn confusion(pred: &[usize], truth: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; k]; k];
    for i in 0..truth.len() {
        m[truth[i]][pred[i]] += 1;
    }
    m
}

pub fn naive_recall(pred: &[usize], truth: &[usize], k: usize) -> f64 {
    let m = confusion(pred, truth, k);
    let mut sum = 0.0;
    let mut classes = 0;
    for c in 0..k {
        let actual: usize = m[c].iter().sum();
        if actual > 0 {
            sum += m[c][c] as f64 / actual as f64;
            classes += 1;
        }
    }
    sum / classes as f64
}

pub fn naive_f1(pred: &[usize], truth: &[usize], k: usize) -> f64 {
    let m = confusion(pred, truth, k);
    let mut sum = 0.0;
    let mut classes = 0;
    for c in 0..k {
        let actual: usize = m[c].iter().sum();
        if actual == 0 {
            continue;
        }
        let predicted: usize = (0..k).map(|t| m[t][c]).sum();
        let tp = m[c][c] as f64;
        let precision = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
        let recall = tp / actual as f64;
        sum += if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        classes += 1;
    }
    sum / classes as f64
}

/// Pair counting over every (positive, negative) pair.
pub fn naive_binary_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let mut wins = 0.0;
    let mut pairs = 0usize;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if positive[i] && !positive[j] {
                pairs += 1;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    (pairs > 0).then(|| wins / pairs as f64)
}

/// `None` where the library reports an error (no class has both
/// positives and negatives).
pub fn naive_auc(scores: &Array2<f64>, truth: &[usize], k: usize) -> Option<f64> {
    if k == 2 {
        let col: Vec<f64> = (0..truth.len()).map(|i| scores[[i, scores.ncols() - 1]]).collect();
        let pos: Vec<bool> = truth.iter().map(|&t| t == 1).collect();
        return naive_binary_auc(&col, &pos);
    }
    let mut aucs = Vec::new();
    for c in 0..k {
        let col: Vec<f64> = (0..truth.len()).map(|i| scores[[i, c]]).collect();
        let pos: Vec<bool> = truth.iter().map(|&t| t == c).collect();
        if let Some(a) = naive_binary_auc(&col, &pos) {
            aucs.push(a);
        }
    }
    (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64)
}

/// Every vector of length `n` over `0..k`, in lexicographic order.
pub fn all_label_vectors(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..k).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

/// Scores on a coarse grid so that ties are common.
pub fn tied_scores(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, k), |_| rng.random_range(0..4) as f64 / 4.0)
}

/// Gaussian-ish classes around distinct centers, with names and labels
/// in range and every class present.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize, k: usize) -> EncodedDataset {
    let labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
    let features = Array2::from_shape_fn((n, d), |(i, j)| {
        let center = if j % k == labels[i] { 1.0 } else { 0.0 };
        center + rng.random_range(-1.0..1.0)
    });
    EncodedDataset::new(features, labels, k).unwrap()
}
