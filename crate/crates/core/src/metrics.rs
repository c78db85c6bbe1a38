//! Accuracy, macro recall, macro F1 and ROC AUC.
//!
//! Multiclass recall, F1 and AUC are macro averages over the classes that
//! occur in the ground truth; classes absent from the truth are left out
//! of the mean rather than counted as zero.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};
use crate::models::{argmax_rows, predict_scores, Model};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Percentage in `[0, 100]`.
    pub accuracy_pct: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc_roc: f64,
    pub n_samples: usize,
}

impl MetricsReport {
    /// Field-wise arithmetic mean; `n_samples` is summed.
    pub fn mean(reports: &[MetricsReport]) -> Result<MetricsReport> {
        if reports.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = reports.len() as f64;
        let avg = |f: fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        Ok(MetricsReport {
            accuracy_pct: avg(|r| r.accuracy_pct),
            recall: avg(|r| r.recall),
            f1: avg(|r| r.f1),
            auc_roc: avg(|r| r.auc_roc),
            n_samples: reports.iter().map(|r| r.n_samples).sum(),
        })
    }
}

fn check_lengths(pred: &[usize], truth: &[usize]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Empty);
    }
    Ok(())
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(100.0 * hits as f64 / truth.len() as f64)
}

/// Per-class (tp, fp, fn) counts.
fn class_counts(pred: &[usize], truth: &[usize], n_classes: usize) -> Result<Vec<(usize, usize, usize)>> {
    check_lengths(pred, truth)?;
    let mut counts = vec![(0, 0, 0); n_classes];
    for (&p, &t) in pred.iter().zip(truth) {
        if p >= n_classes || t >= n_classes {
            return Err(Error::ShapeMismatch(format!(
                "label {} out of range for {n_classes} classes",
                p.max(t)
            )));
        }
        if p == t {
            counts[t].0 += 1;
        } else {
            counts[p].1 += 1;
            counts[t].2 += 1;
        }
    }
    Ok(counts)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn recall_macro(pred: &[usize], truth: &[usize], n_classes: usize) -> Result<f64> {
    let counts = class_counts(pred, truth, n_classes)?;
    let present: Vec<f64> = counts
        .iter()
        .filter(|(tp, _, fn_)| tp + fn_ > 0)
        .map(|&(tp, _, fn_)| ratio(tp, tp + fn_))
        .collect();
    Ok(present.iter().sum::<f64>() / present.len() as f64)
}

pub fn f1_macro(pred: &[usize], truth: &[usize], n_classes: usize) -> Result<f64> {
    let counts = class_counts(pred, truth, n_classes)?;
    let present: Vec<f64> = counts
        .iter()
        .filter(|(tp, _, fn_)| tp + fn_ > 0)
        .map(|&(tp, fp, fn_)| {
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_);
            if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            }
        })
        .collect();
    Ok(present.iter().sum::<f64>() / present.len() as f64)
}

/// Mann-Whitney AUC from average ranks: the fraction of (positive,
/// negative) pairs where the positive scores higher, ties counting half.
/// `None` when either side is empty.
pub fn binary_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1 ..= j+1 share their mean
        let mean_rank = (i + j + 2) as f64 / 2.0;
        rank_sum += mean_rank * order[i..=j].iter().filter(|&&k| positive[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// Binary: AUC of the positive-class column (column 1, or the only
/// column). Multiclass: one-vs-rest AUC per class from that class's
/// column, averaged over classes with both positives and negatives.
pub fn auc_roc(scores: &Array2<f64>, truth: &[usize], n_classes: usize) -> Result<f64> {
    if scores.nrows() != truth.len() {
        return Err(Error::LengthMismatch {
            left: scores.nrows(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Empty);
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Invariant("non-finite score".into()));
    }
    if n_classes == 2 && (scores.ncols() == 1 || scores.ncols() == 2) {
        let column = scores.column(scores.ncols() - 1).to_vec();
        let positive: Vec<bool> = truth.iter().map(|&t| t == 1).collect();
        return binary_auc(&column, &positive).ok_or(Error::NoPositivePairs);
    }
    if scores.ncols() != n_classes {
        return Err(Error::ShapeMismatch(format!(
            "{} score columns for {n_classes} classes",
            scores.ncols()
        )));
    }
    let per_class: Vec<f64> = (0..n_classes)
        .filter_map(|c| {
            let positive: Vec<bool> = truth.iter().map(|&t| t == c).collect();
            binary_auc(&scores.column(c).to_vec(), &positive)
        })
        .collect();
    if per_class.is_empty() {
        return Err(Error::NoPositivePairs);
    }
    Ok(per_class.iter().sum::<f64>() / per_class.len() as f64)
}

/// All four metrics from a score matrix; predictions are its row argmax.
pub fn report_from_scores(scores: &Array2<f64>, truth: &[usize], n_classes: usize) -> Result<MetricsReport> {
    let pred = argmax_rows(scores);
    Ok(MetricsReport {
        accuracy_pct: accuracy(&pred, truth)?,
        recall: recall_macro(&pred, truth, n_classes)?,
        f1: f1_macro(&pred, truth, n_classes)?,
        auc_roc: auc_roc(scores, truth, n_classes)?,
        n_samples: truth.len(),
    })
}

pub fn evaluate(model: &Model, data: &EncodedDataset) -> Result<MetricsReport> {
    let scores = predict_scores(model, &data.features)?;
    report_from_scores(&scores, &data.labels, data.n_classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[2, 0, 1], &[2, 0, 1]).unwrap(), 100.0);
        assert!((accuracy(&[1, 1, 1], &[1, 0, 1]).unwrap() - 200.0 / 3.0).abs() < 1e-12);
        assert!(matches!(accuracy(&[1], &[1, 0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(accuracy(&[], &[]), Err(Error::Empty)));
    }

    #[test]
    fn recall_examples() {
        assert_eq!(recall_macro(&[0, 1, 2], &[0, 1, 2], 3).unwrap(), 1.0);
        // class 0: 1 of 2; class 1: 1 of 1; class 2: 0 of 1
        assert!((recall_macro(&[0, 1, 1, 1], &[0, 0, 1, 2], 3).unwrap() - 0.5).abs() < 1e-15);
        // everything predicted negative: positive-class recall 0, negative 1
        assert_eq!(recall_macro(&[0, 0, 0, 0], &[0, 0, 1, 1], 2).unwrap(), 0.5);
    }

    #[test]
    fn f1_examples() {
        assert_eq!(f1_macro(&[1, 0], &[1, 0], 2).unwrap(), 1.0);
        // class 1 only in truth: precision 1, recall 0.5
        let f1 = f1_macro(&[1, 0], &[1, 1], 2).unwrap();
        assert!((f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn auc_examples() {
        let s = array![[0.1], [0.4], [0.35], [0.8]];
        assert!((auc_roc(&s, &[0, 0, 1, 1], 2).unwrap() - 0.75).abs() < 1e-15);
        let perfect = array![[0.9, 0.1], [0.8, 0.2], [0.3, 0.7]];
        assert_eq!(auc_roc(&perfect, &[0, 0, 1], 2).unwrap(), 1.0);
        let flat = array![[0.5], [0.5], [0.5], [0.5]];
        assert_eq!(auc_roc(&flat, &[0, 1, 0, 1], 2).unwrap(), 0.5);
        assert!(matches!(auc_roc(&flat, &[1, 1, 1, 1], 2), Err(Error::NoPositivePairs)));
    }

    #[test]
    fn multiclass_auc_skips_absent_classes() {
        let s = array![[0.7, 0.2, 0.1], [0.1, 0.8, 0.1], [0.6, 0.3, 0.1]];
        // class 2 never occurs; classes 0 and 1 are perfectly ranked
        assert_eq!(auc_roc(&s, &[0, 1, 0], 3).unwrap(), 1.0);
    }

    #[test]
    fn mean_report() {
        let a = MetricsReport {
            accuracy_pct: 90.0,
            recall: 0.8,
            f1: 0.7,
            auc_roc: 0.9,
            n_samples: 10,
        };
        let b = MetricsReport {
            accuracy_pct: 80.0,
            recall: 0.6,
            f1: 0.5,
            auc_roc: 0.7,
            n_samples: 10,
        };
        let m = MetricsReport::mean(&[a, b]).unwrap();
        assert_eq!(m.accuracy_pct, 85.0);
        assert!((m.recall - 0.7).abs() < 1e-15);
    }
}
