use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};
use crate::models::TrainConfig;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearKind {
    Logistic,
    Svm,
}

/// Weight rows plus biases. Binary problems keep one row (positive class
/// = 1); multiclass problems keep one row per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "LinearRepr", try_from = "LinearRepr")]
pub struct LinearModel {
    pub kind: LinearKind,
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub n_classes: usize,
}

#[derive(Serialize, Deserialize)]
struct LinearRepr {
    kind: LinearKind,
    n_classes: usize,
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

impl From<LinearModel> for LinearRepr {
    fn from(m: LinearModel) -> Self {
        LinearRepr {
            kind: m.kind,
            n_classes: m.n_classes,
            weights: m.weights.outer_iter().map(|r| r.to_vec()).collect(),
            bias: m.bias.to_vec(),
        }
    }
}

impl TryFrom<LinearRepr> for LinearModel {
    type Error = Error;

    fn try_from(r: LinearRepr) -> Result<Self> {
        let rows = r.weights.len();
        let cols = r.weights.first().map_or(0, Vec::len);
        if r.weights.iter().any(|w| w.len() != cols) || r.bias.len() != rows {
            return Err(Error::ShapeMismatch("ragged weight matrix".into()));
        }
        if rows != weight_rows(r.n_classes) {
            return Err(Error::ShapeMismatch(format!(
                "{rows} weight rows for {} classes",
                r.n_classes
            )));
        }
        let flat: Vec<f64> = r.weights.into_iter().flatten().collect();
        let model = LinearModel {
            kind: r.kind,
            weights: Array2::from_shape_vec((rows, cols), flat)
                .map_err(|e| Error::ShapeMismatch(e.to_string()))?,
            bias: Array1::from(r.bias),
            n_classes: r.n_classes,
        };
        model.check_finite()?;
        Ok(model)
    }
}

fn weight_rows(n_classes: usize) -> usize {
    if n_classes == 2 {
        1
    } else {
        n_classes
    }
}

impl LinearModel {
    pub fn zeros(kind: LinearKind, n_classes: usize, n_features: usize) -> Self {
        let rows = weight_rows(n_classes);
        LinearModel {
            kind,
            weights: Array2::zeros((rows, n_features)),
            bias: Array1::zeros(rows),
            n_classes,
        }
    }

    pub fn n_features(&self) -> usize {
        self.weights.ncols()
    }

    pub fn is_binary(&self) -> bool {
        self.n_classes == 2
    }

    /// `X W^T + b`, one column per weight row.
    pub fn decision(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_features() {
            return Err(Error::ShapeMismatch(format!(
                "model expects {} features, got {}",
                self.n_features(),
                x.ncols()
            )));
        }
        Ok(x.dot(&self.weights.t()) + &self.bias)
    }

    fn check_finite(&self) -> Result<()> {
        if self.weights.iter().chain(self.bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Invariant("non-finite model parameter".into()));
        }
        Ok(())
    }

    fn check_shape(&self, kind: LinearKind, data: &EncodedDataset) -> Result<()> {
        if self.kind != kind
            || self.n_classes != data.n_classes
            || self.n_features() != data.n_features()
            || self.weights.nrows() != weight_rows(data.n_classes)
        {
            return Err(Error::ShapeMismatch(format!(
                "initial {:?} model ({} classes, {} features) does not fit {:?} data ({} classes, {} features)",
                self.kind,
                self.n_classes,
                self.n_features(),
                kind,
                data.n_classes,
                data.n_features()
            )));
        }
        Ok(())
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Class probabilities from a logistic model: sigmoid for binary (column
/// 1 is the positive class), softmax otherwise.
pub(crate) fn logistic_probabilities(model: &LinearModel, x: &Array2<f64>) -> Result<Array2<f64>> {
    let z = model.decision(x)?;
    if model.is_binary() {
        let mut out = Array2::zeros((x.nrows(), 2));
        for (i, &zi) in z.column(0).iter().enumerate() {
            let p = sigmoid(zi);
            out[[i, 0]] = 1.0 - p;
            out[[i, 1]] = p;
        }
        Ok(out)
    } else {
        let mut out = z;
        for mut row in out.outer_iter_mut() {
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            row.mapv_inplace(|v| (v - max).exp());
            let sum = row.sum();
            row.mapv_inplace(|v| v / sum);
        }
        Ok(out)
    }
}

/// Residuals `P - Y` in weight-row layout.
fn logistic_residuals(model: &LinearModel, data: &EncodedDataset) -> Result<Array2<f64>> {
    let probs = logistic_probabilities(model, &data.features)?;
    if model.is_binary() {
        let mut r = probs.slice(s![.., 1..2]).to_owned();
        for (i, &y) in data.labels.iter().enumerate() {
            r[[i, 0]] -= y as f64;
        }
        Ok(r)
    } else {
        let mut r = probs;
        for (i, &y) in data.labels.iter().enumerate() {
            r[[i, y]] -= 1.0;
        }
        Ok(r)
    }
}

/// Mean cross-entropy plus `l2 / 2 * ||W||^2` (bias unpenalized).
pub fn logistic_loss(model: &LinearModel, data: &EncodedDataset, l2: f64) -> Result<f64> {
    let z = model.decision(&data.features)?;
    let n = data.n_samples() as f64;
    let mut total = 0.0;
    for (i, &y) in data.labels.iter().enumerate() {
        let row = z.row(i);
        total += if model.is_binary() {
            // -log sigmoid(+-z), computed stably
            let signed = if y == 1 { row[0] } else { -row[0] };
            softplus(-signed)
        } else {
            log_sum_exp(row) - row[y]
        };
    }
    Ok(total / n + 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>())
}

fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

fn log_sum_exp(row: ArrayView1<f64>) -> f64 {
    let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Analytic gradient of [`logistic_loss`] with respect to weights and bias.
pub fn logistic_gradient(model: &LinearModel, data: &EncodedDataset, l2: f64) -> Result<(Array2<f64>, Array1<f64>)> {
    let n = data.n_samples() as f64;
    let residuals = logistic_residuals(model, data)?;
    let grad_w = residuals.t().dot(&data.features) / n + &(&model.weights * l2);
    let grad_b = residuals.sum_axis(Axis(0)) / n;
    Ok((grad_w, grad_b))
}

/// Full-batch gradient descent on the L2-regularized cross-entropy,
/// exactly `cfg.epochs` steps, starting from `init` or zeros.
pub fn train_logreg(data: &EncodedDataset, cfg: &TrainConfig, init: Option<&LinearModel>) -> Result<LinearModel> {
    let mut model = match init {
        Some(m) => {
            m.check_shape(LinearKind::Logistic, data)?;
            m.clone()
        }
        None => LinearModel::zeros(LinearKind::Logistic, data.n_classes, data.n_features()),
    };
    if data.n_samples() == 0 {
        return Ok(model);
    }
    for _ in 0..cfg.epochs {
        let (grad_w, grad_b) = logistic_gradient(&model, data, cfg.l2)?;
        model.weights.scaled_add(-cfg.learning_rate, &grad_w);
        model.bias.scaled_add(-cfg.learning_rate, &grad_b);
    }
    model.check_finite()?;
    Ok(model)
}

fn svm_target(model: &LinearModel, row: usize, label: usize) -> f64 {
    let positive = if model.is_binary() { label == 1 } else { label == row };
    if positive {
        1.0
    } else {
        -1.0
    }
}

/// `l2 / 2 * ||W||^2 + mean_i sum_rows max(0, 1 - y m)`.
pub fn hinge_objective(model: &LinearModel, data: &EncodedDataset, l2: f64) -> Result<f64> {
    let margins = model.decision(&data.features)?;
    let mut hinge = 0.0;
    for (i, &y) in data.labels.iter().enumerate() {
        for c in 0..model.weights.nrows() {
            hinge += (1.0 - svm_target(model, c, y) * margins[[i, c]]).max(0.0);
        }
    }
    Ok(0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>() + hinge / data.n_samples() as f64)
}

/// One-vs-rest linear SVM trained by per-sample subgradient steps on the
/// regularized hinge loss. The step size in epoch `e` is
/// `learning_rate / (1 + e)`; the visiting order is a fresh seeded
/// permutation each epoch.
pub fn train_svm(data: &EncodedDataset, cfg: &TrainConfig, init: Option<&LinearModel>) -> Result<LinearModel> {
    let mut model = match init {
        Some(m) => {
            m.check_shape(LinearKind::Svm, data)?;
            m.clone()
        }
        None => LinearModel::zeros(LinearKind::Svm, data.n_classes, data.n_features()),
    };
    let n = data.n_samples();
    if n == 0 {
        return Ok(model);
    }
    let mut rng = seed::rng(seed::derive(cfg.seed, seed::TRAIN));
    let mut order: Vec<usize> = (0..n).collect();
    let rows = model.weights.nrows();
    for epoch in 0..cfg.epochs {
        let eta = cfg.learning_rate / (1.0 + epoch as f64);
        let shrink = 1.0 - eta * cfg.l2;
        order.shuffle(&mut rng);
        for &i in &order {
            let x = data.features.row(i);
            for c in 0..rows {
                let y = svm_target(&model, c, data.labels[i]);
                let margin = y * (model.weights.row(c).dot(&x) + model.bias[c]);
                let mut w = model.weights.row_mut(c);
                w *= shrink;
                if margin < 1.0 {
                    w.scaled_add(eta * y, &x);
                    model.bias[c] += eta * y;
                }
            }
        }
    }
    model.check_finite()?;
    Ok(model)
}
