//! The three classifiers: multinomial logistic regression, one-vs-rest
//! linear SVM, and a bagged CART forest.

mod forest;
mod linear;
mod tree;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};

pub use forest::{bootstrap_indices, train_forest, Forest};
pub use linear::{
    hinge_objective, logistic_gradient, logistic_loss, train_logreg, train_svm, LinearKind, LinearModel,
};
pub use tree::TreeNode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Forest,
    Svm,
    Logistic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Forest, ModelKind::Svm, ModelKind::Logistic];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Forest => "Random forest",
            ModelKind::Svm => "SVM",
            ModelKind::Logistic => "Logistic regression",
        }
    }

    pub fn is_parametric(self) -> bool {
        !matches!(self, ModelKind::Forest)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Forest => "forest",
            ModelKind::Svm => "svm",
            ModelKind::Logistic => "logistic",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forest" | "rf" => Ok(ModelKind::Forest),
            "svm" => Ok(ModelKind::Svm),
            "logistic" | "lr" => Ok(ModelKind::Logistic),
            other => Err(Error::InvalidConfig(format!("unknown model {other:?}"))),
        }
    }
}

/// Training hyperparameters. Linear models read the first three fields,
/// forests the next three.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 300,
            l2: 1e-3,
            n_trees: 100,
            max_depth: 12,
            min_leaf: 2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn defaults_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Svm => TrainConfig {
                learning_rate: 0.05,
                ..TrainConfig::default()
            },
            ModelKind::Logistic | ModelKind::Forest => TrainConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidConfig("l2 must be >= 0".into()));
        }
        if self.n_trees == 0 || self.max_depth == 0 || self.min_leaf == 0 {
            return Err(Error::InvalidConfig(
                "n_trees, max_depth and min_leaf must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Model {
    Linear(LinearModel),
    Forest(Forest),
}

impl Model {
    pub fn n_features(&self) -> usize {
        match self {
            Model::Linear(m) => m.n_features(),
            Model::Forest(f) => f.n_features,
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Model::Linear(m) => m.n_classes,
            Model::Forest(f) => f.n_classes,
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Linear(m) if m.kind == LinearKind::Logistic => ModelKind::Logistic,
            Model::Linear(_) => ModelKind::Svm,
            Model::Forest(_) => ModelKind::Forest,
        }
    }
}

/// Trains a fresh model, or continues from `init` for linear models.
/// Forests ignore `init`.
pub fn train(kind: ModelKind, data: &EncodedDataset, cfg: &TrainConfig, init: Option<&Model>) -> Result<Model> {
    let linear_init = match init {
        Some(Model::Linear(m)) => Some(m),
        Some(Model::Forest(_)) if kind.is_parametric() => {
            return Err(Error::ShapeMismatch("cannot warm-start a linear model from a forest".into()))
        }
        _ => None,
    };
    Ok(match kind {
        ModelKind::Logistic => Model::Linear(train_logreg(data, cfg, linear_init)?),
        ModelKind::Svm => Model::Linear(train_svm(data, cfg, linear_init)?),
        ModelKind::Forest => Model::Forest(train_forest(data, cfg)?),
    })
}

/// An `n x K` score matrix. Logistic and forest rows are probabilities;
/// SVM rows are raw margins (binary: `[-m, m]`), meaningful only by order.
pub fn predict_scores(model: &Model, x: &Array2<f64>) -> Result<Array2<f64>> {
    match model {
        Model::Forest(f) => f.predict_proba(x),
        Model::Linear(m) => match m.kind {
            LinearKind::Logistic => linear::logistic_probabilities(m, x),
            LinearKind::Svm => {
                let margins = m.decision(x)?;
                if m.is_binary() {
                    let mut out = Array2::zeros((x.nrows(), 2));
                    for (i, &v) in margins.column(0).iter().enumerate() {
                        out[[i, 0]] = -v;
                        out[[i, 1]] = v;
                    }
                    Ok(out)
                } else {
                    Ok(margins)
                }
            }
        },
    }
}

/// Row-wise argmax of `scores`, ties to the lowest class index.
pub fn argmax_rows(scores: &Array2<f64>) -> Vec<usize> {
    scores
        .outer_iter()
        .map(|row| {
            let mut best = 0;
            for c in 1..row.len() {
                if row[c] > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

pub fn predict_labels(model: &Model, x: &Array2<f64>) -> Result<Vec<usize>> {
    Ok(argmax_rows(&predict_scores(model, x)?))
}

/// Versioned on-disk form of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub model: Model,
}

impl ModelDocument {
    pub const VERSION: u32 = 1;

    pub fn to_json(model: &Model) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument {
            format_version: Self::VERSION,
            model: model.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format_version != Self::VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported model format version {}",
                doc.format_version
            )));
        }
        if let Model::Forest(f) = &doc.model {
            f.validate()?;
        }
        Ok(doc.model)
    }
}
