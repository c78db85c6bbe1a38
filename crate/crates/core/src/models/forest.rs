use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};
use crate::models::tree::{TreeBuilder, TreeNode, TreeParams};
use crate::models::TrainConfig;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<TreeNode>,
    pub n_classes: usize,
    pub n_features: usize,
}

impl Forest {
    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::Invariant("forest has no trees".into()));
        }
        if let Some(max) = self.trees.iter().filter_map(TreeNode::max_feature_index).max() {
            if max >= self.n_features {
                return Err(Error::Invariant(format!(
                    "tree splits on feature {max} but the forest has {} features",
                    self.n_features
                )));
            }
        }
        Ok(())
    }

    /// Mean of the trees' leaf class distributions, one row per sample.
    pub fn predict_proba(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_features {
            return Err(Error::ShapeMismatch(format!(
                "forest expects {} features, got {}",
                self.n_features,
                x.ncols()
            )));
        }
        if self.trees.is_empty() {
            return Err(Error::Invariant("forest has no trees".into()));
        }
        let mut out = Array2::<f64>::zeros((x.nrows(), self.n_classes));
        for (i, row) in x.outer_iter().enumerate() {
            for tree in &self.trees {
                let counts = tree.leaf_for(row);
                let total: u64 = counts.iter().sum();
                for (c, &k) in counts.iter().enumerate() {
                    out[[i, c]] += k as f64 / total as f64;
                }
            }
        }
        out /= self.trees.len() as f64;
        Ok(out)
    }
}

/// Bootstrap sample of size `n` for tree `tree_index`.
pub fn bootstrap_indices(n: usize, seed: u64, tree_index: usize) -> Vec<usize> {
    let mut rng = seed::rng(seed::derive(seed, tree_index as u64));
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Bagged CART trees with Gini splits over `ceil(sqrt(d))` random features
/// per node. Tree `t` draws from its own seed stream, so trees can be
/// grown in parallel without changing the result.
pub fn train_forest(data: &EncodedDataset, cfg: &TrainConfig) -> Result<Forest> {
    if cfg.n_trees == 0 || cfg.max_depth == 0 || cfg.min_leaf == 0 {
        return Err(Error::InvalidConfig(
            "forest needs n_trees, max_depth and min_leaf all >= 1".into(),
        ));
    }
    if data.n_samples() == 0 {
        return Err(Error::InvalidConfig("cannot grow trees on an empty dataset".into()));
    }
    let d = data.n_features();
    let builder = TreeBuilder {
        features: &data.features,
        labels: &data.labels,
        n_classes: data.n_classes,
        params: TreeParams {
            max_depth: cfg.max_depth,
            min_leaf: cfg.min_leaf,
            max_features: (d as f64).sqrt().ceil() as usize,
        },
    };
    let base = seed::derive(cfg.seed, seed::TRAIN);
    let trees: Vec<TreeNode> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let sample = bootstrap_indices(data.n_samples(), base, t);
            let mut rng = seed::rng(seed::derive(base ^ 0x7EE5, t as u64));
            builder.grow(&sample, &mut rng)
        })
        .collect();
    let forest = Forest {
        trees,
        n_classes: data.n_classes,
        n_features: d,
    };
    forest.validate()?;
    Ok(forest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn cfg(n_trees: usize, max_depth: usize) -> TrainConfig {
        TrainConfig {
            n_trees,
            max_depth,
            min_leaf: 1,
            seed: 11,
            ..TrainConfig::default()
        }
    }

    fn accuracy(forest: &Forest, data: &EncodedDataset) -> f64 {
        let p = forest.predict_proba(&data.features).unwrap();
        let correct = p
            .outer_iter()
            .zip(&data.labels)
            .filter(|(row, &y)| {
                let best = (0..row.len()).fold(0, |b, c| if row[c] > row[b] { c } else { b });
                best == y
            })
            .count();
        correct as f64 / data.n_samples() as f64
    }

    #[test]
    fn constant_labels_give_single_leaves() {
        let data = EncodedDataset::new(array![[0.0, 1.0], [2.0, 3.0], [4.0, 1.0]], vec![1, 1, 1], 2).unwrap();
        let forest = train_forest(&data, &cfg(5, 4)).unwrap();
        assert!(forest.trees.iter().all(|t| matches!(t, TreeNode::Leaf { .. })));
        assert_eq!(accuracy(&forest, &data), 1.0);
    }

    /// Best accuracy of any depth-1 tree on `data`, by enumeration over
    /// every (feature, midpoint) split and every leaf labeling.
    fn best_stump_accuracy(data: &EncodedDataset) -> f64 {
        let n = data.n_samples();
        let k = data.n_classes;
        let best_const = (0..k)
            .map(|c| data.labels.iter().filter(|&&y| y == c).count())
            .max()
            .unwrap();
        let mut best = best_const;
        for f in 0..data.n_features() {
            let mut vals: Vec<f64> = data.features.column(f).to_vec();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for w in vals.windows(2) {
                let t = (w[0] + w[1]) / 2.0;
                for lc in 0..k {
                    for rc in 0..k {
                        let correct = (0..n)
                            .filter(|&i| {
                                let pred = if data.features[[i, f]] <= t { lc } else { rc };
                                pred == data.labels[i]
                            })
                            .count();
                        best = best.max(correct);
                    }
                }
            }
        }
        best as f64 / n as f64
    }

    #[test]
    fn xor_stump_cannot_exceed_enumerated_bound() {
        let data = EncodedDataset::new(
            array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]],
            vec![0, 1, 1, 0],
            2,
        )
        .unwrap();
        let bound = best_stump_accuracy(&data);
        assert_eq!(bound, 0.5);
        // d = 2, so ceil(sqrt(d)) = 2 covers the full feature set
        let forest = train_forest(&data, &cfg(1, 1)).unwrap();
        let acc = accuracy(&forest, &data);
        assert!(acc <= bound + 1e-12 && acc <= 0.75, "accuracy {acc}");
    }

    #[test]
    fn same_seed_same_forest() {
        let x = Array2::from_shape_fn((60, 4), |(i, j)| ((i * 7 + j * 13) % 17) as f64);
        let y = (0..60).map(|i| (i * 7 % 17 > 8) as usize).collect();
        let data = EncodedDataset::new(x, y, 2).unwrap();
        let a = train_forest(&data, &cfg(8, 5)).unwrap();
        let b = train_forest(&data, &cfg(8, 5)).unwrap();
        assert_eq!(a, b);
        assert!(a.trees.iter().all(|t| t.depth() <= 5));
    }

    #[test]
    fn bootstrap_in_range_and_reproducible() {
        let a = bootstrap_indices(50, 3, 7);
        assert_eq!(a.len(), 50);
        assert!(a.iter().all(|&i| i < 50));
        assert_eq!(a, bootstrap_indices(50, 3, 7));
        assert_ne!(a, bootstrap_indices(50, 3, 8));
    }

    #[test]
    fn invalid_config() {
        let data = EncodedDataset::new(array![[0.0]], vec![0], 2).unwrap();
        assert!(matches!(train_forest(&data, &cfg(0, 3)), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn two_tree_average() {
        let forest = Forest {
            trees: vec![
                TreeNode::Leaf { class_counts: vec![4, 0] },
                TreeNode::Leaf { class_counts: vec![1, 1] },
            ],
            n_classes: 2,
            n_features: 1,
        };
        let p = forest.predict_proba(&array![[0.0]]).unwrap();
        assert_eq!(p.row(0).to_vec(), vec![0.75, 0.25]);
    }
}
