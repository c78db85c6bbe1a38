use ndarray::{Array2, ArrayView1};
use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A CART node. Samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        class_counts: Vec<u64>,
    },
}

impl TreeNode {
    pub fn leaf_for(&self, x: ArrayView1<f64>) -> &[u64] {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { class_counts } => return class_counts,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    /// Normalized class distribution of the leaf `x` lands in.
    pub fn distribution(&self, x: ArrayView1<f64>) -> Vec<f64> {
        let counts = self.leaf_for(x);
        let total: u64 = counts.iter().sum();
        counts.iter().map(|&c| c as f64 / total as f64).collect()
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn max_feature_index(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split {
                feature, left, right, ..
            } => Some(
                (*feature)
                    .max(left.max_feature_index().unwrap_or(0))
                    .max(right.max_feature_index().unwrap_or(0)),
            ),
        }
    }
}

pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub max_features: usize,
}

pub(crate) struct TreeBuilder<'a> {
    pub features: &'a Array2<f64>,
    pub labels: &'a [usize],
    pub n_classes: usize,
    pub params: TreeParams,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl TreeBuilder<'_> {
    /// Grows a tree over `samples` (row indices, repeats allowed).
    pub fn grow(&self, samples: &[usize], rng: &mut ChaCha8Rng) -> TreeNode {
        self.grow_node(samples.to_vec(), 0, rng)
    }

    fn counts(&self, samples: &[usize]) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_classes];
        for &i in samples {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    fn grow_node(&self, samples: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> TreeNode {
        let counts = self.counts(&samples);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.params.max_depth || samples.len() < 2 * self.params.min_leaf {
            return TreeNode::Leaf { class_counts: counts };
        }
        let Some(best) = self.best_split(&samples, &counts, rng) else {
            return TreeNode::Leaf { class_counts: counts };
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&i| self.features[[i, best.feature]] <= best.threshold);
        TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(self.grow_node(left, depth + 1, rng)),
            right: Box::new(self.grow_node(right, depth + 1, rng)),
        }
    }

    /// Maximizes `sum_side sum_c n_c^2 / n_side`, which is the same as
    /// maximizing the weighted Gini impurity decrease. A split must leave
    /// at least `min_leaf` samples on each side and strictly improve on
    /// the parent.
    fn best_split(&self, samples: &[usize], parent: &[u64], rng: &mut ChaCha8Rng) -> Option<BestSplit> {
        let d = self.features.ncols();
        let m = self.params.max_features.clamp(1, d);
        let mut candidates = index::sample(rng, d, m).into_vec();
        candidates.sort_unstable();

        let n = samples.len();
        let parent_score = parent.iter().map(|&c| (c * c) as f64).sum::<f64>() / n as f64;
        let mut best: Option<BestSplit> = None;
        let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);
        let mut left = vec![0u64; self.n_classes];
        for feature in candidates {
            column.clear();
            column.extend(samples.iter().map(|&i| (self.features[[i, feature]], self.labels[i])));
            column.sort_by(|a, b| a.0.total_cmp(&b.0));
            if column[0].0 == column[n - 1].0 {
                continue;
            }
            left.iter_mut().for_each(|c| *c = 0);
            let mut left_sq = 0.0;
            let mut right_sq = parent.iter().map(|&c| (c * c) as f64).sum::<f64>();
            for k in 0..n - 1 {
                let y = column[k].1;
                let lc = left[y] as f64;
                let rc = (parent[y] - left[y]) as f64;
                left_sq += 2.0 * lc + 1.0;
                right_sq -= 2.0 * rc - 1.0;
                left[y] += 1;

                let n_left = k + 1;
                let n_right = n - n_left;
                if column[k].0 == column[k + 1].0
                    || n_left < self.params.min_leaf
                    || n_right < self.params.min_leaf
                {
                    continue;
                }
                let score = left_sq / n_left as f64 + right_sq / n_right as f64;
                if score > parent_score + 1e-12 && best.as_ref().is_none_or(|b| score > b.score) {
                    let (lo, hi) = (column[k].0, column[k + 1].0);
                    let mid = lo + (hi - lo) / 2.0;
                    best = Some(BestSplit {
                        feature,
                        threshold: if mid < hi { mid } else { lo },
                        score,
                    });
                }
            }
        }
        best
    }
}
