use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 3,
            min_samples_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// CART regression tree; `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub n_features: usize,
    pub max_depth: usize,
    pub root: TreeNode,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n_features, "feature vector length");
        self.root.predict(x)
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    /// Reduction in the sum of squared residuals.
    pub gain: f64,
}

/// Gains closer than this (relative to the node's spread) count as ties.
pub(crate) fn tie_tolerance(node_sse: f64) -> f64 {
    1e-10 * (1.0 + node_sse)
}

/// Best variance-reduction split of `idx`, scanning features in order and
/// thresholds ascending; a candidate must beat the incumbent by more than the
/// tie tolerance, so ties keep the lowest feature then the lowest threshold.
pub fn best_split(x: &[Vec<f64>], y: &[f64], idx: &[usize], min_samples_leaf: usize) -> Option<SplitCandidate> {
    let n = idx.len();
    let min_leaf = min_samples_leaf.max(1);
    if n < 2 * min_leaf {
        return None;
    }
    let total: f64 = idx.iter().map(|&i| y[i]).sum();
    let node_sse: f64 = {
        let mean = total / n as f64;
        idx.iter().map(|&i| (y[i] - mean).powi(2)).sum()
    };
    let tol = tie_tolerance(node_sse);
    let parent = total * total / n as f64;
    let n_features = x[idx[0]].len();

    let mut best: Option<SplitCandidate> = None;
    let mut order = idx.to_vec();
    #[allow(clippy::needless_range_loop)]
    for f in 0..n_features {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
        let mut left_sum = 0.0;
        for pos in 0..n - 1 {
            left_sum += y[order[pos]];
            let n_left = pos + 1;
            let (v, next) = (x[order[pos]][f], x[order[pos + 1]][f]);
            if v == next || n_left < min_leaf || n - n_left < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / n_left as f64 + right_sum * right_sum / (n - n_left) as f64 - parent;
            if best.map_or(gain > tol, |b| gain > b.gain + tol) {
                let mut threshold = 0.5 * (v + next);
                if threshold >= next {
                    threshold = v;
                }
                best = Some(SplitCandidate {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

fn mean_of(y: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64
}

fn grow(x: &[Vec<f64>], y: &[f64], idx: &[usize], depth: usize, params: &TreeParams) -> TreeNode {
    let leaf = || TreeNode::Leaf { value: mean_of(y, idx) };
    if depth >= params.max_depth {
        return leaf();
    }
    let Some(split) = best_split(x, y, idx, params.min_samples_leaf) else {
        return leaf();
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][split.feature] <= split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(x, y, &l, depth + 1, params)),
        right: Box::new(grow(x, y, &r, depth + 1, params)),
    }
}

/// Fits a regression tree to `residuals` by greedy variance reduction.
pub fn fit_tree(features: &[Vec<f64>], residuals: &[f64], params: &TreeParams) -> Result<RegressionTree> {
    if features.is_empty() {
        return Err(Error::InsufficientData("tree needs at least one row".into()));
    }
    if features.len() != residuals.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: residuals.len(),
        });
    }
    let n_features = features[0].len();
    if features.iter().any(|r| r.len() != n_features) {
        return Err(Error::InvalidDataset("ragged feature matrix".into()));
    }
    let idx: Vec<usize> = (0..features.len()).collect();
    Ok(RegressionTree {
        n_features,
        max_depth: params.max_depth,
        root: grow(features, residuals, &idx, 0, params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn constant_residuals_give_single_leaf() {
        let t = fit_tree(&col(&[1.0, 2.0, 3.0, 4.0]), &[2.5; 4], &TreeParams::default()).unwrap();
        assert_eq!(t.root, TreeNode::Leaf { value: 2.5 });
    }

    #[test]
    fn toy_split_at_one_and_a_half() {
        let params = TreeParams {
            max_depth: 1,
            min_samples_leaf: 2,
        };
        let t = fit_tree(&col(&[0.0, 1.0, 2.0, 3.0]), &[0.0, 0.0, 10.0, 10.0], &params).unwrap();
        assert_eq!(
            t.root,
            TreeNode::Split {
                feature: 0,
                threshold: 1.5,
                left: Box::new(TreeNode::Leaf { value: 0.0 }),
                right: Box::new(TreeNode::Leaf { value: 10.0 }),
            }
        );
    }

    #[test]
    fn full_depth_tree_interpolates() {
        let params = TreeParams {
            max_depth: 3,
            min_samples_leaf: 1,
        };
        let x = col(&[0.3, 1.7, 2.2, 5.0, 5.5, 7.1, 8.0, 9.9]);
        // greedy halving separates an evenly spaced response in three levels
        let y: Vec<f64> = (0..8).map(|i| 2.0 * i as f64 - 3.0).collect();
        let t = fit_tree(&x, &y, &params).unwrap();
        assert!(t.depth() <= 3);
        for (xi, yi) in x.iter().zip(&y) {
            assert!((t.predict(xi) - yi).abs() < 1e-12);
        }
        // any response on depth + 1 rows: every split peels off at least one row
        let x = col(&[0.3, 1.7, 2.2, 5.0]);
        let y = [3.0, -1.0, 4.0, -5.0];
        let t = fit_tree(&x, &y, &params).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((t.predict(xi) - yi).abs() < 1e-12);
        }
    }

    #[test]
    fn min_samples_leaf_respected() {
        let params = TreeParams {
            max_depth: 5,
            min_samples_leaf: 3,
        };
        let x = col(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let y = [0.0, 9.0, 0.0, 0.0, 0.0, 0.0, 9.0];
        let t = fit_tree(&x, &y, &params).unwrap();
        fn leaf_sizes(n: &TreeNode, x: &[Vec<f64>], idx: Vec<usize>, out: &mut Vec<usize>) {
            match n {
                TreeNode::Leaf { .. } => out.push(idx.len()),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let (l, r) = idx.into_iter().partition(|&i| x[i][*feature] <= *threshold);
                    leaf_sizes(left, x, l, out);
                    leaf_sizes(right, x, r, out);
                }
            }
        }
        let mut sizes = Vec::new();
        leaf_sizes(&t.root, &x, (0..7).collect(), &mut sizes);
        assert!(sizes.iter().all(|&s| s >= 3), "{sizes:?}");
    }

    #[test]
    fn ties_prefer_lowest_feature() {
        // identical columns give identical gains
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, i as f64]).collect();
        let y = [0.0, 0.0, 0.0, 5.0, 5.0, 5.0];
        let s = best_split(&x, &y, &(0..6).collect::<Vec<_>>(), 1).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 2.5);
    }

    #[test]
    fn errors() {
        assert!(fit_tree(&[], &[], &TreeParams::default()).is_err());
        assert!(fit_tree(&col(&[1.0]), &[1.0, 2.0], &TreeParams::default()).is_err());
    }

    #[test]
    fn json_is_nested() {
        let t = fit_tree(
            &col(&[0.0, 1.0, 2.0, 3.0]),
            &[0.0, 0.0, 10.0, 10.0],
            &TreeParams::default(),
        )
        .unwrap();
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(json["root"]["kind"], "split");
        assert_eq!(json["root"]["left"]["kind"], "leaf");
        let back: RegressionTree = serde_json::from_value(json).unwrap();
        assert_eq!(back, t);
    }
}
