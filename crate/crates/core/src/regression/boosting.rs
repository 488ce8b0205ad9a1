use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Target};
use super::tree::{fit_tree, RegressionTree, TreeParams};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostingParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for BoostingParams {
    fn default() -> Self {
        BoostingParams {
            n_estimators: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_leaf: 2,
        }
    }
}

impl BoostingParams {
    fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
        }
    }
}

/// Where a model's training rows came from, so evaluation can rebuild the
/// held-out split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub seed: u64,
    pub train_fraction: f64,
}

/// Squared-loss gradient boosting over regression trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoostingModel {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitInfo>,
    pub n_features: usize,
    pub init_value: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
}

impl GradientBoostingModel {
    /// `init + learning_rate * Σ tree(x)`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        self.init_value + self.learning_rate * sum
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: GradientBoostingModel = serde_json::from_str(s)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelVersion(model.format_version));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Boosted model plus the training MSE before the first round and after each.
#[derive(Debug, Clone)]
pub struct BoostingFit {
    pub model: GradientBoostingModel,
    pub train_mse: Vec<f64>,
}

fn mse(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64
}

pub fn fit_boosting(features: &[Vec<f64>], targets: &[f64], params: &BoostingParams) -> Result<BoostingFit> {
    if features.is_empty() {
        return Err(Error::InsufficientData("boosting needs at least one row".into()));
    }
    if features.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: targets.len(),
        });
    }
    if !(params.learning_rate > 0.0 && params.learning_rate <= 1.0) {
        return Err(Error::Domain(format!(
            "learning rate {} must be in (0, 1]",
            params.learning_rate
        )));
    }
    let init_value = targets.iter().sum::<f64>() / targets.len() as f64;
    let mut residuals: Vec<f64> = targets.iter().map(|t| t - init_value).collect();
    let mut train_mse = vec![mse(&residuals)];
    let mut trees = Vec::with_capacity(params.n_estimators);
    let tree_params = params.tree_params();
    for _ in 0..params.n_estimators {
        if residuals.iter().all(|&r| r == 0.0) {
            break;
        }
        let tree = fit_tree(features, &residuals, &tree_params)?;
        for (r, x) in residuals.iter_mut().zip(features) {
            *r -= params.learning_rate * tree.predict(x);
        }
        train_mse.push(mse(&residuals));
        trees.push(tree);
    }
    Ok(BoostingFit {
        model: GradientBoostingModel {
            format_version: MODEL_FORMAT_VERSION,
            target: None,
            split: None,
            n_features: features[0].len(),
            init_value,
            learning_rate: params.learning_rate,
            trees,
        },
        train_mse,
    })
}

/// One independent model for `target`.
pub fn fit_gbr(train: &Dataset, target: Target, params: &BoostingParams) -> Result<GradientBoostingModel> {
    if train.is_empty() {
        return Err(Error::InsufficientData("empty training set".into()));
    }
    let mut fit = fit_boosting(&train.features(), &train.targets(target), params)?;
    fit.model.target = Some(target);
    Ok(fit.model)
}

pub fn predict(m: &GradientBoostingModel, x: &[f64]) -> f64 {
    m.predict(x)
}

/// Mean absolute error.
pub fn mae(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: truth.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::InsufficientData("MAE of zero predictions".into()));
    }
    Ok(predictions.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / predictions.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::tree::TreeNode;

    fn linear_toy() -> (Vec<Vec<f64>>, Vec<f64>) {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, ((i * 7) % 5) as f64]).collect();
        let y = x.iter().map(|r| 0.5 * r[0] + 1.0).collect();
        (x, y)
    }

    #[test]
    fn constant_target_needs_no_trees() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let fit = fit_boosting(&x, &[4.0; 10], &BoostingParams::default()).unwrap();
        assert!(fit.model.trees.is_empty());
        assert_eq!(fit.model.predict(&[3.0]), 4.0);
    }

    #[test]
    fn training_loss_never_increases() {
        let (x, y) = linear_toy();
        let fit = fit_boosting(&x, &y, &BoostingParams::default()).unwrap();
        for w in fit.train_mse.windows(2) {
            assert!(w[1] <= w[0], "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn fits_linear_toy() {
        let (x, y) = linear_toy();
        let fit = fit_boosting(&x, &y, &BoostingParams::default()).unwrap();
        let pred = fit.model.predict_many(&x);
        let range = 9.5;
        assert!(mae(&pred, &y).unwrap() < 0.05 * range);
    }

    #[test]
    fn prediction_formula() {
        let zero = GradientBoostingModel {
            format_version: 1,
            target: None,
            split: None,
            n_features: 1,
            init_value: 2.0,
            learning_rate: 0.1,
            trees: vec![],
        };
        assert_eq!(predict(&zero, &[5.0]), 2.0);
        let one = GradientBoostingModel {
            trees: vec![RegressionTree {
                n_features: 1,
                max_depth: 1,
                root: TreeNode::Split {
                    feature: 0,
                    threshold: 1.0,
                    left: Box::new(TreeNode::Leaf { value: -3.0 }),
                    right: Box::new(TreeNode::Leaf { value: 7.0 }),
                },
            }],
            ..zero
        };
        assert!((predict(&one, &[5.0]) - 2.7).abs() < 1e-12);
        assert!((predict(&one, &[0.5]) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn single_full_tree_reproduces_training_row() {
        let x: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let y = [0.0, 1.0, 10.0, 11.0];
        let params = BoostingParams {
            n_estimators: 1,
            learning_rate: 1.0,
            max_depth: 2,
            min_samples_leaf: 1,
        };
        let m = fit_boosting(&x, &y, &params).unwrap().model;
        // init 5.5; the root splits 2|2, then each row sits alone in a leaf
        // holding its residual
        for (xi, yi) in x.iter().zip(y) {
            assert!((m.predict(xi) - yi).abs() < 1e-12);
        }
    }

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mae(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(mae(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(matches!(mae(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn model_json_round_trip_and_version_check() {
        let (x, y) = linear_toy();
        let m = fit_boosting(
            &x,
            &y,
            &BoostingParams {
                n_estimators: 5,
                ..Default::default()
            },
        )
        .unwrap()
        .model;
        let back = GradientBoostingModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let bumped = m
            .to_json()
            .unwrap()
            .replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(matches!(
            GradientBoostingModel::from_json(&bumped),
            Err(Error::ModelVersion(9))
        ));
    }
}
