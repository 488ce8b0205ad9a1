//! Gradient-boosted regression trees mapping feature vectors to stretch.

mod boosting;
mod dataset;
mod tree;

pub use boosting::{
    fit_boosting, fit_gbr, mae, predict, BoostingFit, BoostingParams, GradientBoostingModel, SplitInfo,
    MODEL_FORMAT_VERSION,
};
pub use dataset::{train_test_split, Dataset, DatasetRow, Provenance, Target};
pub use tree::{best_split, fit_tree, RegressionTree, SplitCandidate, TreeNode, TreeParams};
