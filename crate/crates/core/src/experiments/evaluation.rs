use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::{
    fit_gbr, mae, train_test_split, BoostingParams, Dataset, GradientBoostingModel, SplitInfo, Target,
    MODEL_FORMAT_VERSION,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const MIN_EVAL_ROWS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub train_fraction: f64,
    pub boosting: BoostingParams,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            train_fraction: 0.8,
            boosting: BoostingParams::default(),
        }
    }
}

/// Inlet, outlet and total models trained on the same split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModels {
    pub format_version: u32,
    pub split: SplitInfo,
    pub boosting: BoostingParams,
    pub models: Vec<GradientBoostingModel>,
}

impl TrainedModels {
    pub fn model(&self, target: Target) -> Option<&GradientBoostingModel> {
        self.models.iter().find(|m| m.target == Some(target))
    }

    /// `[inlet, outlet, total]` estimates for one feature vector.
    pub fn predict(&self, x: &[f64]) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (slot, t) in out.iter_mut().zip(Target::ALL) {
            let m = self
                .model(t)
                .ok_or_else(|| Error::InvalidDataset(format!("no model for target {t}")))?;
            if x.len() != m.n_features {
                return Err(Error::LengthMismatch {
                    left: x.len(),
                    right: m.n_features,
                });
            }
            *slot = m.predict(x);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: TrainedModels = serde_json::from_str(s)?;
        for v in std::iter::once(t.format_version).chain(t.models.iter().map(|m| m.format_version)) {
            if v != MODEL_FORMAT_VERSION {
                return Err(Error::ModelVersion(v));
            }
        }
        Ok(t)
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

fn check_size(d: &Dataset) -> Result<()> {
    if d.len() < MIN_EVAL_ROWS {
        return Err(Error::InsufficientData(format!(
            "evaluation needs at least {MIN_EVAL_ROWS} rows, got {}",
            d.len()
        )));
    }
    Ok(())
}

/// Splits `d` with `seed` and fits one model per target on the training part.
pub fn train_models(d: &Dataset, seed: u64, cfg: &EvalConfig) -> Result<TrainedModels> {
    check_size(d)?;
    let (train, _) = train_test_split(d, cfg.train_fraction, seed)?;
    let split = SplitInfo {
        seed,
        train_fraction: cfg.train_fraction,
    };
    let models = Target::ALL
        .iter()
        .map(|&t| {
            let mut m = fit_gbr(&train, t, &cfg.boosting)?;
            m.split = Some(split);
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainedModels {
        format_version: MODEL_FORMAT_VERSION,
        split,
        boosting: cfg.boosting,
        models,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionPair {
    pub actual: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub target: Target,
    pub mae_mm: f64,
    pub pairs: Vec<PredictionPair>,
}

/// Independent models need not be additive; this only records how far off
/// the sum is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdditivityCheck {
    pub inlet_plus_outlet_mae_mm: f64,
    pub total_mae_mm: f64,
    /// MAE between predicted inlet + outlet and predicted total.
    pub sum_vs_total_mae_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub split: SplitInfo,
    pub boosting: BoostingParams,
    pub train_rows: usize,
    pub test_rows: usize,
    pub targets: Vec<TargetReport>,
    pub additivity: AdditivityCheck,
}

impl RunReport {
    pub fn mae(&self, target: Target) -> Option<f64> {
        self.targets.iter().find(|t| t.target == target).map(|t| t.mae_mm)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per test sample: actual and predicted for each target.
    pub fn write_predictions_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = Vec::new();
        for t in &self.targets {
            header.push(format!("{}_actual_mm", t.target));
            header.push(format!("{}_predicted_mm", t.target));
        }
        w.write_record(&header)?;
        for i in 0..self.test_rows {
            let rec: Vec<String> = self
                .targets
                .iter()
                .flat_map(|t| [t.pairs[i].actual.to_string(), t.pairs[i].predicted.to_string()])
                .collect();
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<predictions csv>", e))?;
        Ok(())
    }
}

/// Scores `models` on the held-out part of `d`, rebuilt from the recorded split.
pub fn evaluate_models(models: &TrainedModels, d: &Dataset) -> Result<RunReport> {
    check_size(d)?;
    let (train, test) = train_test_split(d, models.split.train_fraction, models.split.seed)?;
    if test.is_empty() {
        return Err(Error::InsufficientData("test split is empty".into()));
    }
    let x = test.features();
    let mut preds = Vec::new();
    let mut targets = Vec::new();
    for t in Target::ALL {
        let m = models
            .model(t)
            .ok_or_else(|| Error::InvalidDataset(format!("no model for target {t}")))?;
        if m.n_features != test.n_features() {
            return Err(Error::LengthMismatch {
                left: test.n_features(),
                right: m.n_features,
            });
        }
        let p = m.predict_many(&x);
        let truth = test.targets(t);
        targets.push(TargetReport {
            target: t,
            mae_mm: mae(&p, &truth)?,
            pairs: truth
                .iter()
                .zip(&p)
                .map(|(&actual, &predicted)| PredictionPair { actual, predicted })
                .collect(),
        });
        preds.push(p);
    }
    let summed: Vec<f64> = preds[0].iter().zip(&preds[1]).map(|(a, b)| a + b).collect();
    let additivity = AdditivityCheck {
        inlet_plus_outlet_mae_mm: targets[0].mae_mm + targets[1].mae_mm,
        total_mae_mm: targets[2].mae_mm,
        sum_vs_total_mae_mm: mae(&summed, &preds[2])?,
    };
    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        split: models.split,
        boosting: models.boosting,
        train_rows: train.len(),
        test_rows: test.len(),
        targets,
        additivity,
    })
}

/// 80/20 split, three models, per-target test MAE.
pub fn run_evaluation(d: &Dataset, seed: u64) -> Result<RunReport> {
    run_evaluation_with(d, seed, &EvalConfig::default())
}

pub fn run_evaluation_with(d: &Dataset, seed: u64, cfg: &EvalConfig) -> Result<RunReport> {
    evaluate_models(&train_models(d, seed, cfg)?, d)
}
