use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evaluation::TrainedModels;
use super::pipeline::{record, PipelineConfig, SensorModel};
use super::protocol::with_workers;
use crate::dsp::{correlation, spectral_entropy, PeakTrack};
use crate::error::{Error, Result};
use crate::features::fit_fu_slope;
use crate::geometry::StretchState;
use crate::synthesis::{joint_config_to_stretch, JointConfig};

fn seeds(master: u64, stream: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    (0..n).map(|_| rng.gen()).collect()
}

/// Correlation between the recordings of (a, b) and (b, a) over a stretch grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub sensor: String,
    pub seed: u64,
    pub grid_mm: Vec<f64>,
    /// `matrix[i][j]` correlates stretch (grid[i], grid[j]) with its swap.
    pub matrix: Vec<Vec<f64>>,
    /// Mean over pairs with a != b.
    pub mean_mutual: f64,
    pub min_diagonal: f64,
    /// Mean spectral entropy over all recordings, bits.
    pub mean_entropy: f64,
}

/// Each unordered pair is recorded twice, once per orientation, with
/// independent noise; the diagonal therefore measures noise alone.
pub fn mutual_similarity(
    sensor: &SensorModel,
    grid_mm: &[f64],
    seed: u64,
    cfg: &PipelineConfig,
    workers: Option<usize>,
) -> Result<SimilarityReport> {
    let n = grid_mm.len();
    if n < 2 {
        return Err(Error::InsufficientData(
            "similarity needs at least two grid values".into(),
        ));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let noise = seeds(seed, 3, 2 * pairs.len());
    let results = with_workers(workers, || {
        pairs
            .par_iter()
            .enumerate()
            .map(|(k, &(i, j))| {
                let ab = record(sensor, StretchState::new(grid_mm[i], grid_mm[j])?, noise[2 * k], cfg)?;
                let ba = record(
                    sensor,
                    StretchState::new(grid_mm[j], grid_mm[i])?,
                    noise[2 * k + 1],
                    cfg,
                )?;
                let c = correlation(&ab.spectrogram, &ba.spectrogram)?;
                let e = spectral_entropy(&ab.spectrogram)? + spectral_entropy(&ba.spectrogram)?;
                Ok((c, e))
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let mut matrix = vec![vec![0.0; n]; n];
    let (mut off, mut off_n, mut min_diag, mut entropy) = (0.0, 0usize, f64::INFINITY, 0.0);
    for (&(i, j), &(c, e)) in pairs.iter().zip(&results) {
        matrix[i][j] = c;
        matrix[j][i] = c;
        entropy += e;
        if i == j {
            min_diag = min_diag.min(c);
        } else {
            off += c;
            off_n += 1;
        }
    }
    Ok(SimilarityReport {
        sensor: sensor.name.clone(),
        seed,
        grid_mm: grid_mm.to_vec(),
        matrix,
        mean_mutual: off / off_n as f64,
        min_diagonal: min_diag,
        mean_entropy: entropy / (2 * pairs.len()) as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeRow {
    pub inlet_mm: f64,
    pub outlet_mm: f64,
    /// Hz per m/s.
    pub slope: f64,
    pub residual_rms_hz: f64,
    /// Mean tracked frequency around the voiced peak closest to 5.5 kHz.
    pub resonance_near_5500_hz: Option<f64>,
}

pub const REFERENCE_RESONANCE_HZ: f64 = 5500.0;

pub fn default_slope_conditions() -> Vec<StretchState> {
    [
        (0.0, 0.0),
        (2.0, 2.0),
        (5.0, 5.0),
        (8.0, 8.0),
        (10.0, 10.0),
        (0.0, 10.0),
        (10.0, 0.0),
    ]
    .iter()
    .map(|&(a, b)| StretchState::new(a, b).expect("condition in range"))
    .collect()
}

fn resonance_near(track: &PeakTrack, reference: f64, tolerance: f64) -> Option<f64> {
    let nearest = track
        .voiced()
        .map(|(_, f)| f)
        .min_by(|a, b| (a - reference).abs().total_cmp(&(b - reference).abs()))?;
    let close: Vec<f64> = track
        .voiced()
        .map(|(_, f)| f)
        .filter(|f| (f - nearest).abs() <= tolerance)
        .collect();
    Some(close.iter().sum::<f64>() / close.len() as f64)
}

/// F-U slope and the resonance level nearest 5.5 kHz for each condition.
pub fn slope_table(
    sensor: &SensorModel,
    conditions: &[StretchState],
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<Vec<SlopeRow>> {
    let sweep = cfg.sweep()?;
    let noise = seeds(seed, 4, conditions.len());
    conditions
        .iter()
        .zip(noise)
        .map(|(&s, seed)| {
            let r = record(sensor, s, seed, cfg)?;
            let fit = fit_fu_slope(&r.track, &sweep)?;
            Ok(SlopeRow {
                inlet_mm: s.inlet_mm(),
                outlet_mm: s.outlet_mm(),
                slope: fit.slope,
                residual_rms_hz: fit.residual_rms,
                resonance_near_5500_hz: resonance_near(&r.track, REFERENCE_RESONANCE_HZ, r.spectrogram.bin_width()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerPose {
    pub joint: JointConfig,
    pub stretch: StretchState,
    pub clamped: bool,
    pub slope: Option<f64>,
    /// Tracked peak per frame, Hz.
    pub track_hz: Vec<Option<f64>>,
    /// `[inlet, outlet, total]` from the trained models, mm.
    pub predicted_mm: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerReport {
    pub sensor: String,
    pub seed: u64,
    pub poses: Vec<FingerPose>,
}

/// Rest, both joints at 45 degrees, proximal-only and distal-only at 90 degrees.
pub fn default_finger_poses() -> Vec<JointConfig> {
    [(0.0, 0.0), (FRAC_PI_4, FRAC_PI_4), (FRAC_PI_2, 0.0), (0.0, FRAC_PI_2)]
        .iter()
        .map(|&(p, d)| JointConfig::new(p, d).expect("pose in range"))
        .collect()
}

/// Records each pose and, if models are given, estimates its stretch.
pub fn finger_scenario(
    sensor: &SensorModel,
    poses: &[JointConfig],
    models: Option<&TrainedModels>,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<FingerReport> {
    let sweep = cfg.sweep()?;
    let noise = seeds(seed, 5, poses.len());
    let poses = poses
        .iter()
        .zip(noise)
        .map(|(j, seed)| {
            j.validate()?;
            let js = joint_config_to_stretch(j);
            let r = record(sensor, js.stretch, seed, cfg)?;
            let slope = fit_fu_slope(&r.track, &sweep).ok().map(|f| f.slope);
            let predicted_mm = match models {
                Some(m) => Some(m.predict(r.features(cfg)?.values())?),
                None => None,
            };
            Ok(FingerPose {
                joint: *j,
                stretch: js.stretch,
                clamped: js.clamped,
                slope,
                track_hz: r.track.points.iter().map(|p| p.frequency).collect(),
                predicted_mm,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FingerReport {
        sensor: sensor.name.clone(),
        seed,
        poses,
    })
}
