use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{record_features, PipelineConfig, SensorModel};
use crate::error::{Error, Result};
use crate::geometry::{SensorPreset, StretchState, MAX_STRETCH_MM};
use crate::regression::{Dataset, DatasetRow, Provenance};

const POINT_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

/// Recording plan for one sensor: a full stretch grid plus random points,
/// each repeated with fresh noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolSpec {
    pub sensor: SensorPreset,
    pub grid_step_mm: f64,
    pub grid_range_mm: (f64, f64),
    pub grid_repeats: u32,
    pub random_count: usize,
    pub random_repeats: u32,
    pub master_seed: u64,
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        ProtocolSpec {
            sensor: SensorPreset::Pdual,
            grid_step_mm: 1.0,
            grid_range_mm: (0.0, MAX_STRETCH_MM),
            grid_repeats: 2,
            random_count: 100,
            random_repeats: 2,
            master_seed: 0,
        }
    }
}

impl ProtocolSpec {
    pub fn new(sensor: SensorPreset, master_seed: u64) -> Self {
        ProtocolSpec {
            sensor,
            master_seed,
            ..Self::default()
        }
    }

    pub fn grid_values(&self) -> Result<Vec<f64>> {
        let (lo, hi) = self.grid_range_mm;
        if !(0.0..=MAX_STRETCH_MM).contains(&lo) || !(lo..=MAX_STRETCH_MM).contains(&hi) {
            return Err(Error::OutOfRange {
                field: "grid_range_mm",
                value: if lo < 0.0 { lo } else { hi },
                min: 0.0,
                max: MAX_STRETCH_MM,
            });
        }
        if !(self.grid_step_mm > 0.0) {
            return Err(Error::Domain("grid step must be positive".into()));
        }
        let n = ((hi - lo) / self.grid_step_mm + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| lo + i as f64 * self.grid_step_mm).collect())
    }

    pub fn recording_count(&self) -> Result<usize> {
        let g = self.grid_values()?.len();
        Ok(g * g * self.grid_repeats as usize + self.random_count * self.random_repeats as usize)
    }
}

/// One planned recording.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchPoint {
    pub index: usize,
    pub stretch: StretchState,
    pub repetition: u32,
    pub seed: u64,
}

/// Grid points (inlet-major) then random points, each point's repetitions
/// adjacent. Noise seeds come from their own stream of the master seed.
pub fn stretch_points(spec: &ProtocolSpec) -> Result<Vec<StretchPoint>> {
    let grid = spec.grid_values()?;
    let (lo, hi) = spec.grid_range_mm;
    let mut states = Vec::new();
    for &a in &grid {
        for &b in &grid {
            let s = StretchState::new(a, b)?;
            states.extend((0..spec.grid_repeats).map(|r| (s, r)));
        }
    }
    let mut point_rng = ChaCha8Rng::seed_from_u64(spec.master_seed);
    point_rng.set_stream(POINT_STREAM);
    for _ in 0..spec.random_count {
        let s = StretchState::new(point_rng.gen_range(lo..=hi), point_rng.gen_range(lo..=hi))?;
        states.extend((0..spec.random_repeats).map(|r| (s, r)));
    }
    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.master_seed);
    noise_rng.set_stream(NOISE_STREAM);
    Ok(states
        .into_iter()
        .enumerate()
        .map(|(index, (stretch, repetition))| StretchPoint {
            index,
            stretch,
            repetition,
            seed: noise_rng.gen(),
        })
        .collect())
}

/// Runs `f` on a pool of `workers` threads, or rayon's default pool for `None`.
pub(crate) fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::Domain("worker count must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Domain(format!("thread pool: {e}"))),
    }
}

/// Synthesizes and featurizes every planned recording. Row order and
/// content do not depend on the worker count.
pub fn generate_dataset(spec: &ProtocolSpec, cfg: &PipelineConfig, workers: Option<usize>) -> Result<Dataset> {
    let sensor = SensorModel::preset(spec.sensor)?;
    let points = stretch_points(spec)?;
    let rows = with_workers(workers, || {
        points
            .par_iter()
            .map(|p| {
                let fv = record_features(&sensor, p.stretch, p.seed, p.index, cfg)?;
                Ok(DatasetRow::new(
                    fv.0,
                    p.stretch.inlet_mm(),
                    p.stretch.outlet_mm(),
                    Provenance {
                        sensor: spec.sensor.name().to_string(),
                        repetition: p.repetition,
                        seed: p.seed,
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Dataset::new(rows)
}
