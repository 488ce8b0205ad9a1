use serde::{Deserialize, Serialize};

use crate::acoustics::{calibrate_strouhal, AcousticConfig, VortexModel};
use crate::dsp::{peak_track, stft, PeakThreshold, PeakTrack, Spectrogram, DEFAULT_HOP, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureVector, FEATURE_DIM};
use crate::geometry::{apply_stretch, build_sensor, SensorPreset, StretchState, StretchedGeometry, TubeGeometry};
use crate::synthesis::{linear_sweep, synthesize, AudioSignal, FlowSweep, NoiseModel, DEFAULT_SAMPLE_RATE};

/// Everything between a stretch state and its feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub acoustics: AcousticConfig,
    pub sample_rate: u32,
    pub sweep_duration_s: f64,
    pub max_flow_speed: f64,
    pub flow_interval_s: f64,
    pub noise_floor: f64,
    pub window: usize,
    pub hop: usize,
    pub band: (f64, f64),
    pub threshold: PeakThreshold,
    pub feature_bins: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            acoustics: AcousticConfig::default(),
            sample_rate: DEFAULT_SAMPLE_RATE,
            sweep_duration_s: 0.8,
            max_flow_speed: 12.0,
            flow_interval_s: 0.01,
            noise_floor: NoiseModel::DEFAULT_FLOOR,
            window: DEFAULT_WINDOW,
            hop: DEFAULT_HOP,
            band: (3000.0, 8000.0),
            threshold: PeakThreshold::default(),
            feature_bins: FEATURE_DIM,
        }
    }
}

impl PipelineConfig {
    pub fn noiseless() -> Self {
        PipelineConfig {
            noise_floor: 0.0,
            ..Self::default()
        }
    }

    pub fn sweep(&self) -> Result<FlowSweep> {
        linear_sweep(self.sweep_duration_s, self.max_flow_speed, self.flow_interval_s)
    }

    pub fn noise(&self, seed: u64) -> Result<NoiseModel> {
        NoiseModel::new(self.noise_floor, seed)
    }
}

/// A sensor tube with its shedding model calibrated at rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub name: String,
    pub geometry: TubeGeometry,
    pub vortex: VortexModel,
}

impl SensorModel {
    /// Preset tube calibrated to its reference F-U slope.
    pub fn preset(preset: SensorPreset) -> Result<Self> {
        let geometry = build_sensor(preset);
        let vortex = calibrate_strouhal(preset.reference_slope(), &StretchedGeometry::at_rest(&geometry))?;
        Ok(SensorModel {
            name: preset.name().to_string(),
            geometry,
            vortex,
        })
    }

    /// Same tube and Strouhal number with the flow entering from the other end.
    pub fn reversed(&self) -> Self {
        let geometry = self.geometry.reversed();
        let vortex = self.vortex.for_geometry(&StretchedGeometry::at_rest(&geometry));
        SensorModel {
            name: format!("{}-reversed", self.name),
            geometry,
            vortex,
        }
    }

    pub fn stretched(&self, stretch: StretchState) -> Result<(StretchedGeometry, VortexModel)> {
        let g = apply_stretch(&self.geometry, stretch)?;
        let vm = self.vortex.for_geometry(&g);
        Ok((g, vm))
    }
}

/// One synthetic recording carried through the analysis chain.
#[derive(Debug, Clone)]
pub struct Recording {
    pub stretch: StretchState,
    pub signal: AudioSignal,
    pub spectrogram: Spectrogram,
    pub track: PeakTrack,
}

impl Recording {
    pub fn features(&self, cfg: &PipelineConfig) -> Result<FeatureVector> {
        extract_features(&self.track, &cfg.sweep()?, cfg.feature_bins)
    }
}

/// Synthesize, transform and peak-track one flow sweep.
pub fn record(sensor: &SensorModel, stretch: StretchState, seed: u64, cfg: &PipelineConfig) -> Result<Recording> {
    let (g, vm) = sensor.stretched(stretch)?;
    let sweep = cfg.sweep()?;
    let signal = synthesize(&g, &sweep, &vm, &cfg.noise(seed)?, &cfg.acoustics, cfg.sample_rate)?;
    let spectrogram = stft(&signal, cfg.window, cfg.hop)?;
    let track = peak_track(&spectrogram, cfg.band, cfg.threshold)?;
    Ok(Recording {
        stretch,
        signal,
        spectrogram,
        track,
    })
}

/// `record` followed by feature extraction, with failures tagged by row.
pub fn record_features(
    sensor: &SensorModel,
    stretch: StretchState,
    seed: u64,
    index: usize,
    cfg: &PipelineConfig,
) -> Result<FeatureVector> {
    record(sensor, stretch, seed, cfg)
        .and_then(|r| r.features(cfg))
        .map_err(|e| Error::Recording {
            index,
            inlet_mm: stretch.inlet_mm(),
            outlet_mm: stretch.outlet_mm(),
            source: Box::new(e),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_models_hit_reference_slopes() {
        for p in SensorPreset::ALL {
            let m = SensorModel::preset(p).unwrap();
            assert!((m.vortex.slope() - p.reference_slope()).abs() < 1e-9);
        }
    }

    #[test]
    fn reversed_keeps_strouhal() {
        let m = SensorModel::preset(SensorPreset::Pdual).unwrap();
        let r = m.reversed();
        assert_eq!(r.vortex.strouhal, m.vortex.strouhal);
        assert!(r.vortex.char_length_mm > m.vortex.char_length_mm);
    }

    #[test]
    fn recording_shapes() {
        let m = SensorModel::preset(SensorPreset::P31).unwrap();
        let cfg = PipelineConfig::default();
        let r = record(&m, StretchState::NEUTRAL, 1, &cfg).unwrap();
        assert_eq!(r.signal.samples.len(), 35_280);
        assert_eq!(r.spectrogram.shape(), (134, 513));
        assert_eq!(r.features(&cfg).unwrap().len(), 32);
    }

    #[test]
    fn silent_recording_reports_row_context() {
        let m = SensorModel::preset(SensorPreset::Pdual).unwrap().reversed();
        let err = record_features(&m, StretchState::NEUTRAL, 3, 7, &PipelineConfig::noiseless()).unwrap_err();
        assert!(matches!(err, Error::Recording { index: 7, .. }), "{err}");
    }

    #[test]
    fn config_json_accepts_partial_documents() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"noise_floor": 0.1}"#).unwrap();
        assert_eq!(cfg.noise_floor, 0.1);
        assert_eq!(cfg.window, 1024);
    }
}
