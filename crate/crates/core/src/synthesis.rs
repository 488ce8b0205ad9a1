//! Rendering a flow-sweep recording into audio, and mapping finger poses to
//! segment stretch.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acoustics::{acoustic_response, AcousticConfig, AcousticResponse, VortexModel};
use crate::error::{Error, Result};
use crate::geometry::{StretchState, StretchedGeometry};

pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;

/// Samples over which the tone amplitude glides to a new interval's level.
const AMPLITUDE_RAMP: usize = 128;

/// Flow speed against time during one valve ramp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSweep {
    duration: f64,
    sample_interval: f64,
    /// `(t, U)` pairs in seconds and m/s.
    samples: Vec<(f64, f64)>,
}

impl FlowSweep {
    pub fn new(duration: f64, sample_interval: f64, samples: Vec<(f64, f64)>) -> Result<Self> {
        if !(duration > 0.0) || !(sample_interval > 0.0) {
            return Err(Error::Domain("sweep duration and interval must be positive".into()));
        }
        if samples.len() < 2 {
            return Err(Error::Domain("sweep needs at least two samples".into()));
        }
        if samples[0].1 != 0.0 {
            return Err(Error::Domain("sweep must start from zero flow".into()));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 {
                return Err(Error::Domain(
                    "sweep samples must have increasing time and non-decreasing speed".into(),
                ));
            }
        }
        Ok(FlowSweep {
            duration,
            sample_interval,
            samples,
        })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn u_max(&self) -> f64 {
        self.samples.last().map(|s| s.1).unwrap_or(0.0)
    }

    /// Linearly interpolated flow speed, held constant outside the samples.
    pub fn speed_at(&self, t: f64) -> f64 {
        let s = &self.samples;
        if t <= s[0].0 {
            return s[0].1;
        }
        let i = s.partition_point(|p| p.0 <= t);
        if i >= s.len() {
            return s[s.len() - 1].1;
        }
        let (t0, u0) = s[i - 1];
        let (t1, u1) = s[i];
        u0 + (u1 - u0) * (t - t0) / (t1 - t0)
    }

    /// Mean speed of each interval between consecutive samples.
    pub fn interval_speeds(&self) -> Vec<f64> {
        self.samples.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1)).collect()
    }
}

/// Linear ramp from rest to `u_max` over `duration`, sampled every `interval`.
pub fn linear_sweep(duration: f64, u_max: f64, interval: f64) -> Result<FlowSweep> {
    if !(duration > 0.0 && u_max > 0.0 && interval > 0.0 && interval < duration) {
        return Err(Error::Domain(format!(
            "linear sweep needs duration > 0, u_max > 0 and 0 < interval < duration \
             (got {duration}, {u_max}, {interval})"
        )));
    }
    let n = 1 + (duration / interval + 1e-9).floor() as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 * interval;
            (t, u_max * t / duration)
        })
        .collect();
    FlowSweep::new(duration, interval, samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioSignal {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
    pub sync_marker_time: Option<f64>,
}

impl AudioSignal {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }

    /// Writes a 16-bit mono PCM WAV file.
    pub fn write_wav(&self, path: impl AsRef<Path>) -> Result<()> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut writer = hound::WavWriter::create(path, spec)?;
        for &x in &self.samples {
            writer.write_sample((x.clamp(-1.0, 1.0) * i16::MAX as f64).round() as i16)?;
        }
        writer.finalize()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// RMS of the additive white noise, in units of a unit-amplitude tone.
    pub noise_floor: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub const DEFAULT_FLOOR: f64 = 0.05;

    pub fn new(noise_floor: f64, seed: u64) -> Result<Self> {
        if !(noise_floor >= 0.0) || !noise_floor.is_finite() {
            return Err(Error::Domain(format!("noise floor {noise_floor} must be non-negative")));
        }
        Ok(NoiseModel { noise_floor, seed })
    }

    pub fn silent() -> Self {
        NoiseModel {
            noise_floor: 0.0,
            seed: 0,
        }
    }
}

/// One constant-frequency stretch of the rendered tone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneSpan {
    pub frequency: Option<f64>,
    pub amplitude: f64,
}

/// Renders consecutive `interval`-long tone spans into `duration` seconds of
/// audio. Phase accumulates across spans; amplitude changes glide over a
/// short ramp, holding the previous frequency while a tone fades out.
pub fn render_tones(
    spans: &[ToneSpan],
    interval: f64,
    duration: f64,
    sample_rate: u32,
    noise: &NoiseModel,
) -> Result<AudioSignal> {
    if spans.is_empty() || !(interval > 0.0) || !(duration > 0.0) || sample_rate == 0 {
        return Err(Error::Domain(
            "rendering needs spans, a positive interval and duration".into(),
        ));
    }
    let sr = sample_rate as f64;
    let n = (duration * sr).round() as usize;
    let mut out = Vec::with_capacity(n);

    let mut phase = 0.0f64;
    let mut freq: Option<f64> = None;
    let mut amp = 0.0f64;
    let mut target = 0.0f64;
    let mut step = 0.0f64;
    let mut current_span = usize::MAX;

    for j in 0..n {
        let t = j as f64 / sr;
        let k = ((t / interval) as usize).min(spans.len() - 1);
        if k != current_span {
            current_span = k;
            let span = spans[k];
            if let Some(f) = span.frequency {
                freq = Some(f);
            }
            target = if span.frequency.is_some() { span.amplitude } else { 0.0 };
            step = (target - amp).abs() / AMPLITUDE_RAMP as f64;
        }
        if amp < target {
            amp = (amp + step).min(target);
        } else if amp > target {
            amp = (amp - step).max(target);
        }
        let tone = match freq {
            Some(f) => {
                phase = (phase + TAU * f / sr) % TAU;
                amp * phase.sin()
            }
            None => 0.0,
        };
        out.push(tone);
    }

    if noise.noise_floor > 0.0 {
        let half_width = noise.noise_floor * 3f64.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        for x in &mut out {
            *x += rng.gen_range(-half_width..=half_width);
        }
    }
    for x in &mut out {
        *x = x.clamp(-1.0, 1.0);
    }
    Ok(AudioSignal {
        sample_rate,
        samples: out,
        sync_marker_time: None,
    })
}

/// Tone spans for each interval of the sweep.
pub fn sweep_spans(response: &AcousticResponse) -> Vec<ToneSpan> {
    response
        .samples
        .iter()
        .map(|s| ToneSpan {
            frequency: s.frequency,
            amplitude: s.amplitude,
        })
        .collect()
}

/// Synthesizes the microphone signal of one flow-sweep recording.
pub fn synthesize(
    g: &StretchedGeometry,
    sweep: &FlowSweep,
    vm: &VortexModel,
    noise: &NoiseModel,
    config: &AcousticConfig,
    sample_rate: u32,
) -> Result<AudioSignal> {
    let response = acoustic_response(g, vm, &sweep.interval_speeds(), config)?;
    let mut signal = render_tones(
        &sweep_spans(&response),
        sweep.sample_interval(),
        sweep.duration(),
        sample_rate,
        noise,
    )?;
    signal.sync_marker_time = Some(0.0);
    Ok(signal)
}

/// Finger pose driving the sensor's two halves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointConfig {
    /// Proximal joint angle, radians; stretches the inlet half.
    pub proximal_angle: f64,
    /// Distal joint angle, radians; stretches the outlet half.
    pub distal_angle: f64,
    #[serde(default = "default_joint_radius")]
    pub joint_radius_mm: f64,
}

fn default_joint_radius() -> f64 {
    JointConfig::DEFAULT_RADIUS_MM
}

impl JointConfig {
    pub const DEFAULT_RADIUS_MM: f64 = 6.0;

    pub fn new(proximal_angle: f64, distal_angle: f64) -> Result<Self> {
        let j = JointConfig {
            proximal_angle,
            distal_angle,
            joint_radius_mm: Self::DEFAULT_RADIUS_MM,
        };
        j.validate()?;
        Ok(j)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("proximal_angle", self.proximal_angle),
            ("distal_angle", self.distal_angle),
        ] {
            if !(0.0..=PI / 2.0).contains(&v) {
                return Err(Error::OutOfRange {
                    field,
                    value: v,
                    min: 0.0,
                    max: PI / 2.0,
                });
            }
        }
        if !(self.joint_radius_mm > 0.0) {
            return Err(Error::Domain("joint radius must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointStretch {
    pub stretch: StretchState,
    /// Set when an arc length exceeded the sensing range.
    pub clamped: bool,
}

/// Arc length over each joint, clamped into the sensing range.
pub fn joint_config_to_stretch(j: &JointConfig) -> JointStretch {
    let (stretch, clamped) =
        StretchState::clamped(j.joint_radius_mm * j.proximal_angle, j.joint_radius_mm * j.distal_angle);
    JointStretch { stretch, clamped }
}
