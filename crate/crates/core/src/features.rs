//! Regression features from a peak track: peak frequency per flow-speed bin,
//! and the zero-intercept F-U slope.

use serde::{Deserialize, Serialize};

use crate::dsp::PeakTrack;
use crate::error::{Error, Result};
use crate::synthesis::FlowSweep;

pub const FEATURE_DIM: usize = 32;

/// Peak frequency (Hz) in each uniform flow-speed bin over `[0, U_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_span(track: &PeakTrack, sweep: &FlowSweep) -> Result<()> {
    let end = sweep.samples().last().map(|s| s.0).unwrap_or(0.0).max(sweep.duration());
    for p in &track.points {
        if p.time < 0.0 || p.time > end + 1e-9 {
            return Err(Error::InvalidAnalysis(format!(
                "frame at {} s lies outside the {end} s sweep",
                p.time
            )));
        }
    }
    Ok(())
}

/// Averages voiced peaks per flow bin; empty bins are interpolated from their
/// nearest filled neighbours, edge bins copy the nearest filled bin.
pub fn extract_features(track: &PeakTrack, sweep: &FlowSweep, bins: usize) -> Result<FeatureVector> {
    if bins == 0 {
        return Err(Error::Domain("feature bins must be positive".into()));
    }
    check_span(track, sweep)?;
    let u_max = sweep.u_max();
    if !(u_max > 0.0) {
        return Err(Error::Domain("sweep never leaves zero flow".into()));
    }
    let mut sum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for (t, f) in track.voiced() {
        let u = sweep.speed_at(t);
        let b = ((u / u_max * bins as f64) as usize).min(bins - 1);
        sum[b] += f;
        count[b] += 1;
    }
    let filled: Vec<usize> = (0..bins).filter(|&b| count[b] > 0).collect();
    if filled.is_empty() {
        return Err(Error::InsufficientData("every flow bin is silent".into()));
    }
    let mean = |b: usize| sum[b] / count[b] as f64;
    let mut values = vec![0.0; bins];
    for (b, v) in values.iter_mut().enumerate() {
        *v = match filled.binary_search(&b) {
            Ok(_) => mean(b),
            Err(0) => mean(filled[0]),
            Err(i) if i == filled.len() => mean(filled[i - 1]),
            Err(i) => {
                let (lo, hi) = (filled[i - 1], filled[i]);
                let w = (b - lo) as f64 / (hi - lo) as f64;
                mean(lo) + w * (mean(hi) - mean(lo))
            }
        };
    }
    Ok(FeatureVector(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Hz per m/s.
    pub slope: f64,
    /// RMS residual of the voiced points, Hz.
    pub residual_rms: f64,
    pub points: usize,
}

/// Least-squares line through the origin, `f = slope * U`, over voiced frames.
pub fn fit_fu_slope(track: &PeakTrack, sweep: &FlowSweep) -> Result<SlopeFit> {
    check_span(track, sweep)?;
    let pts: Vec<(f64, f64)> = track.voiced().map(|(t, f)| (sweep.speed_at(t), f)).collect();
    fit_through_origin(&pts)
}

pub fn fit_through_origin(pts: &[(f64, f64)]) -> Result<SlopeFit> {
    if pts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "slope fit needs at least 2 voiced points, got {}",
            pts.len()
        )));
    }
    let suu: f64 = pts.iter().map(|(u, _)| u * u).sum();
    if !(suu > 0.0) {
        return Err(Error::InsufficientData("all voiced points are at zero flow".into()));
    }
    let suf: f64 = pts.iter().map(|(u, f)| u * f).sum();
    let slope = suf / suu;
    let sse: f64 = pts.iter().map(|(u, f)| (f - slope * u).powi(2)).sum();
    Ok(SlopeFit {
        slope,
        residual_rms: (sse / pts.len() as f64).sqrt(),
        points: pts.len(),
    })
}
