//! Time-frequency analysis: magnitude STFT, band-limited peak tracking,
//! spectral entropy and spectrogram correlation.

use std::f64::consts::TAU;
use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synthesis::AudioSignal;

pub const DEFAULT_WINDOW: usize = 1024;
pub const DEFAULT_HOP: usize = 256;

/// Magnitude spectrogram, frames × bins, row-major.
///
/// Magnitudes are `|X_k| / sqrt(N)` for the Hann-windowed frame, so the
/// one-sided energy (`Spectrogram::frame_energy`) equals the energy of the
/// windowed frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub sample_rate: u32,
    pub window: usize,
    pub hop: usize,
    pub frame_times: Vec<f64>,
    pub freq_bins: Vec<f64>,
    magnitudes: Vec<f64>,
}

impl Spectrogram {
    /// Builds a spectrogram from raw parts; `magnitudes` is row-major.
    pub fn from_parts(
        sample_rate: u32,
        window: usize,
        hop: usize,
        frame_times: Vec<f64>,
        freq_bins: Vec<f64>,
        magnitudes: Vec<f64>,
    ) -> Result<Self> {
        if magnitudes.len() != frame_times.len() * freq_bins.len() {
            return Err(Error::LengthMismatch {
                left: magnitudes.len(),
                right: frame_times.len() * freq_bins.len(),
            });
        }
        if magnitudes.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::InvalidAnalysis("magnitudes must be non-negative".into()));
        }
        Ok(Spectrogram {
            sample_rate,
            window,
            hop,
            frame_times,
            freq_bins,
            magnitudes,
        })
    }

    pub fn n_frames(&self) -> usize {
        self.frame_times.len()
    }

    pub fn n_bins(&self) -> usize {
        self.freq_bins.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_frames(), self.n_bins())
    }

    pub fn bin_width(&self) -> f64 {
        self.sample_rate as f64 / self.window as f64
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        let n = self.n_bins();
        &self.magnitudes[i * n..(i + 1) * n]
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    /// One-sided spectral energy of frame `i`.
    pub fn frame_energy(&self, i: usize) -> f64 {
        let row = self.frame(i);
        let last = row.len() - 1;
        row.iter()
            .enumerate()
            .map(|(k, m)| if k == 0 || k == last { m * m } else { 2.0 * m * m })
            .sum()
    }

    /// CSV with a `time_s` column followed by one column per bin frequency.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time_s".to_string()];
        header.extend(self.freq_bins.iter().map(|f| f.to_string()));
        w.write_record(&header)?;
        for (i, t) in self.frame_times.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(self.frame(i).iter().map(|m| m.to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<spectrogram csv>", e))?;
        Ok(())
    }
}

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (TAU * i as f64 / n as f64).cos()).collect()
}

pub fn stft(signal: &AudioSignal, window: usize, hop: usize) -> Result<Spectrogram> {
    if window < 2 || !window.is_power_of_two() {
        return Err(Error::InvalidAnalysis(format!(
            "window {window} must be a power of two"
        )));
    }
    if hop == 0 || hop > window {
        return Err(Error::InvalidAnalysis(format!("hop {hop} must be in 1..={window}")));
    }
    let x = &signal.samples;
    if x.len() < window {
        return Err(Error::SignalTooShort { len: x.len(), window });
    }
    let sr = signal.sample_rate as f64;
    let n_frames = 1 + (x.len() - window) / hop;
    let n_bins = window / 2 + 1;
    let taper = hann(window);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(window);
    let scale = 1.0 / (window as f64).sqrt();

    let mut buf = vec![Complex::new(0.0, 0.0); window];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut magnitudes = Vec::with_capacity(n_frames * n_bins);
    for f in 0..n_frames {
        let start = f * hop;
        for (b, (s, w)) in buf.iter_mut().zip(x[start..start + window].iter().zip(&taper)) {
            *b = Complex::new(s * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        magnitudes.extend(buf[..n_bins].iter().map(|c| c.norm() * scale));
    }
    let frame_times = (0..n_frames).map(|f| (f * hop + window / 2) as f64 / sr).collect();
    let freq_bins = (0..n_bins).map(|k| k as f64 * sr / window as f64).collect();
    Ok(Spectrogram {
        sample_rate: signal.sample_rate,
        window,
        hop,
        frame_times,
        freq_bins,
        magnitudes,
    })
}

/// Gate a frame's peak must clear to count as a tone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakThreshold {
    Absolute(f64),
    /// Multiple of the frame's median magnitude.
    MedianMultiple(f64),
}

impl Default for PeakThreshold {
    fn default() -> Self {
        PeakThreshold::MedianMultiple(4.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakPoint {
    pub time: f64,
    pub frequency: Option<f64>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakTrack {
    pub points: Vec<PeakPoint>,
}

impl PeakTrack {
    pub fn voiced(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().filter_map(|p| p.frequency.map(|f| (p.time, f)))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time_s", "peak_hz", "magnitude"])?;
        for p in &self.points {
            let f = p.frequency.map(|f| f.to_string()).unwrap_or_default();
            w.write_record([p.time.to_string(), f, p.magnitude.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<peak csv>", e))?;
        Ok(())
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-frame in-band argmax; ties resolve to the lower frequency.
pub fn peak_track(spec: &Spectrogram, band: (f64, f64), threshold: PeakThreshold) -> Result<PeakTrack> {
    let (low, high) = band;
    let nyquist = spec.sample_rate as f64 / 2.0;
    if !(low >= 0.0 && low < high && high <= nyquist) {
        return Err(Error::InvalidAnalysis(format!(
            "band ({low}, {high}) must lie within [0, {nyquist}] Hz"
        )));
    }
    let bins: Vec<usize> = (0..spec.n_bins())
        .filter(|&k| spec.freq_bins[k] >= low && spec.freq_bins[k] <= high)
        .collect();
    if bins.is_empty() {
        return Err(Error::InvalidAnalysis(format!("band ({low}, {high}) contains no bins")));
    }
    let points = (0..spec.n_frames())
        .map(|i| {
            let row = spec.frame(i);
            let mut best = bins[0];
            for &k in &bins[1..] {
                if row[k] > row[best] {
                    best = k;
                }
            }
            let gate = match threshold {
                PeakThreshold::Absolute(v) => v,
                PeakThreshold::MedianMultiple(m) => m * median(row),
            };
            let mag = row[best];
            let voiced = mag > 0.0 && mag >= gate;
            PeakPoint {
                time: spec.frame_times[i],
                frequency: voiced.then(|| spec.freq_bins[best]),
                magnitude: mag,
            }
        })
        .collect();
    Ok(PeakTrack { points })
}

/// Shannon entropy in bits of the sum-normalized magnitudes.
///
/// Evaluated as `log2(T) - Σ m log2(m) / T`, which is exact for unit cells.
pub fn spectral_entropy(spec: &Spectrogram) -> Result<f64> {
    let total: f64 = spec.magnitudes.iter().sum();
    if !(total > 0.0) {
        return Err(Error::UndefinedEntropy);
    }
    let weighted: f64 = spec
        .magnitudes
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| m * m.log2())
        .sum();
    Ok(total.log2() - weighted / total)
}

/// Pearson correlation of the flattened magnitudes.
pub fn correlation(a: &Spectrogram, b: &Spectrogram) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    pearson(&a.magnitudes, &b.magnitudes)
}

pub(crate) fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 {
        return Err(Error::UndefinedCorrelation("first spectrogram"));
    }
    if syy == 0.0 {
        return Err(Error::UndefinedCorrelation("second spectrogram"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
