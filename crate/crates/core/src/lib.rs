//! Simulation and stretch estimation for a soft corrugated-tube acoustic
//! strain sensor.
//!
//! Air blown through a corrugated tube whistles: vortices shed over the
//! cavities lock onto the tube's standing-wave modes. Stretching the tube
//! shifts both the modes and the shedding rate, so the recorded tone encodes
//! how far each half of the tube is stretched.
//!
//! The crate follows that chain end to end:
//!
//! - [`geometry`]: tube presets and segment-wise stretch.
//! - [`acoustics`]: resonance modes, Strouhal shedding and lock-in.
//! - [`synthesis`]: flow sweeps rendered to audio, finger-joint poses.
//! - [`dsp`]: STFT, peak tracking, entropy and correlation.
//! - [`features`]: flow-binned peak features and F-U slope fits.
//! - [`regression`]: CART trees and gradient boosting.
//! - [`experiments`]: the recording protocol, evaluation and analyses.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! ```text
//! cargo run --release --example neutral_resonance
//! cargo run --release --example lock_in_sweep
//! cargo run --release --example synthesize_wav
//! cargo run --release --example spectrogram_peaks
//! cargo run --release --example stretch_estimation
//! cargo run --release --example similarity_entropy
//! cargo run --release --example finger_joints
//! ```

// NaN must fail these guards, so `!(x > 0.0)` is intended; 3.14 is a pitch in mm.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::approx_constant)]

pub mod acoustics;
pub mod dsp;
pub mod error;
pub mod experiments;
pub mod features;
pub mod geometry;
pub mod regression;
pub mod synthesis;

pub use error::{Error, Result};
