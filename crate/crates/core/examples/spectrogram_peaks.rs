//! STFT and peak tracking of a synthetic recording, then the flow-binned
//! features and the F-U slope fit.

use corrugated_sensor::experiments::{record, PipelineConfig, SensorModel};
use corrugated_sensor::features::fit_fu_slope;
use corrugated_sensor::geometry::{SensorPreset, StretchState};

fn main() -> corrugated_sensor::Result<()> {
    let cfg = PipelineConfig::default();
    let sensor = SensorModel::preset(SensorPreset::P41)?;
    let r = record(&sensor, StretchState::new(4.0, 2.0)?, 7, &cfg)?;
    let spec = &r.spectrogram;
    println!(
        "{} frames x {} bins, bin width {:.2} Hz",
        spec.n_frames(),
        spec.n_bins(),
        spec.bin_width()
    );
    for p in r.track.points.iter().step_by(8) {
        match p.frequency {
            Some(f) => println!("  t {:.3} s  peak {f:7.1} Hz  |X| {:.3}", p.time, p.magnitude),
            None => println!("  t {:.3} s  (no tone)", p.time),
        }
    }
    let fv = r.features(&cfg)?;
    println!(
        "features: {:?}",
        fv.values().iter().map(|v| v.round()).collect::<Vec<_>>()
    );
    let fit = fit_fu_slope(&r.track, &cfg.sweep()?)?;
    println!("F-U slope {:.1} Hz/(m/s) over {} voiced frames", fit.slope, fit.points);
    Ok(())
}
