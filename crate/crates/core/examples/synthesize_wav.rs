//! Render one flow-sweep recording to a WAV file.
//!
//! Usage: `synthesize_wav [inlet_mm] [outlet_mm] [out.wav]`

use corrugated_sensor::experiments::{PipelineConfig, SensorModel};
use corrugated_sensor::geometry::{SensorPreset, StretchState};
use corrugated_sensor::synthesis::synthesize;

fn main() -> corrugated_sensor::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let num = |i: usize| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let out = args.get(2).cloned().unwrap_or_else(|| "pdual_sweep.wav".into());
    let stretch = StretchState::new(num(0), num(1))?;

    let cfg = PipelineConfig::default();
    let sensor = SensorModel::preset(SensorPreset::Pdual)?;
    let (g, vm) = sensor.stretched(stretch)?;
    let signal = synthesize(&g, &cfg.sweep()?, &vm, &cfg.noise(42)?, &cfg.acoustics, cfg.sample_rate)?;
    signal.write_wav(&out)?;
    println!(
        "wrote {out}: {} samples, {:.2} s, energy {:.1}, stretch ({}, {}) mm",
        signal.samples.len(),
        signal.duration(),
        signal.energy(),
        stretch.inlet_mm(),
        stretch.outlet_mm()
    );
    Ok(())
}
