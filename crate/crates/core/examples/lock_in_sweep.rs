//! Vortex shedding rises linearly with flow; the emitted tone locks onto
//! the nearest in-band mode and steps between plateaus.

use corrugated_sensor::acoustics::{acoustic_response, vortex_frequency, AcousticConfig, FlowState};
use corrugated_sensor::experiments::SensorModel;
use corrugated_sensor::geometry::{SensorPreset, StretchState};

fn main() -> corrugated_sensor::Result<()> {
    let cfg = AcousticConfig::default();
    let sensor = SensorModel::preset(SensorPreset::P31)?;
    let (g, vm) = sensor.stretched(StretchState::NEUTRAL)?;
    println!(
        "St = {:.4}, L = {:.4} mm, slope {:.1} Hz/(m/s)",
        vm.strouhal,
        vm.char_length_mm,
        vm.slope()
    );

    let speeds: Vec<f64> = (0..=48).map(|i| i as f64 * 0.25).collect();
    let response = acoustic_response(&g, &vm, &speeds, &cfg)?;
    println!(
        "{:>6} {:>9} {:>9} {:>5} {:>6}",
        "U m/s", "f_v Hz", "tone Hz", "mode", "amp"
    );
    for s in &response.samples {
        let f_v = vortex_frequency(FlowState::new(s.speed, cfg.speed_of_sound)?, &vm);
        let tone = s.frequency.map_or("-".to_string(), |f| format!("{f:.1}"));
        let mode = s.mode.map_or("-".to_string(), |m| m.to_string());
        println!("{:6.2} {f_v:9.1} {tone:>9} {mode:>5} {:6.3}", s.speed, s.amplitude);
    }

    let reversed = sensor.reversed();
    let (g, vm) = reversed.stretched(StretchState::NEUTRAL)?;
    let silent = acoustic_response(&g, &vm, &speeds, &cfg)?.is_silent();
    println!("P31 reversed is silent: {silent} (uniform tube, same either way)");
    let dual = SensorModel::preset(SensorPreset::Pdual)?.reversed();
    let (g, vm) = dual.stretched(StretchState::NEUTRAL)?;
    println!(
        "Pdual reversed is silent: {}",
        acoustic_response(&g, &vm, &speeds, &cfg)?.is_silent()
    );
    Ok(())
}
