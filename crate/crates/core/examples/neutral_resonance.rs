//! Resonance modes of the three sensor presets at rest and under stretch.

use corrugated_sensor::acoustics::{
    cummings_mode, open_pipe_mode, AcousticConfig, FlowState, ModeTable, SPEED_OF_SOUND,
};
use corrugated_sensor::geometry::{apply_stretch, build_sensor, SensorPreset, StretchState};

fn main() -> corrugated_sensor::Result<()> {
    let cfg = AcousticConfig::default();
    for preset in SensorPreset::ALL {
        let tube = build_sensor(preset);
        let inlet = tube.segments()[0].profile;
        println!(
            "{preset}: length {:.3} mm, inlet pitch {:.3} mm, correction term {:.4}",
            tube.rest_length_mm(),
            inlet.pitch_mm(),
            inlet.correction_term(tube.inner_radius_mm())
        );
        let open = open_pipe_mode(1, tube.rest_length_mm(), SPEED_OF_SOUND)?;
        for (a, b) in [(0.0, 0.0), (5.0, 5.0), (10.0, 0.0), (0.0, 10.0)] {
            let g = apply_stretch(&tube, StretchState::new(a, b)?)?;
            let f1 = cummings_mode(1, &g, FlowState::still(), SPEED_OF_SOUND)?;
            let table = ModeTable::new(&g, FlowState::still(), &cfg);
            let in_band: Vec<String> = table
                .modes
                .iter()
                .map(|m| format!("{}:{:.0}", m.number, m.frequency))
                .collect();
            println!(
                "  stretch ({a:>4}, {b:>4}) mm  f1 {f1:7.2} Hz  in-band modes {}",
                in_band.join(" ")
            );
        }
        println!("  (an open pipe of the same length would sit at {open:.1} Hz)");
    }
    Ok(())
}
