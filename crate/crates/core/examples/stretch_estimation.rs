//! The full protocol: 442 recordings, an 80/20 split and three boosted
//! models estimating inlet, outlet and total stretch.

use corrugated_sensor::experiments::{generate_dataset, run_evaluation, PipelineConfig, ProtocolSpec};
use corrugated_sensor::geometry::SensorPreset;
use corrugated_sensor::regression::Target;

fn main() -> corrugated_sensor::Result<()> {
    let seed = 1;
    for preset in SensorPreset::ALL {
        let d = generate_dataset(&ProtocolSpec::new(preset, seed), &PipelineConfig::default(), None)?;
        let report = run_evaluation(&d, seed)?;
        let mae: Vec<String> = Target::ALL
            .iter()
            .map(|&t| format!("{t} {:.3}", report.mae(t).unwrap()))
            .collect();
        println!(
            "{preset}: {} rows ({} train / {} test), MAE mm: {}; inlet+outlet {:.3} vs total {:.3}",
            d.len(),
            report.train_rows,
            report.test_rows,
            mae.join(", "),
            report.additivity.inlet_plus_outlet_mae_mm,
            report.additivity.total_mae_mm
        );
    }
    Ok(())
}
