//! How distinguishable is stretching the inlet from stretching the outlet?
//! Correlates each (a, b) recording with its (b, a) twin over the grid.

use corrugated_sensor::experiments::{mutual_similarity, PipelineConfig, SensorModel};
use corrugated_sensor::geometry::SensorPreset;

fn main() -> corrugated_sensor::Result<()> {
    let grid: Vec<f64> = (0..=10).map(f64::from).collect();
    for preset in SensorPreset::ALL {
        let r = mutual_similarity(
            &SensorModel::preset(preset)?,
            &grid,
            1,
            &PipelineConfig::default(),
            None,
        )?;
        println!(
            "{preset}: mean mutual correlation {:.3}, min self-pair {:.3}, mean entropy {:.3} bits",
            r.mean_mutual, r.min_diagonal, r.mean_entropy
        );
        for (a, row) in r.matrix.iter().enumerate().step_by(2) {
            let cells: Vec<String> = row.iter().step_by(2).map(|c| format!("{c:5.2}")).collect();
            println!("  {:>4} mm | {}", grid[a], cells.join(" "));
        }
    }
    Ok(())
}
