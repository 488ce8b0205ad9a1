//! Finger poses bend the two halves of a Pdual sensor; a model trained on
//! the protocol dataset reads the pose back from sound.

use corrugated_sensor::experiments::{
    default_finger_poses, finger_scenario, generate_dataset, train_models, EvalConfig, PipelineConfig, ProtocolSpec,
    SensorModel,
};
use corrugated_sensor::geometry::SensorPreset;
use corrugated_sensor::synthesis::JointConfig;

fn main() -> corrugated_sensor::Result<()> {
    let cfg = PipelineConfig::default();
    let d = generate_dataset(&ProtocolSpec::new(SensorPreset::Pdual, 3), &cfg, None)?;
    let models = train_models(&d, 3, &EvalConfig::default())?;

    let mut poses = default_finger_poses();
    poses.push(JointConfig::new(std::f64::consts::FRAC_PI_3, 0.0)?);
    let sensor = SensorModel::preset(SensorPreset::Pdual)?;
    let report = finger_scenario(&sensor, &poses, Some(&models), 8, &cfg)?;
    println!(
        "{:>9} {:>9} | {:>13} | {:>9} | predicted (inlet, outlet, total) mm",
        "proximal", "distal", "stretch mm", "slope"
    );
    for p in &report.poses {
        let [i, o, t] = p.predicted_mm.unwrap();
        println!(
            "{:8.1}° {:8.1}° | ({:5.2}, {:5.2}) | {:9} | ({i:5.2}, {o:5.2}, {t:5.2})",
            p.joint.proximal_angle.to_degrees(),
            p.joint.distal_angle.to_degrees(),
            p.stretch.inlet_mm(),
            p.stretch.outlet_mm(),
            p.slope.map_or("-".into(), |s| format!("{s:.1}")),
        );
    }
    Ok(())
}
