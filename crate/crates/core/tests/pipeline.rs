use corrugated_sensor::experiments::{
    finger_scenario, generate_dataset, record, run_evaluation, stretch_points, train_models, EvalConfig,
    PipelineConfig, ProtocolSpec, SensorModel,
};
use corrugated_sensor::geometry::{SensorPreset, StretchState};
use corrugated_sensor::regression::{Dataset, Target};
use corrugated_sensor::synthesis::JointConfig;

fn single_grid(sensor: SensorPreset, seed: u64) -> ProtocolSpec {
    ProtocolSpec {
        grid_repeats: 1,
        random_count: 0,
        ..ProtocolSpec::new(sensor, seed)
    }
}

#[test]
fn single_grid_pass_gives_121_rows() {
    let d = generate_dataset(&single_grid(SensorPreset::P31, 1), &PipelineConfig::default(), None).unwrap();
    assert_eq!(d.len(), 121);
    assert_eq!(d.n_features(), 32);
    for r in d.rows() {
        assert_eq!(r.total_mm, r.inlet_mm + r.outlet_mm);
        assert!(
            r.features.iter().all(|f| (3000.0..=8000.0).contains(f)),
            "{:?}",
            r.features
        );
    }
}

#[test]
fn rows_regenerate_from_their_seed() {
    let spec = ProtocolSpec {
        grid_step_mm: 5.0,
        random_count: 3,
        ..ProtocolSpec::new(SensorPreset::Pdual, 9)
    };
    let cfg = PipelineConfig::default();
    let d = generate_dataset(&spec, &cfg, Some(2)).unwrap();
    let sensor = SensorModel::preset(SensorPreset::Pdual).unwrap();
    let points = stretch_points(&spec).unwrap();
    for i in [0, 7, d.len() - 1] {
        let row = &d.rows()[i];
        assert_eq!(row.provenance.seed, points[i].seed);
        let stretch = StretchState::new(row.inlet_mm, row.outlet_mm).unwrap();
        let again = record(&sensor, stretch, row.provenance.seed, &cfg)
            .unwrap()
            .features(&cfg)
            .unwrap();
        assert_eq!(again.values(), row.features.as_slice());
    }
}

#[test]
fn csv_round_trip_preserves_dataset() {
    let spec = ProtocolSpec {
        grid_step_mm: 5.0,
        random_count: 4,
        ..ProtocolSpec::new(SensorPreset::P41, 2)
    };
    let d = generate_dataset(&spec, &PipelineConfig::default(), None).unwrap();
    let mut buf = Vec::new();
    d.write_csv(&mut buf).unwrap();
    assert_eq!(Dataset::read_csv(buf.as_slice()).unwrap(), d);
}

#[test]
fn stretch_is_learnable_from_one_grid_pass() {
    let d = generate_dataset(&single_grid(SensorPreset::Pdual, 3), &PipelineConfig::default(), None).unwrap();
    let r = run_evaluation(&d, 3).unwrap();
    for t in Target::ALL {
        // a predictor stuck at the mean would score about 2.5 mm (inlet/outlet) or 3.3 mm (total)
        assert!(r.mae(t).unwrap() < 1.5, "{t}: {:?}", r.mae(t));
    }
    assert_eq!(r.train_rows + r.test_rows, 121);
}

#[test]
fn proximal_bend_is_estimated_near_its_arc() {
    let cfg = PipelineConfig::default();
    let d = generate_dataset(&ProtocolSpec::new(SensorPreset::Pdual, 5), &cfg, None).unwrap();
    let models = train_models(&d, 5, &EvalConfig::default()).unwrap();
    let mae_bound = 1.0;
    let sensor = SensorModel::preset(SensorPreset::Pdual).unwrap();
    let pose = JointConfig::new(std::f64::consts::FRAC_PI_3, 0.0).unwrap();
    let r = finger_scenario(&sensor, &[pose], Some(&models), 11, &cfg).unwrap();
    let p = r.poses[0].predicted_mm.unwrap();
    assert!((r.poses[0].stretch.inlet_mm() - std::f64::consts::TAU).abs() < 1e-9);
    assert!((p[0] - std::f64::consts::TAU).abs() < 2.0 * mae_bound, "{p:?}");
    assert!(p[1].abs() < 2.0 * mae_bound, "{p:?}");
}
