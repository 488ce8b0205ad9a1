//! The recording protocol, model evaluation and the analyses built on them.

mod analysis;
mod evaluation;
mod pipeline;
mod protocol;

pub use analysis::{
    default_finger_poses, default_slope_conditions, finger_scenario, mutual_similarity, slope_table, FingerPose,
    FingerReport, SimilarityReport, SlopeRow, REFERENCE_RESONANCE_HZ,
};
pub use evaluation::{
    evaluate_models, run_evaluation, run_evaluation_with, train_models, AdditivityCheck, EvalConfig, PredictionPair,
    RunReport, TargetReport, TrainedModels, MIN_EVAL_ROWS, REPORT_SCHEMA_VERSION,
};
pub use pipeline::{record, record_features, PipelineConfig, Recording, SensorModel};
pub use protocol::{generate_dataset, stretch_points, ProtocolSpec, StretchPoint};
