use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use corrugated_sensor::experiments::{
    default_finger_poses, default_slope_conditions, evaluate_models, finger_scenario, generate_dataset,
    mutual_similarity, record, slope_table, train_models, EvalConfig, PipelineConfig, ProtocolSpec, SensorModel,
    TrainedModels,
};
use corrugated_sensor::geometry::{SensorPreset, StretchState};
use corrugated_sensor::regression::Dataset;
use corrugated_sensor::{Error, Result};

/// Corrugated-tube acoustic strain sensor: simulation, datasets, training
/// and analyses.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Sensor preset.
    #[arg(long, global = true, value_parser = ["p31", "p41", "pdual"])]
    sensor: Option<String>,
    /// Master seed for noise, random stretch points and the train/test split.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// JSON run configuration (pipeline, protocol, eval sections; all optional).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for recording synthesis.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Record one stretch state: WAV, spectrogram CSV and peak-track CSV.
    Simulate {
        #[arg(long, default_value_t = 0.0)]
        inlet: f64,
        #[arg(long, default_value_t = 0.0)]
        outlet: f64,
        /// Blow through the tube from the outlet end.
        #[arg(long)]
        reversed: bool,
    },
    /// Run the recording protocol and write the feature CSV.
    Dataset,
    /// Train inlet, outlet and total models on a feature CSV.
    Train {
        #[arg(long)]
        data: PathBuf,
    },
    /// Held-out MAE report; trains first unless --model is given.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Correlation of mutual stretch pairs over a grid, plus entropy.
    Similarity {
        #[arg(long, default_value_t = 1.0)]
        grid_step: f64,
    },
    /// F-U slope and resonance near 5.5 kHz per stretch condition.
    Slopes,
    /// Finger poses mapped to stretch, recorded and optionally estimated.
    Finger {
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    pipeline: PipelineConfig,
    protocol: ProtocolSpec,
    eval: EvalConfig,
}

struct Ctx {
    sensor: SensorPreset,
    seed: u64,
    out: PathBuf,
    workers: Option<usize>,
    cfg: RunConfig,
}

impl Ctx {
    fn from_cli(cli: &Cli) -> Result<Self> {
        let mut cfg = match &cli.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(s) = &cli.sensor {
            cfg.protocol.sensor = s.parse()?;
        }
        if let Some(seed) = cli.seed {
            cfg.protocol.master_seed = seed;
        }
        fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
        Ok(Ctx {
            sensor: cfg.protocol.sensor,
            seed: cfg.protocol.master_seed,
            out: cli.out.clone(),
            workers: cli.workers,
            cfg,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    Dataset::read_csv(File::open(path).map_err(|e| Error::io(path, e))?)
}

fn run(cli: &Cli) -> Result<serde_json::Value> {
    let ctx = Ctx::from_cli(cli)?;
    let pipeline = &ctx.cfg.pipeline;
    let sensor = SensorModel::preset(ctx.sensor)?;
    match &cli.command {
        Command::Simulate {
            inlet,
            outlet,
            reversed,
        } => {
            let model = if *reversed { sensor.reversed() } else { sensor };
            let stretch = StretchState::new(*inlet, *outlet)?;
            let r = record(&model, stretch, ctx.seed, pipeline)?;
            let (wav, spec, peaks) = (
                ctx.path("recording.wav"),
                ctx.path("spectrogram.csv"),
                ctx.path("peaks.csv"),
            );
            r.signal.write_wav(&wav)?;
            r.spectrogram.write_csv(create(&spec)?)?;
            r.track.write_csv(create(&peaks)?)?;
            Ok(json!({
                "sensor": model.name,
                "stretch": stretch,
                "voiced_frames": r.track.voiced().count(),
                "frames": r.track.points.len(),
                "outputs": [wav, spec, peaks],
            }))
        }
        Command::Dataset => {
            let d = generate_dataset(&ctx.cfg.protocol, pipeline, ctx.workers)?;
            let path = ctx.path(&format!("dataset_{}.csv", ctx.sensor));
            d.write_csv(create(&path)?)?;
            Ok(json!({ "sensor": ctx.sensor, "rows": d.len(), "seed": ctx.seed, "outputs": [path] }))
        }
        Command::Train { data } => {
            let d = load_dataset(data)?;
            let models = train_models(&d, ctx.seed, &ctx.cfg.eval)?;
            let path = ctx.path("model.json");
            models.save(&path)?;
            Ok(json!({ "rows": d.len(), "seed": ctx.seed, "outputs": [path] }))
        }
        Command::Eval { data, model } => {
            let d = load_dataset(data)?;
            let models = match model {
                Some(p) => TrainedModels::load(p)?,
                None => train_models(&d, ctx.seed, &ctx.cfg.eval)?,
            };
            let report = evaluate_models(&models, &d)?;
            let (rep, pred) = (ctx.path("report.json"), ctx.path("predictions.csv"));
            write_json(&rep, &report)?;
            report.write_predictions_csv(create(&pred)?)?;
            let mae: serde_json::Map<_, _> = report
                .targets
                .iter()
                .map(|t| (t.target.to_string(), json!(t.mae_mm)))
                .collect();
            Ok(json!({ "mae_mm": mae, "test_rows": report.test_rows, "outputs": [rep, pred] }))
        }
        Command::Similarity { grid_step } => {
            let grid = ProtocolSpec {
                grid_step_mm: *grid_step,
                ..ctx.cfg.protocol.clone()
            }
            .grid_values()?;
            let r = mutual_similarity(&sensor, &grid, ctx.seed, pipeline, ctx.workers)?;
            let path = ctx.path(&format!("similarity_{}.json", ctx.sensor));
            write_json(&path, &r)?;
            Ok(json!({
                "sensor": ctx.sensor,
                "mean_mutual": r.mean_mutual,
                "min_diagonal": r.min_diagonal,
                "mean_entropy": r.mean_entropy,
                "outputs": [path],
            }))
        }
        Command::Slopes => {
            let rows = slope_table(&sensor, &default_slope_conditions(), ctx.seed, pipeline)?;
            let path = ctx.path(&format!("slopes_{}.csv", ctx.sensor));
            let mut w = csv::Writer::from_writer(create(&path)?);
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
            Ok(json!({ "sensor": ctx.sensor, "slopes": rows, "outputs": [path] }))
        }
        Command::Finger { model } => {
            let models = model.as_ref().map(TrainedModels::load).transpose()?;
            let r = finger_scenario(&sensor, &default_finger_poses(), models.as_ref(), ctx.seed, pipeline)?;
            let path = ctx.path(&format!("finger_{}.json", ctx.sensor));
            write_json(&path, &r)?;
            let summary: Vec<_> = r
                .poses
                .iter()
                .map(|p| json!({ "stretch": p.stretch, "slope": p.slope, "predicted_mm": p.predicted_mm }))
                .collect();
            Ok(json!({ "sensor": ctx.sensor, "poses": summary, "outputs": [path] }))
        }
    }
}

fn fail(kind: &str, message: String, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.render().to_string(), 2),
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.kind(), e.to_string(), 1),
    }
}
