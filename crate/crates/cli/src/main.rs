//! Command-line front end for the posture pipelines.
//!
//! Exit codes: 0 success, 1 validation error (bad config, arguments or
//! input file contents), 2 runtime/IO error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<posture_core::pipeline::PipelineError> for CliError {
    fn from(e: posture_core::pipeline::PipelineError) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "posture",
    about = "Sleep posture one-shot learning pipelines: simulation, sensor fusion, augmentation, SVM-ECOC training and evaluation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON pipeline configuration; defaults match the reference protocol.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread cap for parallel stages.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the canonical posture set, its BVH motion sequence and
    /// (optionally) synthetic wearable IMU session logs.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Also synthesize per-posture IMU session CSVs (train and test).
        #[arg(long)]
        imu: bool,
    },
    /// Run the in-silico experiment over the configured noise settings.
    RunVirtual {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the wearable experiment from IMU session logs.
    RunWearable {
        #[command(flatten)]
        common: CommonArgs,
        /// Sessions manifest JSON produced by `simulate --imu` (or
        /// hand-written for real logs).
        #[arg(long)]
        sessions: PathBuf,
        /// Train on the full raw timeseries instead of augmented shots.
        #[arg(long)]
        no_augment: bool,
    },
    /// Filter and fuse one session log into per-joint relative
    /// orientations.
    Fuse {
        #[command(flatten)]
        common: CommonArgs,
        /// IMU session CSV.
        #[arg(long)]
        input: PathBuf,
    },
    /// Augment a posture set into a labeled training dataset.
    Augment {
        #[command(flatten)]
        common: CommonArgs,
        /// Posture manifest JSON from `simulate`.
        #[arg(long)]
        postures: PathBuf,
        /// Samples per class (defaults to the config's wearable count).
        #[arg(long)]
        count: Option<usize>,
    },
    /// Tune and train the SVM-ECOC model on a dataset CSV.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Dataset CSV (with sidecar manifest next to it).
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Predict labels for a dataset CSV with a trained model.
    Predict {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Compute metrics from a predictions CSV.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Predictions CSV from `predict`.
        #[arg(long)]
        predictions: PathBuf,
    },
    /// Intra-posture similarity matrix and one-vs-all scores between two
    /// datasets.
    Similarity {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Export labeled feature rows with split tags for external
    /// embedding tools.
    ExportFeatures {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { common, imu } => commands::simulate(&common, imu),
        Command::RunVirtual { common } => commands::run_virtual(&common),
        Command::RunWearable {
            common,
            sessions,
            no_augment,
        } => commands::run_wearable(&common, &sessions, no_augment),
        Command::Fuse { common, input } => commands::fuse(&common, &input),
        Command::Augment {
            common,
            postures,
            count,
        } => commands::augment(&common, &postures, count),
        Command::Train { common, dataset } => commands::train(&common, &dataset),
        Command::Predict {
            common,
            model,
            dataset,
        } => commands::predict(&common, &model, &dataset),
        Command::Evaluate {
            common,
            predictions,
        } => commands::evaluate(&common, &predictions),
        Command::Similarity {
            common,
            train,
            test,
        } => commands::similarity(&common, &train, &test),
        Command::ExportFeatures {
            common,
            train,
            test,
        } => commands::export_features(&common, &train, &test),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
