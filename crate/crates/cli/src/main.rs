use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dld_cli::config::{ExperimentConfig, ExperimentKind, ScaleKind};

/// Numerical laboratory for deep linear network learning dynamics.
#[derive(Parser)]
#[command(name = "dld", version, about)]
struct Cli {
    #[command(subcommand)]
    experiment: Experiment,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// JSON experiment configuration; omit to use the built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: out/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Parameter scale for the built-in defaults.
    #[arg(long, value_enum, default_value = "desk")]
    scale: ScaleArg,
}

#[derive(Subcommand)]
enum Experiment {
    /// Mode-strength learning curves on the tree task (analytic, linear,
    /// tanh) plus half-learning delays.
    ModeCurves(CommonArgs),
    /// Learning time and optimal rate versus depth from decoupled starts.
    DepthSweep(CommonArgs),
    /// Learning time versus depth across initialization schemes.
    InitCompare(CommonArgs),
    /// Random versus greedy-pretrained depth-5 training, pretraining time
    /// included.
    PretrainVsRandom(CommonArgs),
    /// Singular-value histograms of random matrix products.
    Spectra(CommonArgs),
    /// Edge-of-chaos fixed-point curve and deep-network simulation.
    Chaos(CommonArgs),
    /// Jacobian isometry metrics over a gain x input-variance grid.
    IsometryGrid(CommonArgs),
    /// Consistency condition diagnostics for a task.
    Consistency(CommonArgs),
}

impl Experiment {
    fn kind(&self) -> ExperimentKind {
        match self {
            Experiment::ModeCurves(_) => ExperimentKind::ModeCurves,
            Experiment::DepthSweep(_) => ExperimentKind::DepthSweep,
            Experiment::InitCompare(_) => ExperimentKind::InitCompare,
            Experiment::PretrainVsRandom(_) => ExperimentKind::PretrainVsRandom,
            Experiment::Spectra(_) => ExperimentKind::Spectra,
            Experiment::Chaos(_) => ExperimentKind::Chaos,
            Experiment::IsometryGrid(_) => ExperimentKind::IsometryGrid,
            Experiment::Consistency(_) => ExperimentKind::Consistency,
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Experiment::ModeCurves(a)
            | Experiment::DepthSweep(a)
            | Experiment::InitCompare(a)
            | Experiment::PretrainVsRandom(a)
            | Experiment::Spectra(a)
            | Experiment::Chaos(a)
            | Experiment::IsometryGrid(a)
            | Experiment::Consistency(a) => a,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let kind = cli.experiment.kind();
    let args = cli.experiment.args();
    let scale = match args.scale {
        ScaleArg::Desk => ScaleKind::Desk,
        ScaleArg::Paper => ScaleKind::Paper,
    };

    let mut config = match &args.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(config) => {
                if config.experiment != kind {
                    eprintln!(
                        "error: config file is for `{}`, invoked as `{}`",
                        config.experiment.name(),
                        kind.name()
                    );
                    return ExitCode::from(2);
                }
                config
            }
            Err(err) => {
                eprintln!("error: {err}");
                return ExitCode::from(err.exit_code() as u8);
            }
        },
        None => ExperimentConfig::default_for(kind, scale),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));

    match dld_cli::experiments::run(&config, &out_dir) {
        Ok(status) => {
            if status.divergence_only {
                eprintln!("warning: every training cell diverged; see {}", out_dir.display());
                ExitCode::from(3)
            } else {
                println!("wrote results to {}", out_dir.display());
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
