//! `spade`: quantum-limit estimates, misalignment models and calibration
//! pipelines for spatial-mode torsion readout.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "spade", version, about = "Spatial-mode demultiplexing readout of a torsion ribbon")]
struct Cli {
    /// Experiment configuration (`section.key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving CSV, report and plot files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides `numerics.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also render an SVG line plot next to every CSV.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Diffraction angle, photon flux, quantum-limited imprecision and backaction.
    Limits,
    /// Efficiency and imprecision versus lateral receiver shift.
    Misalign,
    /// Coupling coefficients of the configured modeshape into low-order HG modes.
    Overlap,
    /// HG10/HG01 couplings while translating the beam along the ribbon.
    Scan,
    /// Synthetic spectra, ringdown, knife-edge, shot-noise and coupling records.
    Synth,
    /// Fit a raw voltage spectrum against the thermal peak.
    Calibrate {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        detector: PathBuf,
        /// Optional shot-noise series (power_w, psd_v2_per_hz).
        #[arg(long)]
        shot: Option<PathBuf>,
        /// Optional channel-coupling data (x_m, eta00, eta10).
        #[arg(long)]
        coupling: Option<PathBuf>,
    },
    /// Fit a knife-edge power profile for the beam waist.
    Knife {
        #[arg(long)]
        input: PathBuf,
    },
    /// Fit a ringdown envelope for the quality factor.
    Ringdown {
        #[arg(long)]
        input: PathBuf,
    },
    /// Phonon budget and feedback-cooling limits.
    Cool,
}

/// Failure classes, each with its own exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Category {
    Config,
    Io,
    Parse,
    Fit,
    Numeric,
}

impl Category {
    fn name(self) -> &'static str {
        match self {
            Category::Config => "config",
            Category::Io => "io",
            Category::Parse => "parse",
            Category::Fit => "fit",
            Category::Numeric => "numeric",
        }
    }

    fn code(self) -> u8 {
        match self {
            Category::Config => 2,
            Category::Io => 3,
            Category::Parse => 4,
            Category::Fit => 5,
            Category::Numeric => 6,
        }
    }
}

fn categorize(err: &anyhow::Error) -> Category {
    use spade_core::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return Category::Config;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return Category::Io;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::InvalidParameter { .. } => Category::Config,
                E::Io(_) => Category::Io,
                E::Parse { .. } | E::GridMismatch => Category::Parse,
                E::NonConvergence { .. } | E::NegativeImprecision { .. } | E::InsufficientData(_) => Category::Fit,
                E::NoSignal | E::DegenerateShape => Category::Numeric,
            };
        }
    }
    Category::Numeric
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let category = categorize(&err);
            eprintln!("error[{}]: {err:#}", category.name());
            if let Some(spade_core::Error::NonConvergence { best: Some(report), .. }) = err.chain().find_map(|c| c.downcast_ref::<spade_core::Error>()) {
                eprintln!("best parameters ({} evaluations):", report.iterations);
                for p in &report.params {
                    eprintln!("  {} = {:e}", p.name, p.value);
                }
            }
            ExitCode::from(category.code())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| anyhow::Error::new(e).context(format!("creating {}", cli.out.display())))?;
    let ctx = commands::Context { cfg, out: cli.out, plot: cli.plot };
    match cli.command {
        Command::Limits => commands::limits(&ctx),
        Command::Misalign => commands::misalign(&ctx),
        Command::Overlap => commands::overlap(&ctx),
        Command::Scan => commands::scan(&ctx),
        Command::Synth => commands::synth(&ctx),
        Command::Calibrate { spectrum, detector, shot, coupling } => commands::calibrate(&ctx, &spectrum, &detector, shot.as_deref(), coupling.as_deref()),
        Command::Knife { input } => commands::knife(&ctx, &input),
        Command::Ringdown { input } => commands::ringdown(&ctx, &input),
        Command::Cool => commands::cool(&ctx),
    }
}
