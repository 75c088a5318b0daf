use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sca_core::experiments::{GainGrid, Mode, Preset};
use sca_core::EnsembleKind;

use crate::exit::Usage;

#[derive(Debug, Parser)]
#[command(
    name = "sca",
    version,
    about = "Closed-form and Monte Carlo evaluation of the coherent-state comparison amplifier"
)]
pub struct Cli {
    /// Worker threads for simulations and sweeps (default: one per core).
    /// Results do not depend on this value.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form figures of merit at each (alpha², G) point
    Eval(EvalArgs),
    /// Monte Carlo estimates at each (alpha², G) point
    Simulate(SimulateArgs),
    /// Parameter sweep written as CSV (or a bundled preset)
    Sweep(SweepArgs),
    /// Cross-check the closed forms against the independent numerical oracles
    Oracle(OracleArgs),
    /// Closed forms against Monte Carlo with z-scores; exits 4 if any |z| > 4
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Analytic,
    Mc,
    Both,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Analytic => Mode::Analytic,
            ModeArg::Mc => Mode::MonteCarlo,
            ModeArg::Both => Mode::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Fig3,
    Fig4,
    Nf,
    #[value(name = "figS2")]
    FigS2,
    #[value(name = "figS3")]
    FigS3,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Preset {
        match p {
            PresetArg::Fig3 => Preset::Fig3,
            PresetArg::Fig4 => Preset::Fig4,
            PresetArg::Nf => Preset::NoiseFigure,
            PresetArg::FigS2 => Preset::FigS2,
            PresetArg::FigS3 => Preset::FigS3,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DeviceArgs {
    /// Input ensemble: `binary` (±alpha) or `phase` (uniform phase)
    #[arg(long)]
    pub ensemble: Option<EnsembleKind>,

    /// Mean input photon number |alpha|² (intensity, not amplitude).
    /// Comma-separated list allowed.
    #[arg(long = "alpha-sq", value_delimiter = ',', num_args = 1..)]
    pub alpha_sq: Vec<f64>,

    /// Intensity gain G = g² (power ratio; the amplitude gain is sqrt(G)).
    /// Comma-separated list allowed.
    #[arg(
        long = "intensity-gain",
        value_delimiter = ',',
        num_args = 1..,
        conflicts_with_all = ["gain_min", "gain_max", "gain_steps"]
    )]
    pub intensity_gain: Vec<f64>,

    /// Smallest intensity gain G of a log-spaced grid
    #[arg(long, requires_all = ["gain_max", "gain_steps"])]
    pub gain_min: Option<f64>,

    /// Largest intensity gain G of a log-spaced grid
    #[arg(long, requires_all = ["gain_min", "gain_steps"])]
    pub gain_max: Option<f64>,

    /// Number of intensity-gain points of a log-spaced grid
    #[arg(long, requires_all = ["gain_min", "gain_max"])]
    pub gain_steps: Option<usize>,

    /// Intensity transmissivity t2² of the subtraction beam splitter
    /// (default 0.9 for binary, 0.95 for phase)
    #[arg(long = "t2-sq", conflicts_with = "r2_sq")]
    pub t2_sq: Option<f64>,

    /// Intensity reflectivity r2² = 1 - t2² of the subtraction beam splitter
    #[arg(long = "r2-sq")]
    pub r2_sq: Option<f64>,

    /// Quantum efficiency of the comparison detector, in [0, 1]
    #[arg(long, default_value_t = 1.0)]
    pub eta1: f64,

    /// Quantum efficiency of the subtraction detector, in [0, 1]
    #[arg(long, default_value_t = 1.0)]
    pub eta2: f64,

    /// Dark-count probability per trial of the comparison detector, in [0, 1)
    #[arg(long, default_value_t = 0.0)]
    pub dark1: f64,

    /// Dark-count probability per trial of the subtraction detector, in [0, 1)
    #[arg(long, default_value_t = 0.0)]
    pub dark2: f64,
}

impl DeviceArgs {
    pub fn ensemble(&self) -> Result<EnsembleKind, Usage> {
        self.ensemble
            .ok_or_else(|| Usage("--ensemble is required (binary or phase)".into()))
    }

    pub fn t2_sq(&self, ensemble: EnsembleKind) -> f64 {
        match (self.t2_sq, self.r2_sq) {
            (Some(t), _) => t,
            (None, Some(r)) => 1.0 - r,
            (None, None) => match ensemble {
                EnsembleKind::Binary => 0.9,
                EnsembleKind::PhaseCovariant => 0.95,
            },
        }
    }

    /// Explicit gain list or log-spaced grid; `None` if neither was given.
    pub fn gain_grid(&self) -> Option<GainGrid> {
        if !self.intensity_gain.is_empty() {
            return Some(GainGrid::Explicit(self.intensity_gain.clone()));
        }
        match (self.gain_min, self.gain_max, self.gain_steps) {
            (Some(min), Some(max), Some(steps)) => Some(GainGrid::LogSpaced { min, max, steps }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Write to this file instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SamplingArgs {
    /// Monte Carlo trials per point (at least 1)
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,

    /// Base seed; each point derives its own stream from it
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Bundled figure configuration; replaces the device flags
    #[arg(long, value_enum, conflicts_with_all = [
        "ensemble", "alpha_sq", "intensity_gain", "gain_min", "gain_max", "gain_steps",
        "t2_sq", "r2_sq", "eta1", "eta2", "dark1", "dark2",
    ])]
    pub preset: Option<PresetArg>,

    /// Which estimates to produce at each point
    #[arg(long, value_enum, default_value = "analytic")]
    pub mode: ModeArg,

    #[command(flatten)]
    pub device: DeviceArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,

    /// Comparison-detector efficiency used by the simulation only
    #[arg(long, hide = true)]
    pub inject_mc_eta1: Option<f64>,
}
