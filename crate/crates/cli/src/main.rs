use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ebsc_core::metrics::EvalDimension;
use ebsc_core::mining::{Gap, MinSupport};
use ebsc_core::model::{SpatialLevel, TemporalScale};

mod commands;
mod config;

/// Normalizes epidemiological event data and compares surveillance systems
/// against a reference database.
#[derive(Debug, Parser)]
#[command(name = "ebsc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

/// Flags shared by every command; each overrides its config key.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Candidate event file (CSV or JSON lines).
    #[arg(long, global = true)]
    pub candidate: Option<PathBuf>,
    /// Reference event file (CSV or JSON lines).
    #[arg(long, global = true)]
    pub reference: Option<PathBuf>,
    /// Dimensions to evaluate, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub dims: Vec<EvalDimension>,
    /// Maximum periodicity gap; an integer or `inf`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub iota: Vec<Gap>,
    /// Minimum period support; a count or a fraction in (0, 1].
    #[arg(long, global = true, value_delimiter = ',')]
    pub rho: Vec<MinSupport>,
    /// Closeness radius between zone centroids, in km.
    #[arg(long = "alpha-km", global = true)]
    pub alpha_km: Option<f64>,
    /// Spatial level: a depth or an admin level name.
    #[arg(long, global = true, value_delimiter = ',')]
    pub lz: Vec<SpatialLevel>,
    /// Temporal scale: year, month, biweek, week or day.
    #[arg(long, global = true, value_delimiter = ',')]
    pub lt: Vec<TemporalScale>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Matching threshold.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Delay decay constant, in days.
    #[arg(long = "decay-days", global = true)]
    pub decay_days: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MineMode {
    Spatial,
    Multidimensional,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Turn a document corpus into normalized event files.
    Normalize,
    /// Associate the events of two databases.
    Match,
    /// Mine periodic spatial or multidimensional patterns.
    Mine {
        #[arg(long, value_enum, default_value = "spatial")]
        mode: MineMode,
    },
    /// Score a candidate database against a reference.
    Eval,
    /// Print the scores of a written evaluation report.
    Report,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Normalize => commands::normalize(&cli.flags),
        Command::Match => commands::match_cmd(&cli.flags),
        Command::Mine { mode } => commands::mine(&cli.flags, mode),
        Command::Eval => commands::eval(&cli.flags),
        Command::Report => commands::report(&cli.flags),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_user_error() { 2 } else { 1 })
        }
    }
}
