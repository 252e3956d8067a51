//! `medley`: batch driver for building and scoring medley transition
//! datasets.

mod commands;
mod config;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use medley_core::codec::Scheme;
use medley_core::filter::VividMode;

use config::{FileConfig, Overrides, Settings, SEED_ENV};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "medley", version, about = "Medley transition dataset pipeline")]
struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for file-level parallelism (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(flatten)]
    settings: SettingFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SettingFlags {
    /// Blacklist file, one term per line.
    #[arg(long, global = true)]
    blacklist: Option<PathBuf>,
    #[arg(long, global = true)]
    tempo_tolerance_bpm: Option<f64>,
    #[arg(long, global = true, value_parser = parse_vivid)]
    vivid_mode: Option<VividMode>,
    #[arg(long, global = true)]
    n_splits: Option<usize>,
    /// RNG seed; overrides MEDLEY_SEED and the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    epsilon_seconds: Option<f64>,
    /// Bar tolerance when matching predicted and true transitions.
    #[arg(long, global = true)]
    window_bars: Option<u32>,
}

fn parse_vivid(s: &str) -> Result<VividMode, String> {
    s.parse()
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Label transitions from paired score/MIDI files.
    Extract {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-file failure records (JSON lines).
        #[arg(long)]
        failures: Option<PathBuf>,
        /// Every annotated bar, the candidate set for validation.
        #[arg(long)]
        candidates: Option<PathBuf>,
    },
    /// Drop transitions that are not vivid or change meter or tempo.
    Filter {
        #[arg(long)]
        transitions: PathBuf,
        #[arg(long)]
        midi_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Skipped transitions with their reason.
        #[arg(long)]
        audit: Option<PathBuf>,
    },
    /// Slice and encode transitions as piano rolls.
    Encode {
        #[arg(long)]
        transitions: PathBuf,
        #[arg(long)]
        midi_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 3)]
        voices: usize,
        #[arg(long, default_value = "doubled", value_parser = parse_scheme)]
        scheme: Scheme,
        /// Also write a CSV copy of every roll.
        #[arg(long)]
        csv: bool,
    },
    /// Decode rolls back into grid notes.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Transpose rolls and/or slide windows over songs.
    Augment {
        /// Directory of rolls to transpose by -11..=11 semitones.
        #[arg(long)]
        rolls: Option<PathBuf>,
        /// Directory of MIDI songs to cut into sliding windows.
        #[arg(long)]
        midi_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        width: usize,
        #[arg(long, default_value_t = 3)]
        voices: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Score generated rolls against reference rolls.
    Metrics {
        #[arg(long)]
        generated: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Metric name; repeat for several (default: all).
        #[arg(long = "metric")]
        metrics: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corpus statistics as JSON and CSV.
    Stats {
        #[arg(long)]
        midi_dir: PathBuf,
        /// Directory of encoded transition samples.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Precision and recall of predicted transitions.
    Validate {
        #[arg(long, requires = "truth", conflicts_with = "counts")]
        predicted: Option<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        candidates: Option<PathBuf>,
        /// JSON object with tp, fp, fn and tn.
        #[arg(long)]
        counts: Option<PathBuf>,
    },
}

/// What a command reports besides fatal errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    PartialFailure,
}

pub struct Context {
    pub settings: Settings,
    pub pool: rayon::ThreadPool,
}

fn context(cli: &Cli) -> Result<Context, CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let f = &cli.settings;
    let flags = Overrides {
        blacklist: f.blacklist.clone(),
        tempo_tolerance_bpm: f.tempo_tolerance_bpm,
        vivid_mode: f.vivid_mode,
        n_splits: f.n_splits,
        seed: f.seed,
        epsilon_seconds: f.epsilon_seconds,
        window_bars: f.window_bars,
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let settings = Settings::resolve(&file, &flags, env_seed.as_deref())?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    Ok(Context { settings, pool })
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let ctx = context(&cli)?;
    match cli.command {
        Command::Extract {
            input,
            out,
            failures,
            candidates,
        } => commands::extract(
            &ctx,
            &input,
            &out,
            failures.as_deref(),
            candidates.as_deref(),
        ),
        Command::Filter {
            transitions,
            midi_dir,
            out,
            audit,
        } => commands::filter(&ctx, &transitions, &midi_dir, &out, audit.as_deref()),
        Command::Encode {
            transitions,
            midi_dir,
            out_dir,
            voices,
            scheme,
            csv,
        } => commands::encode(&ctx, &transitions, &midi_dir, &out_dir, voices, scheme, csv),
        Command::Decode { input, out } => commands::decode(&input, &out),
        Command::Augment {
            rolls,
            midi_dir,
            width,
            voices,
            out_dir,
        } => commands::augment(
            &ctx,
            rolls.as_deref(),
            midi_dir.as_deref(),
            width,
            voices,
            &out_dir,
        ),
        Command::Metrics {
            generated,
            reference,
            metrics,
            out,
        } => commands::metrics(&ctx, &generated, &reference, &metrics, out.as_deref()),
        Command::Stats {
            midi_dir,
            samples,
            out_dir,
        } => commands::stats(&ctx, &midi_dir, samples.as_deref(), &out_dir),
        Command::Validate {
            predicted,
            truth,
            candidates,
            counts,
        } => commands::validate(
            &ctx,
            predicted.as_deref(),
            truth.as_deref(),
            candidates.as_deref(),
            counts.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::PartialFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
