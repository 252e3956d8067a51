//! Flat `key = value` configuration and its merge with flags and the
//! environment.

use std::path::{Path, PathBuf};

use medley_core::filter::VividMode;
use medley_core::metrics::DEFAULT_SPLITS;

use crate::error::CliError;

pub const SEED_ENV: &str = "MEDLEY_SEED";

/// Values read from a config file; every key is optional.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub blacklist: Option<PathBuf>,
    pub tempo_tolerance_bpm: Option<f64>,
    pub vivid_mode: Option<VividMode>,
    pub n_splits: Option<usize>,
    pub seed: Option<u64>,
    pub epsilon_seconds: Option<f64>,
    pub window_bars: Option<u32>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|(line, message)| CliError::Config {
            path: path.to_path_buf(),
            line,
            message,
        })
    }

    /// `#` starts a comment; blank lines are skipped. Relative blacklist
    /// paths are kept as written.
    pub fn parse(text: &str) -> Result<Self, (usize, String)> {
        let mut cfg = FileConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| (line_no, format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: &dyn std::fmt::Display| (line_no, format!("{key}: {e}"));
            match key {
                "blacklist" => cfg.blacklist = Some(PathBuf::from(value)),
                "tempo_tolerance_bpm" => {
                    cfg.tempo_tolerance_bpm = Some(value.parse().map_err(|e| bad(&e))?)
                }
                "vivid_mode" => cfg.vivid_mode = Some(value.parse().map_err(|e: String| bad(&e))?),
                "n_splits" => cfg.n_splits = Some(value.parse().map_err(|e| bad(&e))?),
                "seed" => cfg.seed = Some(value.parse().map_err(|e| bad(&e))?),
                "epsilon_seconds" => {
                    cfg.epsilon_seconds = Some(value.parse().map_err(|e| bad(&e))?)
                }
                "window_bars" => cfg.window_bars = Some(value.parse().map_err(|e| bad(&e))?),
                other => return Err((line_no, format!("unknown key {other:?}"))),
            }
        }
        Ok(cfg)
    }
}

/// Effective settings after applying flags > environment > file > default.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub blacklist: Option<PathBuf>,
    pub tempo_tolerance_bpm: f64,
    pub vivid_mode: VividMode,
    pub n_splits: usize,
    pub seed: u64,
    pub epsilon_seconds: f64,
    pub window_bars: u32,
}

/// Command-line overrides; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub blacklist: Option<PathBuf>,
    pub tempo_tolerance_bpm: Option<f64>,
    pub vivid_mode: Option<VividMode>,
    pub n_splits: Option<usize>,
    pub seed: Option<u64>,
    pub epsilon_seconds: Option<f64>,
    pub window_bars: Option<u32>,
}

impl Settings {
    pub fn resolve(
        file: &FileConfig,
        flags: &Overrides,
        env_seed: Option<&str>,
    ) -> Result<Self, CliError> {
        let env_seed = env_seed
            .map(|s| {
                s.trim().parse::<u64>().map_err(|e| {
                    CliError::Usage(format!("{SEED_ENV}={s:?} is not an unsigned integer: {e}"))
                })
            })
            .transpose()?;
        Ok(Settings {
            blacklist: flags.blacklist.clone().or_else(|| file.blacklist.clone()),
            tempo_tolerance_bpm: flags
                .tempo_tolerance_bpm
                .or(file.tempo_tolerance_bpm)
                .unwrap_or(0.5),
            vivid_mode: flags
                .vivid_mode
                .or(file.vivid_mode)
                .unwrap_or(VividMode::All4),
            n_splits: flags.n_splits.or(file.n_splits).unwrap_or(DEFAULT_SPLITS),
            seed: flags.seed.or(env_seed).or(file.seed).unwrap_or(0),
            epsilon_seconds: flags
                .epsilon_seconds
                .or(file.epsilon_seconds)
                .unwrap_or(0.0),
            window_bars: flags.window_bars.or(file.window_bars).unwrap_or(0),
        })
    }
}
