//! Subcommand implementations. Each returns an [`Outcome`] when it could
//! write its outputs, even if some records failed along the way.

mod dataset;
mod extract;
mod report;

pub use dataset::{augment, decode, encode, filter};
pub use extract::extract;
pub use report::{metrics, stats, validate};

use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::Outcome;

/// One input or record that could not be processed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Failure {
    pub song_id: String,
    pub file: String,
    /// Stable machine-readable code such as `midi_parse`.
    pub reason: String,
    pub message: String,
}

impl Failure {
    pub fn new(song_id: &str, file: &Path, reason: &str, message: impl ToString) -> Self {
        Failure {
            song_id: song_id.to_string(),
            file: file_name(file),
            reason: reason.to_string(),
            message: message.to_string(),
        }
    }
}

pub fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Success when nothing failed, partial failure when some of `attempted`
/// units failed, fatal when all of them did.
pub fn outcome(attempted: usize, failed: usize) -> Result<Outcome, CliError> {
    if failed == 0 {
        Ok(Outcome::Success)
    } else if failed >= attempted {
        Err(CliError::AllFailed(attempted))
    } else {
        Ok(Outcome::PartialFailure)
    }
}

pub fn report_failures(failures: &[Failure]) {
    for f in failures {
        eprintln!(
            "warning: {} ({}): {}: {}",
            f.file, f.song_id, f.reason, f.message
        );
    }
}
