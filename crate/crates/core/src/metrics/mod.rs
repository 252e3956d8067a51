//! Evaluation metrics for piano rolls and the distances used to compare a
//! generated corpus with a reference corpus.

mod distance;
mod histogram;
mod interval;
mod normalize;
mod piece;
mod repetition;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::codec::PianoRoll;
use crate::scalar::Scalar;

pub use distance::{total_variation, wasserstein_1d};
pub use histogram::{Categorical, Discrete, Histogram};
pub use interval::{adjacent_intervals, interval_match_regularizer, INTERVAL_EPSILON};
pub use normalize::{
    corpus_features, group_distance, mean_std, normalized_score, piece_feature, score_rolls,
    Metric, MetricReport, NormalizeConfig, PieceFeature, ReportStatus, DEFAULT_SPLITS,
    MIN_REFERENCE,
};
pub use piece::{
    avg_note_length, dissonant_ratio, is_dissonant, length_variety_ratio, piece_dissonant_ratio,
    piece_dissonant_values, silent_ratio, variety_ratio, variety_score,
};
pub use repetition::{repetition_score, RepetitionBreakdown};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("need at least two voices, got {0}")]
    FewerThanTwoVoices(usize),
    #[error("histogram masses do not sum to one")]
    UnnormalizedInput,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("rolls differ in shape")]
    ShapeMismatch,
    #[error("reference corpus needs at least {MIN_REFERENCE} pieces, got {0}")]
    NotEnoughReference(usize),
    #[error("need at least two splits, got {0}")]
    TooFewSplits(usize),
    #[error("metric is undefined for every piece of a group")]
    NoValues,
    #[error("scalar and combination features cannot be compared")]
    MixedFeatures,
    #[error("roll has no bars")]
    EmptyRoll,
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
}

/// Occurrences of each per-step sounding-pitch set of one roll. Silent
/// steps count as the empty combination.
pub fn combination_counts(roll: &PianoRoll) -> BTreeMap<Vec<u8>, usize> {
    let mut counts = BTreeMap::new();
    for set in roll.step_pitch_sets() {
        *counts.entry(set.into_iter().collect()).or_default() += 1;
    }
    counts
}

/// Frequency of every pitch combination across all steps of all rolls.
pub fn note_combination_distribution<T: Scalar>(
    rolls: &[PianoRoll],
) -> Result<Categorical<Vec<u8>, T>, MetricError> {
    if rolls.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let mut counts: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    for roll in rolls {
        for (k, n) in combination_counts(roll) {
            *counts.entry(k).or_default() += n;
        }
    }
    Ok(Categorical::from_counts(&counts))
}
