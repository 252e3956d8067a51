//! Distances to a reference corpus, expressed in units of the spread seen
//! between random halves of that corpus.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codec::PianoRoll;
use crate::scalar::Scalar;

use super::distance::{total_variation, wasserstein_1d};
use super::histogram::{Categorical, Histogram};
use super::{piece, repetition, MetricError};

pub const DEFAULT_SPLITS: usize = 50;
pub const MIN_REFERENCE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    DissonantRatio,
    SilentRatio,
    VarietyRatio,
    VarietyScore,
    LengthVarietyRatio,
    AvgNoteLength,
    RepetitionScore,
    /// Distribution of per-step pitch combinations, compared by total
    /// variation instead of a per-piece scalar.
    VarietyDistribution,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::DissonantRatio,
        Metric::SilentRatio,
        Metric::VarietyRatio,
        Metric::VarietyScore,
        Metric::LengthVarietyRatio,
        Metric::AvgNoteLength,
        Metric::RepetitionScore,
        Metric::VarietyDistribution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::DissonantRatio => "dissonant_ratio",
            Metric::SilentRatio => "silent_ratio",
            Metric::VarietyRatio => "variety_ratio",
            Metric::VarietyScore => "variety_score",
            Metric::LengthVarietyRatio => "length_variety_ratio",
            Metric::AvgNoteLength => "avg_note_length",
            Metric::RepetitionScore => "repetition_score",
            Metric::VarietyDistribution => "variety_distribution",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| MetricError::UnknownMetric(s.to_string()))
    }
}

/// What a single piece contributes to a corpus distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum PieceFeature<T> {
    /// A scalar metric value; `None` when the metric is undefined for the
    /// piece (no chord for dissonance, no note for note length).
    Value(Option<T>),
    /// Counts of each per-step sounding-pitch combination.
    Combinations(BTreeMap<Vec<u8>, usize>),
}

pub fn piece_feature<T: Scalar>(metric: Metric, roll: &PianoRoll) -> PieceFeature<T> {
    let value = match metric {
        Metric::DissonantRatio => piece::piece_dissonant_ratio(roll),
        Metric::SilentRatio => Some(piece::silent_ratio(roll)),
        Metric::VarietyRatio => Some(piece::variety_ratio(roll)),
        Metric::VarietyScore => Some(piece::variety_score(roll)),
        Metric::LengthVarietyRatio => Some(piece::length_variety_ratio(roll)),
        Metric::AvgNoteLength => piece::avg_note_length(roll),
        Metric::RepetitionScore => repetition::repetition_score(roll)
            .ok()
            .map(|b| b.repetition_score),
        Metric::VarietyDistribution => {
            return PieceFeature::Combinations(super::combination_counts(roll));
        }
    };
    PieceFeature::Value(value)
}

pub fn corpus_features<T: Scalar>(metric: Metric, rolls: &[PianoRoll]) -> Vec<PieceFeature<T>> {
    rolls.iter().map(|r| piece_feature(metric, r)).collect()
}

/// Distance between the distributions formed by two groups of pieces.
pub fn group_distance<T: Scalar>(
    a: &[&PieceFeature<T>],
    b: &[&PieceFeature<T>],
) -> Result<T, MetricError> {
    let is_combination =
        |g: &[&PieceFeature<T>]| g.iter().any(|f| matches!(f, PieceFeature::Combinations(_)));
    if is_combination(a) || is_combination(b) {
        let da = merged_combinations(a)?;
        let db = merged_combinations(b)?;
        return total_variation(&da, &db);
    }
    let ha = empirical_values(a)?;
    let hb = empirical_values(b)?;
    wasserstein_1d(&ha, &hb)
}

fn empirical_values<T: Scalar>(group: &[&PieceFeature<T>]) -> Result<Histogram<T>, MetricError> {
    let values: Vec<T> = group
        .iter()
        .filter_map(|f| match f {
            PieceFeature::Value(v) => *v,
            PieceFeature::Combinations(_) => None,
        })
        .collect();
    if values.is_empty() {
        return Err(MetricError::NoValues);
    }
    Ok(Histogram::empirical(&values))
}

fn merged_combinations<T: Scalar>(
    group: &[&PieceFeature<T>],
) -> Result<Categorical<Vec<u8>, T>, MetricError> {
    let mut counts: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    for f in group {
        match f {
            PieceFeature::Combinations(c) => {
                for (k, n) in c {
                    *counts.entry(k.clone()).or_default() += n;
                }
            }
            PieceFeature::Value(_) => return Err(MetricError::MixedFeatures),
        }
    }
    if counts.values().all(|&n| n == 0) {
        return Err(MetricError::NoValues);
    }
    Ok(Categorical::from_counts(&counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizeConfig {
    pub n_splits: usize,
    pub seed: u64,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        NormalizeConfig {
            n_splits: DEFAULT_SPLITS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Ok,
    /// Every split produced the same distance, so no normalized value.
    ZeroBaselineStd,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport<T> {
    pub metric: Metric,
    pub raw_distance: T,
    pub baseline_mean: T,
    pub baseline_std: T,
    pub normalized: Option<T>,
    pub n_splits: usize,
    pub seed: u64,
    pub status: ReportStatus,
}

/// Sample mean and standard deviation (`n - 1` denominator).
pub fn mean_std<T: Scalar + Float>(values: &[T]) -> (T, T) {
    let n = values.len();
    if n == 0 {
        return (T::nan(), T::nan());
    }
    let mean = values.iter().fold(T::zero(), |acc, &v| acc + v) / <T as Scalar>::from_count(n);
    if n == 1 {
        return (mean, T::zero());
    }
    let ss = values
        .iter()
        .fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean));
    (mean, Float::sqrt(ss / <T as Scalar>::from_count(n - 1)))
}

/// Scores `generated` against `reference`.
///
/// The baseline draws `n_splits` seeded shuffles of the reference and
/// measures the distance between the first and second half of each. The
/// raw distance compares the generated pieces with the whole reference.
pub fn normalized_score<T: Scalar + Float>(
    metric: Metric,
    generated: &[PieceFeature<T>],
    reference: &[PieceFeature<T>],
    config: NormalizeConfig,
) -> Result<MetricReport<T>, MetricError> {
    if generated.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    if reference.len() < MIN_REFERENCE {
        return Err(MetricError::NotEnoughReference(reference.len()));
    }
    if config.n_splits < 2 {
        return Err(MetricError::TooFewSplits(config.n_splits));
    }

    let all_ref: Vec<&PieceFeature<T>> = reference.iter().collect();
    let all_gen: Vec<&PieceFeature<T>> = generated.iter().collect();
    let raw_distance = group_distance(&all_gen, &all_ref)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..reference.len()).collect();
    let half = reference.len() / 2;
    let mut baseline = Vec::with_capacity(config.n_splits);
    for _ in 0..config.n_splits {
        order.shuffle(&mut rng);
        let left: Vec<_> = order[..half].iter().map(|&i| &reference[i]).collect();
        let right: Vec<_> = order[half..].iter().map(|&i| &reference[i]).collect();
        baseline.push(group_distance(&left, &right)?);
    }
    let (baseline_mean, baseline_std) = mean_std(&baseline);

    // NaN counts as degenerate too
    let degenerate = baseline_std.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater);
    Ok(MetricReport {
        metric,
        raw_distance,
        baseline_mean,
        baseline_std,
        normalized: (!degenerate).then(|| (raw_distance - baseline_mean) / baseline_std),
        n_splits: config.n_splits,
        seed: config.seed,
        status: if degenerate {
            ReportStatus::ZeroBaselineStd
        } else {
            ReportStatus::Ok
        },
    })
}

/// Convenience wrapper computing the features of both roll sets first.
pub fn score_rolls<T: Scalar + Float>(
    metric: Metric,
    generated: &[PianoRoll],
    reference: &[PianoRoll],
    config: NormalizeConfig,
) -> Result<MetricReport<T>, MetricError> {
    normalized_score(
        metric,
        &corpus_features(metric, generated),
        &corpus_features(metric, reference),
        config,
    )
}
