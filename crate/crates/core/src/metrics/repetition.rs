use std::collections::HashMap;

use serde::Serialize;

use crate::codec::PianoRoll;
use crate::model::STEPS_PER_QUARTER;
use crate::scalar::Scalar;

use super::MetricError;

/// How much of a roll repeats exactly, at bar and quarter granularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepetitionBreakdown<T> {
    /// Multiplicity of the most frequent bar pattern.
    pub pbar_max: usize,
    /// Multiplicity of the most frequent quarter pattern.
    pub pquarter_max: usize,
    pub bar_score_scaled: T,
    pub quarter_score_scaled: T,
    pub repetition_score: T,
    /// The roll has a single bar, so the bar component was set to 1.
    pub degenerate_single_bar: bool,
}

fn max_multiplicity<'a>(patterns: impl Iterator<Item = &'a [u16]>) -> usize {
    let mut counts: HashMap<&[u16], usize> = HashMap::new();
    for p in patterns {
        *counts.entry(p).or_default() += 1;
    }
    counts.into_values().max().unwrap_or(0)
}

/// `(max/n - 1/n) / (1 - 1/n)`, i.e. the score rescaled from its minimum.
fn scaled<T: Scalar>(max: usize, n: usize) -> T {
    T::ratio(max - 1, n - 1)
}

/// Bar and quarter repetition over the raw symbols of a roll.
///
/// A bar pattern is every cell of one bar; a quarter pattern is four
/// consecutive steps of all voices. Each score `max / n` is rescaled from
/// its minimum `1 / n` to `[0, 1]` and the two are averaged.
pub fn repetition_score<T: Scalar>(
    roll: &PianoRoll,
) -> Result<RepetitionBreakdown<T>, MetricError> {
    let shape = roll.shape();
    let bars = shape.bars;
    if bars == 0 {
        return Err(MetricError::EmptyRoll);
    }
    let grid = roll.grid();
    let pbar_max = max_multiplicity((0..bars).map(|b| grid.bar_cells(b)));
    let quarter_len = STEPS_PER_QUARTER * shape.voices;
    let quarters = grid.cells().chunks_exact(quarter_len);
    let n_quarters = quarters.len();
    let pquarter_max = max_multiplicity(quarters);

    let degenerate_single_bar = bars == 1;
    let bar_score_scaled = if degenerate_single_bar {
        T::one()
    } else {
        scaled(pbar_max, bars)
    };
    let quarter_score_scaled = scaled(pquarter_max, n_quarters);
    Ok(RepetitionBreakdown {
        pbar_max,
        pquarter_max,
        bar_score_scaled,
        quarter_score_scaled,
        repetition_score: (bar_score_scaled + quarter_score_scaled) / T::from_count(2),
        degenerate_single_bar,
    })
}
