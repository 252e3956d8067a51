use thiserror::Error;

use crate::io::{expand_repeats, time_of_bar, BarOutOfRange, RepeatWarning};
use crate::model::{ScoreDocument, Song, TransitionPoint};

use super::blacklist::{classify_annotation, Blacklist};

/// Every measure-attached text in notation order.
pub fn extract_annotations(doc: &ScoreDocument) -> Vec<(u32, String)> {
    doc.measures
        .iter()
        .flat_map(|m| m.annotations.iter().map(|a| (m.index_real, a.text.clone())))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractConfig {
    /// Half-width in seconds of the instant window used for `notes_during`.
    pub epsilon_seconds: f64,
    /// Allowed difference between expanded notation bars and MIDI bars.
    pub bar_tolerance: usize,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            epsilon_seconds: 0.0,
            bar_tolerance: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("{song_id}: notation expands to {notation_bars} bars but MIDI has {midi_bars}")]
    AlignmentMismatch {
        song_id: String,
        notation_bars: usize,
        midi_bars: usize,
    },
    #[error(transparent)]
    BarOutOfRange(#[from] BarOutOfRange),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub transitions: Vec<TransitionPoint>,
    pub warnings: Vec<RepeatWarning>,
}

/// Labels transitions from the score annotations of one medley.
///
/// Each notation bar carrying at least one accepted annotation yields one
/// transition anchored at the start of that bar's first playback
/// occurrence; when several annotations on the same bar are accepted the
/// first one provides the label. Output is sorted by `bar_real`.
pub fn extract_transitions(
    doc: &ScoreDocument,
    song: &Song,
    blacklist: &Blacklist,
    config: &ExtractConfig,
) -> Result<Extraction, ExtractError> {
    let expansion = expand_repeats(doc);
    let notation_bars = expansion.map.playback_len();
    let midi_bars = song.bar_count();
    if notation_bars.abs_diff(midi_bars) > config.bar_tolerance {
        return Err(ExtractError::AlignmentMismatch {
            song_id: song.id().to_string(),
            notation_bars,
            midi_bars,
        });
    }

    let mut transitions: Vec<TransitionPoint> = Vec::new();
    for (bar_real, text) in extract_annotations(doc) {
        if !classify_annotation(&text, blacklist) {
            continue;
        }
        if transitions.last().is_some_and(|t| t.bar_real == bar_real) {
            continue;
        }
        let Some(bar_offset) = expansion.map.first_offset(bar_real) else {
            continue;
        };
        let stats = tp_context_stats(song, bar_offset, config.epsilon_seconds)?;
        transitions.push(TransitionPoint {
            song_id: song.id().to_string(),
            text: text.trim().to_string(),
            bar_real,
            bar_offset,
            time_seconds: time_of_bar(song, bar_offset)?,
            notes_during: stats.notes_during,
            avg_note_length_seconds: stats.avg_note_length_seconds,
            notes_before_bar: stats.notes_before_bar,
            notes_after_bar: stats.notes_after_bar,
            half_bar_starts: stats.half_bar_starts,
        });
    }
    transitions.sort_by_key(|t| t.bar_real);
    Ok(Extraction {
        transitions,
        warnings: expansion.warnings,
    })
}

/// Note statistics around a transition at the start of a playback bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextStats {
    /// Notes sounding at the transition instant, widened by epsilon.
    pub notes_during: u32,
    /// Mean duration in seconds of the `notes_during` notes (0 if none).
    pub avg_note_length_seconds: f64,
    /// Onsets in the bar before the transition.
    pub notes_before_bar: u32,
    /// Onsets in the bar starting at the transition.
    pub notes_after_bar: u32,
    /// Onsets in the two half bars before and the two after, in time order.
    pub half_bar_starts: [u32; 4],
}

/// Computes [`ContextStats`] for the transition at the start of
/// `bar_offset`. A missing neighbouring bar contributes zero counts.
pub fn tp_context_stats(
    song: &Song,
    bar_offset: u32,
    epsilon_seconds: f64,
) -> Result<ContextStats, BarOutOfRange> {
    let grid = song.bar_grid();
    let bar = bar_offset as usize;
    let out_of_range = BarOutOfRange {
        bar: i64::from(bar_offset),
        max: grid.bar_count() + 1,
    };
    let tp_tick = grid.start(bar).ok_or(out_of_range)?;
    let before = bar.checked_sub(1).and_then(|b| grid.span(b));
    let after = grid.span(bar);

    let halves = |span: Option<(u64, u64)>| match span {
        Some((s, e)) => {
            let mid = s + (e - s) / 2;
            [Some((s, mid)), Some((mid, e))]
        }
        None => [None, None],
    };
    let [b1, b2] = halves(before);
    let [a1, a2] = halves(after);
    let count_onsets = |span: Option<(u64, u64)>| -> u32 {
        span.map_or(0, |(s, e)| {
            song.notes()
                .iter()
                .filter(|n| n.onset >= s && n.onset < e)
                .count() as u32
        })
    };

    let tp_time = song.seconds_at_tick(tp_tick);
    let (lo, hi) = (tp_time - epsilon_seconds, tp_time + epsilon_seconds);
    let mut during = 0u32;
    let mut total_len = 0.0;
    for n in song.notes() {
        let start = song.seconds_at_tick(n.onset);
        let end = song.seconds_at_tick(n.end());
        if start <= hi && end > lo {
            during += 1;
            total_len += end - start;
        }
    }

    Ok(ContextStats {
        notes_during: during,
        avg_note_length_seconds: if during > 0 {
            total_len / f64::from(during)
        } else {
            0.0
        },
        notes_before_bar: count_onsets(before),
        notes_after_bar: count_onsets(after),
        half_bar_starts: [b1, b2, a1, a2].map(count_onsets),
    })
}
