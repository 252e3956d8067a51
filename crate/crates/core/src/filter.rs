//! Transition postprocessing: note-density and meter/tempo gating, and
//! slicing bar windows onto the sixteenth-note grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{encode, NoteSlice, Scheme, SliceNote, VoiceOverflow};
use crate::io::BarOutOfRange;
use crate::model::{Song, TransitionPoint, TransitionSample, STEPS_PER_BAR};
use crate::transitions::tp_context_stats;

/// Width of a transition sample in bars.
pub const WINDOW_BARS: usize = 12;
/// Window bars before the transition bar: four past-context bars plus the
/// two target bars that precede the transition.
pub const BARS_BEFORE_TP: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VividMode {
    /// Every one of the four half bars needs an onset.
    All4,
    /// A single half bar with an onset suffices.
    Any1,
}

impl std::str::FromStr for VividMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all4" => Ok(VividMode::All4),
            "any1" => Ok(VividMode::Any1),
            other => Err(format!("unknown vivid mode {other:?} (all4|any1)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_starts_per_half_bar: u32,
    pub tempo_tolerance_bpm: f64,
    pub required_beat: (u8, u8),
    pub vivid_mode: VividMode,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_starts_per_half_bar: 1,
            tempo_tolerance_bpm: 0.5,
            required_beat: (4, 4),
            vivid_mode: VividMode::All4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FilterError {
    #[error(transparent)]
    BarOutOfRange(#[from] BarOutOfRange),
    #[error("bars {first}..={last} are not all inside the song ({bars} bars)")]
    InsufficientContext { first: i64, last: i64, bars: usize },
    #[error("song has {bars} bars, fewer than the window width {width}")]
    SongTooShort { bars: usize, width: usize },
}

/// Checks the onset counts of the four half bars around the transition at
/// the start of `bar_offset`.
pub fn is_vivid(song: &Song, bar_offset: u32, config: &FilterConfig) -> Result<bool, FilterError> {
    let starts = tp_context_stats(song, bar_offset, 0.0)?.half_bar_starts;
    let enough = |n: &u32| *n >= config.min_starts_per_half_bar.max(1);
    Ok(match config.vivid_mode {
        VividMode::All4 => starts.iter().all(enough),
        VividMode::Any1 => starts.iter().any(enough),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    NotVivid,
    Meter,
    Tempo,
    InsufficientContext,
    BarOutOfRange,
}

/// 1-based window bars `[first, last]` for a transition at `bar_offset`.
fn window_bars(bar_offset: u32) -> (i64, i64) {
    let first = i64::from(bar_offset) - i64::from(BARS_BEFORE_TP);
    (first, first + WINDOW_BARS as i64 - 1)
}

fn window_ticks(song: &Song, bar_offset: u32) -> Result<(u64, u64), FilterError> {
    let grid = song.bar_grid();
    let (first, last) = window_bars(bar_offset);
    let insufficient = FilterError::InsufficientContext {
        first,
        last,
        bars: grid.bar_count(),
    };
    if first < 1 || last as usize > grid.bar_count() {
        return Err(insufficient);
    }
    let start = grid.start(first as usize).ok_or(insufficient.clone())?;
    let end = grid.start(last as usize + 1).ok_or(insufficient)?;
    Ok((start, end))
}

/// Meter and tempo check over the 12-bar window: `None` when every active
/// time signature reduces to the required beat and the BPM range stays
/// within tolerance.
pub fn beat_check(
    song: &Song,
    bar_offset: u32,
    config: &FilterConfig,
) -> Result<Option<SkipReason>, FilterError> {
    let (start, end) = window_ticks(song, bar_offset)?;
    let (num, den) = config.required_beat;
    let meters_ok = std::iter::once(song.time_signature_at(start))
        .chain(
            song.time_signatures()
                .iter()
                .copied()
                .filter(|ts| ts.tick > start && ts.tick < end),
        )
        .all(|ts| {
            u32::from(ts.numerator) * u32::from(den) == u32::from(ts.denominator) * u32::from(num)
        });
    if !meters_ok {
        return Ok(Some(SkipReason::Meter));
    }
    let bpms: Vec<f64> = std::iter::once(song.tempo_at(start))
        .chain(
            song.tempo_map()
                .iter()
                .copied()
                .filter(|t| t.tick > start && t.tick < end),
        )
        .map(|t| t.bpm())
        .collect();
    let max = bpms.iter().copied().fold(f64::MIN, f64::max);
    let min = bpms.iter().copied().fold(f64::MAX, f64::min);
    if max - min > config.tempo_tolerance_bpm {
        return Ok(Some(SkipReason::Tempo));
    }
    Ok(None)
}

pub fn beat_ok(song: &Song, bar_offset: u32, config: &FilterConfig) -> Result<bool, FilterError> {
    Ok(beat_check(song, bar_offset, config)?.is_none())
}

/// Quantizes the notes of bars `[first_bar, first_bar + bars)` onto the
/// grid.
///
/// Notes crossing the window edges are cut at the edges. Both ends are
/// rounded half-up to the nearest step; notes covering less than half a
/// step inside the window are dropped, and surviving notes last at least
/// one step.
pub fn slice_bars(song: &Song, first_bar: usize, bars: usize) -> Result<NoteSlice, FilterError> {
    let grid = song.bar_grid();
    let last = (first_bar + bars).saturating_sub(1);
    let (Some(start), Some(end)) = (grid.start(first_bar), grid.start(last + 1)) else {
        return Err(FilterError::InsufficientContext {
            first: first_bar as i64,
            last: last as i64,
            bars: grid.bar_count(),
        });
    };
    if first_bar == 0 || bars == 0 || last > grid.bar_count() {
        return Err(FilterError::InsufficientContext {
            first: first_bar as i64,
            last: last as i64,
            bars: grid.bar_count(),
        });
    }
    let steps = (bars * STEPS_PER_BAR) as u64;
    let q = STEPS_PER_BAR as u64;
    // exact position as (whole steps in window, fraction numerator, fraction denominator)
    let position = |tick: u64| -> (u64, u64, u64) {
        if tick >= end {
            return (steps, 0, 1);
        }
        let bar = grid.bar_of_tick(tick).expect("tick inside window");
        let (bs, be) = grid.span(bar).expect("bar inside grid");
        let len = be - bs;
        let scaled = (tick - bs) * q;
        (
            (bar - first_bar) as u64 * q + scaled / len,
            scaled % len,
            len,
        )
    };
    let as_f64 = |(whole, num, den): (u64, u64, u64)| whole as f64 + num as f64 / den as f64;
    let round = |(whole, num, den): (u64, u64, u64)| whole + u64::from(2 * num >= den);

    let mut notes = Vec::new();
    for n in song.notes() {
        let (s, e) = (n.onset.max(start), n.end().min(end));
        if e <= s {
            continue;
        }
        let (ps, pe) = (position(s), position(e));
        if as_f64(pe) - as_f64(ps) < 0.5 {
            continue;
        }
        let qs = round(ps);
        if qs >= steps {
            continue;
        }
        let qe = round(pe).min(steps).max(qs + 1);
        notes.push(SliceNote {
            start: qs as u32,
            pitch: n.pitch,
            length: (qe - qs) as u32,
        });
    }
    Ok(NoteSlice::new(bars, notes).expect("quantized notes fit the window"))
}

/// The 12-bar slice around a transition: bars `bar_offset - 6` through
/// `bar_offset + 5`, so the transition sits between the second and third
/// target bars.
pub fn slice_sample(song: &Song, bar_offset: u32) -> Result<NoteSlice, FilterError> {
    let (first, last) = window_bars(bar_offset);
    let bars = song.bar_count();
    if first < 1 || last as usize > bars {
        return Err(FilterError::InsufficientContext { first, last, bars });
    }
    slice_bars(song, first as usize, WINDOW_BARS)
}

/// Slices and encodes a transition sample in the doubled scheme.
pub fn build_sample(
    song: &Song,
    bar_offset: u32,
    voices: usize,
) -> Result<(TransitionSample, Vec<VoiceOverflow>), FilterError> {
    let slice = slice_sample(song, bar_offset)?;
    let tp_tick = song
        .bar_grid()
        .start(bar_offset as usize)
        .expect("window check covers the transition bar");
    let encoded = encode(&slice, voices.max(1), Scheme::Doubled).expect("at least one voice");
    Ok((
        TransitionSample {
            grid: encoded.roll.into_grid(),
            tempo_bpm: song.bpm_at(tp_tick),
            song_id: song.id().to_string(),
            bar_offset,
        },
        encoded.overflow,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub song_id: String,
    pub bar_real: u32,
    pub bar_offset: u32,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterOutcome {
    pub kept: Vec<TransitionPoint>,
    pub skipped: Vec<SkipRecord>,
}

/// First reason a transition would be dropped, if any.
pub fn skip_reason(song: &Song, bar_offset: u32, config: &FilterConfig) -> Option<SkipReason> {
    match is_vivid(song, bar_offset, config) {
        Ok(true) => {}
        Ok(false) => return Some(SkipReason::NotVivid),
        Err(_) => return Some(SkipReason::BarOutOfRange),
    }
    match beat_check(song, bar_offset, config) {
        Ok(reason) => reason,
        Err(FilterError::BarOutOfRange(_)) => Some(SkipReason::BarOutOfRange),
        Err(_) => Some(SkipReason::InsufficientContext),
    }
}

/// Applies [`skip_reason`] to every transition of one song. Pure per
/// transition, hence idempotent.
pub fn filter_transitions(
    song: &Song,
    transitions: &[TransitionPoint],
    config: &FilterConfig,
) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for tp in transitions {
        match skip_reason(song, tp.bar_offset, config) {
            None => out.kept.push(tp.clone()),
            Some(reason) => out.skipped.push(SkipRecord {
                song_id: tp.song_id.clone(),
                bar_real: tp.bar_real,
                bar_offset: tp.bar_offset,
                reason,
            }),
        }
    }
    out
}
