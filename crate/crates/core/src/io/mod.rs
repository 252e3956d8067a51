//! Reading MIDI and MusicXML, and aligning notation bars with playback
//! time.

pub mod midi;
pub mod musicxml;
pub mod repeats;

use thiserror::Error;

pub use midi::{
    parse_midi, write_midi, write_midi_preserving_tracks, MidiError, MidiWarning, ParsedMidi,
};
pub use musicxml::{parse_musicxml, parse_mxl, MxlError};
pub use repeats::{expand_repeats, Expansion, PlaybackMap, RepeatWarning};

use crate::model::Song;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("bar {bar} outside 1..={max}")]
pub struct BarOutOfRange {
    pub bar: i64,
    pub max: usize,
}

/// Start time in seconds of 1-based playback bar `bar_offset`.
///
/// Valid for bars `1..=bar_count + 1`; the last value is the end of the
/// final bar.
pub fn time_of_bar(song: &Song, bar_offset: u32) -> Result<f64, BarOutOfRange> {
    let grid = song.bar_grid();
    let tick = grid.start(bar_offset as usize).ok_or(BarOutOfRange {
        bar: i64::from(bar_offset),
        max: grid.bar_count() + 1,
    })?;
    Ok(song.seconds_at_tick(tick))
}
