//! Shared domain types: playback songs, notation documents, transition
//! records and the symbol grid used by piano rolls.
//!
//! Pitches live in `1..=128`, one above the MIDI key number, so that `0`
//! can stand for silence inside a grid. Grid symbols follow the doubled
//! hold layout: `p` starts pitch `p`, `p + 128` sustains it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Size of the pitch space (symbols `1..=128`).
pub const PITCH_COUNT: u16 = 128;
/// Offset added to a pitch to form its hold symbol.
pub const HOLD_OFFSET: u16 = 128;
/// Largest valid grid symbol.
pub const MAX_SYMBOL: u16 = 256;
/// Steps per bar: the grid resolution is a sixteenth note.
pub const STEPS_PER_BAR: usize = 16;
/// Steps per quarter note.
pub const STEPS_PER_QUARTER: usize = 4;

pub const DEFAULT_MICROS_PER_QUARTER: u32 = 500_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("pitch {0} outside 1..=128")]
    PitchOutOfRange(u16),
    #[error("note duration must be positive")]
    ZeroDuration,
    #[error("velocity {0} outside 0..=127")]
    VelocityOutOfRange(u8),
    #[error("ticks per quarter must be positive")]
    ZeroTicksPerQuarter,
    #[error("invalid time signature {0}/{1}")]
    InvalidTimeSignature(u8, u8),
    #[error("tempo must be positive")]
    ZeroTempo,
    #[error("grid cell {0} outside 0..=256")]
    SymbolOutOfRange(u16),
    #[error("grid dimensions {bars}x{steps}x{voices} do not match {len} cells")]
    GridShape {
        bars: usize,
        steps: usize,
        voices: usize,
        len: usize,
    },
}

/// A single timed note in the playback view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoteEvent {
    /// Pitch in `1..=128` (MIDI key + 1).
    pub pitch: u8,
    pub onset: u64,
    pub duration: u64,
    pub velocity: u8,
    pub track: usize,
    pub voice_hint: Option<usize>,
}

impl NoteEvent {
    pub fn new(
        pitch: u8,
        onset: u64,
        duration: u64,
        velocity: u8,
        track: usize,
    ) -> Result<Self, ModelError> {
        let note = NoteEvent {
            pitch,
            onset,
            duration,
            velocity,
            track,
            voice_hint: None,
        };
        note.validate()?;
        Ok(note)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(1..=128).contains(&self.pitch) {
            return Err(ModelError::PitchOutOfRange(self.pitch.into()));
        }
        if self.duration == 0 {
            return Err(ModelError::ZeroDuration);
        }
        if self.velocity > 127 {
            return Err(ModelError::VelocityOutOfRange(self.velocity));
        }
        Ok(())
    }

    pub fn end(&self) -> u64 {
        self.onset + self.duration
    }

    /// MIDI key number of this note.
    pub fn midi_key(&self) -> u8 {
        self.pitch - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TempoChange {
    pub tick: u64,
    pub micros_per_quarter: u32,
}

impl TempoChange {
    pub fn bpm(&self) -> f64 {
        60_000_000.0 / f64::from(self.micros_per_quarter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSignature {
    pub tick: u64,
    pub numerator: u8,
    pub denominator: u8,
}

impl TimeSignature {
    /// Bar length in ticks for the given resolution.
    pub fn bar_ticks(&self, ticks_per_quarter: u32) -> u64 {
        u64::from(ticks_per_quarter) * 4 * u64::from(self.numerator) / u64::from(self.denominator)
    }

    /// True for meters whose bar spans exactly one whole note (4/4, 2/2, 8/8, ...).
    pub fn is_common_time(&self) -> bool {
        self.numerator == self.denominator
    }
}

/// Key signature as a count of sharps (negative for flats) and mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeySignature {
    pub tick: u64,
    pub sharps: i8,
    pub minor: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrackProgram {
    pub track: usize,
    pub program: u8,
}

/// Playback view of a piece, usually parsed from a MIDI file.
#[derive(Debug, Clone, PartialEq)]
pub struct Song {
    id: String,
    title: String,
    ticks_per_quarter: u32,
    notes: Vec<NoteEvent>,
    tempo_map: Vec<TempoChange>,
    time_signatures: Vec<TimeSignature>,
    key_signatures: Vec<KeySignature>,
    programs: Vec<TrackProgram>,
    end_tick: u64,
}

impl Song {
    pub fn builder(ticks_per_quarter: u32) -> SongBuilder {
        SongBuilder {
            ticks_per_quarter,
            ..SongBuilder::default()
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn ticks_per_quarter(&self) -> u32 {
        self.ticks_per_quarter
    }

    /// Notes ordered by onset, then track, then pitch.
    pub fn notes(&self) -> &[NoteEvent] {
        &self.notes
    }

    pub fn tempo_map(&self) -> &[TempoChange] {
        &self.tempo_map
    }

    pub fn time_signatures(&self) -> &[TimeSignature] {
        &self.time_signatures
    }

    pub fn key_signatures(&self) -> &[KeySignature] {
        &self.key_signatures
    }

    pub fn programs(&self) -> &[TrackProgram] {
        &self.programs
    }

    /// Last tick of the piece: the later of the final note end and the
    /// declared track length.
    pub fn end_tick(&self) -> u64 {
        self.end_tick
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.title = title.into();
        self
    }

    pub fn tempo_at(&self, tick: u64) -> TempoChange {
        active_at(&self.tempo_map, tick, |t| t.tick)
    }

    pub fn time_signature_at(&self, tick: u64) -> TimeSignature {
        active_at(&self.time_signatures, tick, |t| t.tick)
    }

    pub fn bpm_at(&self, tick: u64) -> f64 {
        self.tempo_at(tick).bpm()
    }

    /// Wall-clock position of `tick`, integrating the tempo map.
    pub fn seconds_at_tick(&self, tick: u64) -> f64 {
        let tpq = f64::from(self.ticks_per_quarter);
        let mut micros = 0.0;
        for (i, change) in self.tempo_map.iter().enumerate() {
            if change.tick >= tick {
                break;
            }
            let segment_end = self
                .tempo_map
                .get(i + 1)
                .map_or(tick, |next| next.tick.min(tick));
            micros += (segment_end - change.tick) as f64 * f64::from(change.micros_per_quarter);
        }
        micros / tpq / 1e6
    }

    pub fn duration_seconds(&self) -> f64 {
        self.seconds_at_tick(self.end_tick)
    }

    /// Bar boundaries derived from the time-signature map.
    pub fn bar_grid(&self) -> BarGrid {
        BarGrid::new(self)
    }

    pub fn bar_count(&self) -> usize {
        self.bar_grid().bar_count()
    }
}

fn active_at<T: Copy>(entries: &[T], tick: u64, key: impl Fn(&T) -> u64) -> T {
    let idx = entries.partition_point(|e| key(e) <= tick);
    entries[idx.saturating_sub(1)]
}

#[derive(Debug, Clone, Default)]
pub struct SongBuilder {
    id: String,
    title: String,
    ticks_per_quarter: u32,
    notes: Vec<NoteEvent>,
    tempo_map: Vec<TempoChange>,
    time_signatures: Vec<TimeSignature>,
    key_signatures: Vec<KeySignature>,
    programs: Vec<TrackProgram>,
    end_tick: u64,
}

impl SongBuilder {
    pub fn id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn title(mut self, title: impl Into<String>) -> Self {
        self.title = title.into();
        self
    }

    pub fn note(mut self, note: NoteEvent) -> Self {
        self.notes.push(note);
        self
    }

    pub fn notes(mut self, notes: impl IntoIterator<Item = NoteEvent>) -> Self {
        self.notes.extend(notes);
        self
    }

    pub fn tempo(mut self, tick: u64, micros_per_quarter: u32) -> Self {
        self.tempo_map.push(TempoChange {
            tick,
            micros_per_quarter,
        });
        self
    }

    pub fn tempo_bpm(self, tick: u64, bpm: f64) -> Self {
        self.tempo(tick, (60_000_000.0 / bpm).round() as u32)
    }

    pub fn time_signature(mut self, tick: u64, numerator: u8, denominator: u8) -> Self {
        self.time_signatures.push(TimeSignature {
            tick,
            numerator,
            denominator,
        });
        self
    }

    pub fn key_signature(mut self, tick: u64, sharps: i8, minor: bool) -> Self {
        self.key_signatures.push(KeySignature {
            tick,
            sharps,
            minor,
        });
        self
    }

    pub fn program(mut self, track: usize, program: u8) -> Self {
        self.programs.push(TrackProgram { track, program });
        self
    }

    pub fn end_tick(mut self, tick: u64) -> Self {
        self.end_tick = self.end_tick.max(tick);
        self
    }

    /// Validates notes, sorts every map by tick (later entries win on equal
    /// ticks) and inserts the tick-0 defaults: 120 BPM, 4/4, C major.
    pub fn build(self) -> Result<Song, ModelError> {
        if self.ticks_per_quarter == 0 {
            return Err(ModelError::ZeroTicksPerQuarter);
        }
        let mut notes = self.notes;
        for note in &notes {
            note.validate()?;
        }
        notes.sort_by(|a, b| {
            (a.onset, a.track, a.pitch, a.duration, a.velocity)
                .cmp(&(b.onset, b.track, b.pitch, b.duration, b.velocity))
        });
        for t in &self.tempo_map {
            if t.micros_per_quarter == 0 {
                return Err(ModelError::ZeroTempo);
            }
        }
        for ts in &self.time_signatures {
            if ts.numerator == 0 || ts.denominator == 0 || !ts.denominator.is_power_of_two() {
                return Err(ModelError::InvalidTimeSignature(
                    ts.numerator,
                    ts.denominator,
                ));
            }
        }
        let tempo_map = normalize_map(
            self.tempo_map,
            |t| t.tick,
            TempoChange {
                tick: 0,
                micros_per_quarter: DEFAULT_MICROS_PER_QUARTER,
            },
        );
        let time_signatures = normalize_map(
            self.time_signatures,
            |t| t.tick,
            TimeSignature {
                tick: 0,
                numerator: 4,
                denominator: 4,
            },
        );
        let key_signatures = normalize_map(
            self.key_signatures,
            |k| k.tick,
            KeySignature {
                tick: 0,
                sharps: 0,
                minor: false,
            },
        );
        let mut programs = self.programs;
        programs.sort();
        programs.dedup();
        let notes_end = notes.iter().map(NoteEvent::end).max().unwrap_or(0);
        Ok(Song {
            id: self.id,
            title: self.title,
            ticks_per_quarter: self.ticks_per_quarter,
            notes,
            tempo_map,
            time_signatures,
            key_signatures,
            programs,
            end_tick: self.end_tick.max(notes_end),
        })
    }
}

fn normalize_map<T: Copy>(mut entries: Vec<T>, key: impl Fn(&T) -> u64, default: T) -> Vec<T> {
    // stable sort keeps insertion order among equal ticks; keep the last one
    entries.sort_by_key(&key);
    let mut out: Vec<T> = Vec::with_capacity(entries.len() + 1);
    for e in entries {
        match out.last_mut() {
            Some(last) if key(last) == key(&e) => *last = e,
            _ => out.push(e),
        }
    }
    if out.first().is_none_or(|e| key(e) != 0) {
        out.insert(0, default);
    }
    out
}

/// Bar start ticks of a song. Bar `n` (1-based) spans
/// `[start(n), start(n + 1))`. A time-signature change that falls inside a
/// bar closes that bar early.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BarGrid {
    starts: Vec<u64>,
}

impl BarGrid {
    fn new(song: &Song) -> Self {
        let tpq = song.ticks_per_quarter;
        let sigs = &song.time_signatures;
        let end = song.end_tick;
        let mut starts = vec![0u64];
        let mut tick = 0u64;
        loop {
            let idx = sigs.partition_point(|s| s.tick <= tick) - 1;
            let mut next = tick + sigs[idx].bar_ticks(tpq).max(1);
            if let Some(change) = sigs.get(idx + 1) {
                if change.tick < next {
                    next = change.tick;
                }
            }
            starts.push(next);
            tick = next;
            if tick >= end {
                break;
            }
        }
        BarGrid { starts }
    }

    /// Number of complete or partial bars covering the piece (at least 1).
    pub fn bar_count(&self) -> usize {
        self.starts.len() - 1
    }

    /// First tick of 1-based `bar`; `bar_count() + 1` yields the end of the
    /// final bar.
    pub fn start(&self, bar: usize) -> Option<u64> {
        if bar == 0 {
            return None;
        }
        self.starts.get(bar - 1).copied()
    }

    /// Tick span of 1-based `bar`.
    pub fn span(&self, bar: usize) -> Option<(u64, u64)> {
        Some((self.start(bar)?, self.start(bar + 1)?))
    }

    /// 1-based bar containing `tick`, if inside the piece.
    pub fn bar_of_tick(&self, tick: u64) -> Option<usize> {
        if tick >= *self.starts.last()? {
            return None;
        }
        Some(self.starts.partition_point(|&s| s <= tick))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Above,
    Below,
    #[default]
    Unspecified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub text: String,
    pub placement: Placement,
}

/// One notation measure.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Measure {
    /// 1-based position in notation order.
    pub index_real: u32,
    pub annotations: Vec<Annotation>,
    pub time_signature: Option<(u8, u8)>,
    pub repeat_start: bool,
    /// Total passes through the repeated span, at least 1.
    pub repeat_end: Option<u32>,
    /// Navigation marks that are recognised but not expanded
    /// (da capo, dal segno, coda, volta endings).
    pub unsupported_marks: Vec<String>,
}

impl Measure {
    pub fn new(index_real: u32) -> Self {
        Measure {
            index_real,
            ..Measure::default()
        }
    }
}

/// Notation view of a piece, usually parsed from MusicXML.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScoreDocument {
    pub title: String,
    pub parts: Vec<String>,
    pub measures: Vec<Measure>,
}

impl ScoreDocument {
    pub fn measure(&self, index_real: u32) -> Option<&Measure> {
        self.measures.get(index_real.checked_sub(1)? as usize)
    }
}

/// A labelled transition between two songs of a medley.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionPoint {
    pub song_id: String,
    pub text: String,
    pub bar_real: u32,
    pub bar_offset: u32,
    pub time_seconds: f64,
    pub notes_during: u32,
    pub avg_note_length_seconds: f64,
    pub notes_before_bar: u32,
    pub notes_after_bar: u32,
    pub half_bar_starts: [u32; 4],
}

/// Dimensions of a piano roll.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RollShape {
    pub bars: usize,
    pub steps_per_bar: usize,
    pub pitches: usize,
    pub voices: usize,
}

impl RollShape {
    pub fn new(bars: usize, voices: usize) -> Self {
        RollShape {
            bars,
            steps_per_bar: STEPS_PER_BAR,
            pitches: PITCH_COUNT as usize,
            voices,
        }
    }

    pub fn steps(&self) -> usize {
        self.bars * self.steps_per_bar
    }

    pub fn cells(&self) -> usize {
        self.steps() * self.voices
    }
}

/// Classification of a single grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Silence,
    Onset(u8),
    Hold(u8),
}

impl Symbol {
    pub fn classify(cell: u16) -> Result<Symbol, ModelError> {
        match cell {
            0 => Ok(Symbol::Silence),
            1..=128 => Ok(Symbol::Onset(cell as u8)),
            129..=256 => Ok(Symbol::Hold((cell - HOLD_OFFSET) as u8)),
            _ => Err(ModelError::SymbolOutOfRange(cell)),
        }
    }

    pub fn code(self) -> u16 {
        match self {
            Symbol::Silence => 0,
            Symbol::Onset(p) => u16::from(p),
            Symbol::Hold(p) => u16::from(p) + HOLD_OFFSET,
        }
    }

    pub fn pitch(self) -> Option<u8> {
        match self {
            Symbol::Silence => None,
            Symbol::Onset(p) | Symbol::Hold(p) => Some(p),
        }
    }
}

/// Dense `bars × steps × voices` array of symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    shape: RollShape,
    cells: Vec<u16>,
}

impl Grid {
    pub fn silent(shape: RollShape) -> Self {
        Grid {
            shape,
            cells: vec![0; shape.cells()],
        }
    }

    pub fn from_cells(shape: RollShape, cells: Vec<u16>) -> Result<Self, ModelError> {
        if cells.len() != shape.cells() {
            return Err(ModelError::GridShape {
                bars: shape.bars,
                steps: shape.steps_per_bar,
                voices: shape.voices,
                len: cells.len(),
            });
        }
        if let Some(&bad) = cells.iter().find(|&&c| c > MAX_SYMBOL) {
            return Err(ModelError::SymbolOutOfRange(bad));
        }
        Ok(Grid { shape, cells })
    }

    pub fn shape(&self) -> RollShape {
        self.shape
    }

    pub fn cells(&self) -> &[u16] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<u16> {
        self.cells
    }

    pub fn voices(&self) -> usize {
        self.shape.voices
    }

    pub fn steps(&self) -> usize {
        self.shape.steps()
    }

    fn offset(&self, step: usize, voice: usize) -> usize {
        step * self.shape.voices + voice
    }

    /// Cell at a global step (bars flattened) and voice.
    pub fn at(&self, step: usize, voice: usize) -> u16 {
        self.cells[self.offset(step, voice)]
    }

    pub fn get(&self, bar: usize, step: usize, voice: usize) -> u16 {
        self.at(bar * self.shape.steps_per_bar + step, voice)
    }

    pub fn set(&mut self, step: usize, voice: usize, value: u16) {
        let i = self.offset(step, voice);
        self.cells[i] = value;
    }

    /// All voices at a global step.
    pub fn step_cells(&self, step: usize) -> &[u16] {
        let v = self.shape.voices;
        &self.cells[step * v..(step + 1) * v]
    }

    /// Cells of one bar, all steps and voices.
    pub fn bar_cells(&self, bar: usize) -> &[u16] {
        let len = self.shape.steps_per_bar * self.shape.voices;
        &self.cells[bar * len..(bar + 1) * len]
    }
}

/// Pitches sounding at `(bar, step)`, resolving hold symbols to their pitch.
pub fn sounding_pitches(grid: &Grid, bar: usize, step: usize) -> BTreeSet<u8> {
    let global = bar * grid.shape().steps_per_bar + step;
    grid.step_cells(global)
        .iter()
        .filter_map(|&c| Symbol::classify(c).ok().and_then(Symbol::pitch))
        .collect()
}

/// A fixed-width grid sample around one transition: bars 0-3 are past
/// context, 4-7 the target and 8-11 future context.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSample {
    pub grid: Grid,
    pub tempo_bpm: f64,
    pub song_id: String,
    pub bar_offset: u32,
}

impl TransitionSample {
    pub const BARS: usize = 12;
    pub const CONTEXT_BARS: usize = 4;

    pub fn voices(&self) -> usize {
        self.grid.voices()
    }

    pub fn target_bars() -> std::ops::Range<usize> {
        Self::CONTEXT_BARS..2 * Self::CONTEXT_BARS
    }
}
