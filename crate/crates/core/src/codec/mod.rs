//! Piano-roll encoding of grid-quantized note slices.
//!
//! Two symbol schemes are supported:
//!
//! * [`Scheme::Doubled`]: pitch `p` starts as symbol `p` and sustains as
//!   `p + 128`, so every cell lies in `0..=256`.
//! * [`Scheme::Legacy`]: a single shared symbol `129` sustains whatever the
//!   voice was playing, so cells lie in `0..=129`.

pub mod format;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Grid, ModelError, RollShape, Symbol, HOLD_OFFSET, STEPS_PER_BAR};

pub use format::{read_csv, read_mdlr, write_csv, write_mdlr};

pub const LEGACY_HOLD: u16 = 129;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Doubled,
    Legacy,
}

impl Scheme {
    pub fn max_symbol(self) -> u16 {
        match self {
            Scheme::Doubled => 256,
            Scheme::Legacy => LEGACY_HOLD,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Doubled => "doubled",
            Scheme::Legacy => "legacy",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "doubled" => Ok(Scheme::Doubled),
            "legacy" => Ok(Scheme::Legacy),
            other => Err(CodecError::Format(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("voice count must be at least 1")]
    NoVoices,
    #[error("cell {cell} is not a valid {scheme:?} symbol")]
    SymbolOutOfScheme { cell: u16, scheme: Scheme },
    #[error("hold normalization needs the doubled scheme")]
    LegacySchemeUnsupported,
    #[error("note {0:?} does not fit the slice")]
    InvalidNote(SliceNote),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A note on the sixteenth-note grid, in global steps from the slice start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SliceNote {
    pub start: u32,
    pub pitch: u8,
    pub length: u32,
}

impl SliceNote {
    pub fn end(&self) -> u32 {
        self.start + self.length
    }
}

/// Grid-quantized notes spanning a whole number of bars, kept in canonical
/// `(start, pitch, length)` order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoteSlice {
    bars: usize,
    notes: Vec<SliceNote>,
}

impl NoteSlice {
    pub fn new(bars: usize, mut notes: Vec<SliceNote>) -> Result<Self, CodecError> {
        let steps = (bars * STEPS_PER_BAR) as u32;
        if let Some(bad) = notes
            .iter()
            .find(|n| !(1..=128).contains(&n.pitch) || n.length == 0 || n.end() > steps)
        {
            return Err(CodecError::InvalidNote(*bad));
        }
        notes.sort_unstable();
        Ok(NoteSlice { bars, notes })
    }

    pub fn empty(bars: usize) -> Self {
        NoteSlice {
            bars,
            notes: Vec::new(),
        }
    }

    pub fn bars(&self) -> usize {
        self.bars
    }

    pub fn steps(&self) -> usize {
        self.bars * STEPS_PER_BAR
    }

    pub fn notes(&self) -> &[SliceNote] {
        &self.notes
    }

    /// Largest number of notes sounding at any one step.
    pub fn max_polyphony(&self) -> usize {
        let mut depth = vec![0usize; self.steps()];
        for n in &self.notes {
            for d in &mut depth[n.start as usize..n.end() as usize] {
                *d += 1;
            }
        }
        depth.into_iter().max().unwrap_or(0)
    }
}

/// A symbol grid tagged with the scheme its cells use.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PianoRoll {
    grid: Grid,
    scheme: Scheme,
}

impl PianoRoll {
    pub fn new(grid: Grid, scheme: Scheme) -> Result<Self, CodecError> {
        let max = scheme.max_symbol();
        if let Some(&cell) = grid.cells().iter().find(|&&c| c > max) {
            return Err(CodecError::SymbolOutOfScheme { cell, scheme });
        }
        Ok(PianoRoll { grid, scheme })
    }

    pub fn silent(shape: RollShape, scheme: Scheme) -> Self {
        PianoRoll {
            grid: Grid::silent(shape),
            scheme,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn into_grid(self) -> Grid {
        self.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn shape(&self) -> RollShape {
        self.grid.shape()
    }

    pub fn steps(&self) -> usize {
        self.grid.steps()
    }

    pub fn voices(&self) -> usize {
        self.grid.voices()
    }

    /// True if `cell` continues a note rather than starting one.
    pub fn is_hold(&self, cell: u16) -> bool {
        match self.scheme {
            Scheme::Doubled => cell > HOLD_OFFSET,
            Scheme::Legacy => cell == LEGACY_HOLD,
        }
    }

    /// Sounding pitch of every `(step, voice)` cell, step-major.
    ///
    /// Doubled holds resolve to `h - 128`. Legacy holds resolve to the
    /// last pitch started in the same voice, or to silence if there is none.
    pub fn resolved_pitches(&self) -> Vec<Option<u8>> {
        let v = self.voices();
        let mut out = vec![None; self.grid.cells().len()];
        for voice in 0..v {
            let mut last: Option<u8> = None;
            for step in 0..self.steps() {
                let cell = self.grid.at(step, voice);
                let pitch = match self.scheme {
                    Scheme::Doubled => Symbol::classify(cell).ok().and_then(Symbol::pitch),
                    Scheme::Legacy if cell == LEGACY_HOLD => last,
                    Scheme::Legacy if cell == 0 => None,
                    Scheme::Legacy => Some(cell as u8),
                };
                if pitch.is_some() {
                    last = pitch;
                }
                out[step * v + voice] = pitch;
            }
        }
        out
    }

    /// Set of sounding pitches at every step.
    pub fn step_pitch_sets(&self) -> Vec<BTreeSet<u8>> {
        let v = self.voices();
        self.resolved_pitches()
            .chunks(v)
            .map(|cells| cells.iter().flatten().copied().collect())
            .collect()
    }
}

/// Notes that did not fit into the available voices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoiceOverflow {
    pub note: SliceNote,
    /// First step at which the note was no longer encoded.
    pub cut_at: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub roll: PianoRoll,
    pub overflow: Vec<VoiceOverflow>,
}

/// Encodes a slice into `voices` voices.
///
/// At each step the sounding notes are ranked by descending pitch. A note
/// that is already sounding keeps its voice; new notes fill the free voices
/// from the top, highest pitch first. When more than `voices` notes sound,
/// only the highest are kept and the rest are cut from that step on.
pub fn encode(slice: &NoteSlice, voices: usize, scheme: Scheme) -> Result<Encoded, CodecError> {
    if voices == 0 {
        return Err(CodecError::NoVoices);
    }
    let shape = RollShape::new(slice.bars(), voices);
    let mut grid = Grid::silent(shape);
    let notes = slice.notes();
    let mut voice_of: Vec<Option<usize>> = vec![None; notes.len()];
    let mut cut = vec![false; notes.len()];
    let mut overflow = Vec::new();

    for step in 0..slice.steps() {
        let t = step as u32;
        let mut active: Vec<usize> = (0..notes.len())
            .filter(|&i| !cut[i] && notes[i].start <= t && t < notes[i].end())
            .collect();
        active.sort_by(|&a, &b| notes[b].pitch.cmp(&notes[a].pitch).then(a.cmp(&b)));
        if active.len() > voices {
            for &i in &active[voices..] {
                cut[i] = true;
                overflow.push(VoiceOverflow {
                    note: notes[i],
                    cut_at: t,
                });
            }
            active.truncate(voices);
        }
        let mut occupied = vec![false; voices];
        for &i in &active {
            if let Some(j) = voice_of[i] {
                occupied[j] = true;
            }
        }
        let mut free = (0..voices).filter(|&j| !occupied[j]);
        for &i in &active {
            if voice_of[i].is_none() {
                voice_of[i] = free.next();
            }
            let note = notes[i];
            let pitch = u16::from(note.pitch);
            let cell = match (note.start == t, scheme) {
                (true, _) => pitch,
                (false, Scheme::Doubled) => pitch + HOLD_OFFSET,
                (false, Scheme::Legacy) => LEGACY_HOLD,
            };
            grid.set(step, voice_of[i].expect("free voice available"), cell);
        }
    }
    Ok(Encoded {
        roll: PianoRoll { grid, scheme },
        overflow,
    })
}

/// Recovers notes from a roll: an onset followed by its holds is one note.
///
/// Holds are resolved with the [`normalize_holds`] policy, so decoding is
/// total. In the legacy scheme a hold after silence restarts the voice's
/// previous pitch.
pub fn decode(roll: &PianoRoll) -> NoteSlice {
    let mut notes = Vec::new();
    for voice in 0..roll.voices() {
        let mut current: Option<(u8, u32)> = None;
        let mut last_pitch: Option<u8> = None;
        let mut close = |current: &mut Option<(u8, u32)>, t: u32| {
            if let Some((pitch, start)) = current.take() {
                notes.push(SliceNote {
                    start,
                    pitch,
                    length: t - start,
                });
            }
        };
        for step in 0..roll.steps() {
            let t = step as u32;
            let cell = roll.grid.at(step, voice);
            if cell == 0 {
                close(&mut current, t);
            } else if !roll.is_hold(cell) {
                close(&mut current, t);
                current = Some((cell as u8, t));
            } else if current.is_none() {
                let restart = match roll.scheme {
                    Scheme::Doubled => Some((cell - HOLD_OFFSET) as u8),
                    Scheme::Legacy => last_pitch,
                };
                current = restart.map(|p| (p, t));
            }
            if let Some((p, _)) = current {
                last_pitch = Some(p);
            }
        }
        close(&mut current, roll.steps() as u32);
    }
    NoteSlice::new(roll.shape().bars, notes).expect("decoded notes lie inside the roll")
}

/// Rewrites every doubled hold to match the pitch actually sounding before
/// it; a hold at the first step or after silence becomes an onset of its
/// own pitch. Onset and silence cells are never changed.
pub fn normalize_holds(roll: &PianoRoll) -> Result<PianoRoll, CodecError> {
    if roll.scheme != Scheme::Doubled {
        return Err(CodecError::LegacySchemeUnsupported);
    }
    let mut grid = roll.grid.clone();
    for voice in 0..grid.voices() {
        let mut prev: Option<u8> = None;
        for step in 0..grid.steps() {
            let sym = Symbol::classify(grid.at(step, voice))?;
            let fixed = match (sym, prev) {
                (Symbol::Hold(_), Some(p)) => Symbol::Hold(p),
                (Symbol::Hold(h), None) => Symbol::Onset(h),
                (other, _) => other,
            };
            grid.set(step, voice, fixed.code());
            prev = fixed.pitch();
        }
    }
    Ok(PianoRoll {
        grid,
        scheme: Scheme::Doubled,
    })
}
