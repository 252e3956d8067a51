//! Standard MIDI File (type 0 and 1) reading, plus a writer used to build
//! fixtures and to round-trip the [`Song`] model.

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{ModelError, NoteEvent, Song, SongBuilder};

#[derive(Debug, Error)]
pub enum MidiError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported SMF type {0}")]
    UnsupportedSmfType(u16),
    #[error("SMPTE time division is not supported")]
    SmpteDivision,
    #[error("truncated or malformed track {track}: {reason}")]
    MalformedTrack { track: usize, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Non-fatal irregularities found while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MidiWarning {
    /// A note-on was never closed; the note was ended at the track end.
    DanglingNoteOn { track: usize, key: u8, onset: u64 },
    /// A note-off arrived for a key that was not sounding.
    OrphanNoteOff { track: usize, key: u8, tick: u64 },
    /// A note closed at its own onset and was discarded.
    ZeroLengthNote { track: usize, key: u8, tick: u64 },
}

#[derive(Debug, Clone)]
pub struct ParsedMidi {
    pub song: Song,
    pub warnings: Vec<MidiWarning>,
}

const META_TEXT_TRACK_NAME: u8 = 0x03;
const META_END_OF_TRACK: u8 = 0x2F;
const META_TEMPO: u8 = 0x51;
const META_TIME_SIGNATURE: u8 = 0x58;
const META_KEY_SIGNATURE: u8 = 0x59;

/// Parses an SMF byte stream.
///
/// Track identity is the chunk index for type 1 files and the MIDI channel
/// for type 0 files. A note-on with velocity 0 is a note-off. A repeated
/// note-on of a sounding key on the same track closes the earlier note.
pub fn parse_midi(bytes: &[u8]) -> Result<ParsedMidi, MidiError> {
    let mut reader = Reader::new(bytes);
    let header = reader
        .chunk(*b"MThd")
        .map_err(|e| MidiError::MalformedHeader(e.to_string()))?
        .ok_or_else(|| MidiError::MalformedHeader("missing MThd chunk".into()))?;
    if header.len() < 6 {
        return Err(MidiError::MalformedHeader(format!(
            "header length {} < 6",
            header.len()
        )));
    }
    let format = u16::from_be_bytes([header[0], header[1]]);
    let ntracks = u16::from_be_bytes([header[2], header[3]]) as usize;
    let division = u16::from_be_bytes([header[4], header[5]]);
    match format {
        0 | 1 => {}
        2 => return Err(MidiError::UnsupportedSmfType(2)),
        other => {
            return Err(MidiError::MalformedHeader(format!(
                "unknown SMF type {other}"
            )))
        }
    }
    if division & 0x8000 != 0 {
        return Err(MidiError::SmpteDivision);
    }
    if division == 0 {
        return Err(MidiError::MalformedHeader("zero ticks per quarter".into()));
    }

    let mut state = ParseState {
        builder: Song::builder(u32::from(division)),
        warnings: Vec::new(),
        title: None,
    };
    let mut index = 0;
    while index < ntracks {
        let chunk = match reader.raw_chunk() {
            Ok(Some(c)) => c,
            Ok(None) => break,
            Err(reason) => {
                return Err(MidiError::MalformedTrack {
                    track: index,
                    reason: reason.into(),
                })
            }
        };
        // unknown chunk types are skipped
        if chunk.0 != *b"MTrk" {
            continue;
        }
        parse_track(chunk.1, index, format == 0, &mut state).map_err(|reason| {
            MidiError::MalformedTrack {
                track: index,
                reason: reason.into(),
            }
        })?;
        index += 1;
    }
    let mut builder = state.builder;
    if let Some(title) = state.title {
        builder = builder.title(title);
    }
    Ok(ParsedMidi {
        song: builder.build()?,
        warnings: state.warnings,
    })
}

struct ParseState {
    builder: SongBuilder,
    warnings: Vec<MidiWarning>,
    title: Option<String>,
}

struct OpenNote {
    onset: u64,
    velocity: u8,
}

fn parse_track(
    data: &[u8],
    chunk_index: usize,
    channel_is_track: bool,
    state: &mut ParseState,
) -> Result<(), &'static str> {
    let mut r = Reader::new(data);
    let mut tick = 0u64;
    let mut running: Option<u8> = None;
    let mut open: HashMap<(usize, u8), OpenNote> = HashMap::new();
    let mut notes: Vec<NoteEvent> = Vec::new();
    let track_of = |channel: u8| {
        if channel_is_track {
            usize::from(channel)
        } else {
            chunk_index
        }
    };

    while !r.is_empty() {
        tick += r.varlen()?;
        let mut status = r.peek().ok_or("missing event status")?;
        if status & 0x80 != 0 {
            r.byte()?;
        } else {
            status = running.ok_or("data byte without running status")?;
        }
        match status {
            0xFF => {
                let kind = r.byte()?;
                let len = r.varlen()? as usize;
                let payload = r.take(len)?;
                match kind {
                    META_TEMPO if len == 3 => {
                        let micros = u32::from_be_bytes([0, payload[0], payload[1], payload[2]]);
                        if micros > 0 {
                            state.builder = std::mem::take(&mut state.builder).tempo(tick, micros);
                        }
                    }
                    META_TIME_SIGNATURE if len >= 2 => {
                        let den = 1u32.checked_shl(u32::from(payload[1])).unwrap_or(0);
                        if payload[0] > 0 && (1..=128).contains(&den) {
                            state.builder = std::mem::take(&mut state.builder)
                                .time_signature(tick, payload[0], den as u8);
                        }
                    }
                    META_KEY_SIGNATURE if len == 2 => {
                        state.builder = std::mem::take(&mut state.builder).key_signature(
                            tick,
                            payload[0] as i8,
                            payload[1] == 1,
                        );
                    }
                    META_TEXT_TRACK_NAME if state.title.is_none() && chunk_index == 0 => {
                        state.title = Some(String::from_utf8_lossy(payload).into_owned());
                    }
                    META_END_OF_TRACK => break,
                    _ => {}
                }
                // meta and sysex events cancel running status
                running = None;
            }
            0xF0 | 0xF7 => {
                let len = r.varlen()? as usize;
                r.take(len)?;
                running = None;
            }
            0x80..=0xEF => {
                running = Some(status);
                let channel = status & 0x0F;
                let track = track_of(channel);
                match status & 0xF0 {
                    0x80 | 0x90 => {
                        let key = r.byte()? & 0x7F;
                        let velocity = r.byte()? & 0x7F;
                        if status & 0xF0 == 0x90 && velocity > 0 {
                            if open.contains_key(&(track, key)) {
                                close_note(
                                    &mut open,
                                    &mut notes,
                                    &mut state.warnings,
                                    track,
                                    key,
                                    tick,
                                );
                            }
                            open.insert(
                                (track, key),
                                OpenNote {
                                    onset: tick,
                                    velocity,
                                },
                            );
                        } else if !close_note(
                            &mut open,
                            &mut notes,
                            &mut state.warnings,
                            track,
                            key,
                            tick,
                        ) {
                            state
                                .warnings
                                .push(MidiWarning::OrphanNoteOff { track, key, tick });
                        }
                    }
                    0xC0 => {
                        let program = r.byte()? & 0x7F;
                        state.builder = std::mem::take(&mut state.builder).program(track, program);
                    }
                    0xD0 => {
                        r.byte()?;
                    }
                    _ => {
                        r.byte()?;
                        r.byte()?;
                    }
                }
            }
            _ => return Err("unexpected system event"),
        }
    }

    let mut dangling: Vec<_> = open.keys().copied().collect();
    dangling.sort_unstable();
    for (track, key) in dangling {
        let onset = open[&(track, key)].onset;
        state
            .warnings
            .push(MidiWarning::DanglingNoteOn { track, key, onset });
        close_note(&mut open, &mut notes, &mut state.warnings, track, key, tick);
    }
    state.builder = std::mem::take(&mut state.builder)
        .notes(notes)
        .end_tick(tick);
    Ok(())
}

fn close_note(
    open: &mut HashMap<(usize, u8), OpenNote>,
    notes: &mut Vec<NoteEvent>,
    warnings: &mut Vec<MidiWarning>,
    track: usize,
    key: u8,
    tick: u64,
) -> bool {
    let Some(n) = open.remove(&(track, key)) else {
        return false;
    };
    if tick > n.onset {
        notes.push(NoteEvent {
            pitch: key + 1,
            onset: n.onset,
            duration: tick - n.onset,
            velocity: n.velocity,
            track,
            voice_hint: None,
        });
    } else {
        warnings.push(MidiWarning::ZeroLengthNote { track, key, tick });
    }
    true
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

/// Chunk tag and body.
type RawChunk<'a> = ([u8; 4], &'a [u8]);

impl<'a> Reader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    fn is_empty(&self) -> bool {
        self.pos >= self.data.len()
    }

    fn peek(&self) -> Option<u8> {
        self.data.get(self.pos).copied()
    }

    fn byte(&mut self) -> Result<u8, &'static str> {
        let b = self.peek().ok_or("unexpected end of data")?;
        self.pos += 1;
        Ok(b)
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8], &'static str> {
        let end = self.pos.checked_add(len).ok_or("length overflow")?;
        let slice = self
            .data
            .get(self.pos..end)
            .ok_or("unexpected end of data")?;
        self.pos = end;
        Ok(slice)
    }

    fn varlen(&mut self) -> Result<u64, &'static str> {
        let mut value = 0u64;
        for _ in 0..4 {
            let b = self.byte()?;
            value = (value << 7) | u64::from(b & 0x7F);
            if b & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err("variable-length quantity longer than 4 bytes")
    }

    fn raw_chunk(&mut self) -> Result<Option<RawChunk<'a>>, &'static str> {
        if self.is_empty() {
            return Ok(None);
        }
        let tag = self.take(4)?;
        let len = self.take(4)?;
        let len = u32::from_be_bytes([len[0], len[1], len[2], len[3]]) as usize;
        let body = self.take(len)?;
        Ok(Some(([tag[0], tag[1], tag[2], tag[3]], body)))
    }

    fn chunk(&mut self, tag: [u8; 4]) -> Result<Option<&'a [u8]>, &'static str> {
        match self.raw_chunk()? {
            Some((t, body)) if t == tag => Ok(Some(body)),
            Some(_) => Err("unexpected chunk type"),
            None => Ok(None),
        }
    }
}

/// Serializes a song as an SMF type 1 file.
///
/// Track 0 carries the tempo, meter and key maps; every song track `n` is
/// written to chunk `n + 1` on channel `n % 16`, so type 1 parsing maps it
/// back to track index `n + 1`. Use [`write_midi_preserving_tracks`] when
/// track indices must survive a round trip.
pub fn write_midi(song: &Song) -> Vec<u8> {
    encode(song, 1)
}

/// Like [`write_midi`], but song track `n` lands in chunk `n` (the
/// conductor events share chunk 0), so parsing yields identical track ids.
pub fn write_midi_preserving_tracks(song: &Song) -> Vec<u8> {
    encode(song, 0)
}

fn encode(song: &Song, track_shift: usize) -> Vec<u8> {
    let max_track = song
        .notes()
        .iter()
        .map(|n| n.track)
        .chain(song.programs().iter().map(|p| p.track))
        .max();
    let chunk_count = max_track.map_or(1, |t| t + 1 + track_shift).max(1);
    let mut chunks: Vec<Vec<(u64, u8, Vec<u8>)>> = vec![Vec::new(); chunk_count];

    // order keys: 0 meta, 1 program, 2 note-off, 3 note-on
    for t in song.tempo_map() {
        let m = t.micros_per_quarter.to_be_bytes();
        chunks[0].push((t.tick, 0, vec![0xFF, META_TEMPO, 3, m[1], m[2], m[3]]));
    }
    for ts in song.time_signatures() {
        let pow = ts.denominator.trailing_zeros() as u8;
        chunks[0].push((
            ts.tick,
            0,
            vec![0xFF, META_TIME_SIGNATURE, 4, ts.numerator, pow, 24, 8],
        ));
    }
    for k in song.key_signatures() {
        chunks[0].push((
            k.tick,
            0,
            vec![
                0xFF,
                META_KEY_SIGNATURE,
                2,
                k.sharps as u8,
                u8::from(k.minor),
            ],
        ));
    }
    if !song.title().is_empty() {
        let mut ev = vec![0xFF, META_TEXT_TRACK_NAME];
        push_varlen(&mut ev, song.title().len() as u64);
        ev.extend_from_slice(song.title().as_bytes());
        chunks[0].push((0, 0, ev));
    }
    for p in song.programs() {
        let channel = (p.track % 16) as u8;
        chunks[p.track + track_shift].push((0, 1, vec![0xC0 | channel, p.program]));
    }
    for n in song.notes() {
        let channel = (n.track % 16) as u8;
        let key = n.midi_key();
        let chunk = &mut chunks[n.track + track_shift];
        chunk.push((n.onset, 3, vec![0x90 | channel, key, n.velocity.max(1)]));
        chunk.push((n.end(), 2, vec![0x80 | channel, key, 0]));
    }

    let mut out = Vec::new();
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&(chunk_count as u16).to_be_bytes());
    out.extend_from_slice(&(song.ticks_per_quarter() as u16).to_be_bytes());
    for mut events in chunks {
        events.sort_by_key(|(tick, order, _)| (*tick, *order));
        let mut body = Vec::new();
        let mut last = 0u64;
        for (tick, _, bytes) in &events {
            push_varlen(&mut body, tick - last);
            body.extend_from_slice(bytes);
            last = *tick;
        }
        push_varlen(&mut body, song.end_tick().saturating_sub(last));
        body.extend_from_slice(&[0xFF, META_END_OF_TRACK, 0]);
        out.extend_from_slice(b"MTrk");
        out.extend_from_slice(&(body.len() as u32).to_be_bytes());
        out.extend_from_slice(&body);
    }
    out
}

fn push_varlen(out: &mut Vec<u8>, mut value: u64) {
    let mut buf = [0u8; 10];
    let mut i = buf.len() - 1;
    buf[i] = (value & 0x7F) as u8;
    value >>= 7;
    while value > 0 {
        i -= 1;
        buf[i] = 0x80 | (value & 0x7F) as u8;
        value >>= 7;
    }
    out.extend_from_slice(&buf[i..]);
}
