//! Seeded random slices, rolls, histograms and songs.

use medley_core::codec::{encode, NoteSlice, PianoRoll, Scheme, SliceNote};
use medley_core::{NoteEvent, Song};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `voices` lanes of non-overlapping notes, so polyphony never exceeds
/// `voices`. `rest` bounds the gap before each note.
pub fn slice(
    rng: &mut ChaCha8Rng,
    voices: usize,
    bars: usize,
    pitches: (u8, u8),
    rest: u32,
) -> NoteSlice {
    let steps = (bars * 16) as u32;
    let mut notes = Vec::new();
    for _ in 0..voices {
        let mut t = rng.gen_range(0..=rest);
        while t < steps {
            let length = rng.gen_range(1..=8).min(steps - t);
            let pitch = rng.gen_range(pitches.0..=pitches.1);
            notes.push(SliceNote {
                start: t,
                pitch,
                length,
            });
            t += length + rng.gen_range(0..=rest);
        }
    }
    NoteSlice::new(bars, notes).unwrap()
}

pub fn roll(rng: &mut ChaCha8Rng) -> (NoteSlice, PianoRoll) {
    let voices = rng.gen_range(1..=4);
    let bars = rng.gen_range(1..=4);
    let s = slice(rng, voices, bars, (58, 73), 3);
    let r = encode(&s, voices, Scheme::Doubled).unwrap().roll;
    (s, r)
}

/// A 3-voice, 4-bar roll of block chords. Each segment is a rest or one of
/// six diatonic chords, two of them with a dissonant seventh. Chord
/// preferences, rest density and register vary per piece.
pub fn corpus_roll(rng: &mut ChaCha8Rng) -> PianoRoll {
    const CHORDS: [[u8; 3]; 6] = [
        [0, 4, 7],
        [2, 5, 9],
        [0, 4, 11],
        [5, 9, 12],
        [7, 11, 17],
        [9, 12, 16],
    ];
    let base = 48 + 12 * rng.gen_range(0..2u8);
    let weights: Vec<u32> = CHORDS.iter().map(|_| rng.gen_range(0..6)).collect();
    let total: u32 = weights.iter().sum::<u32>().max(1);
    let rest_chance = rng.gen_range(0.0..0.6);
    let mut notes = Vec::new();
    let mut t = 0u32;
    while t < 64 {
        let length = rng.gen_range(1..=8u32).min(64 - t);
        if !rng.gen_bool(rest_chance) {
            let mut pick = rng.gen_range(0..total);
            let chord = weights
                .iter()
                .position(|&w| {
                    if pick < w {
                        true
                    } else {
                        pick -= w;
                        false
                    }
                })
                .unwrap_or(0);
            for interval in CHORDS[chord] {
                notes.push(SliceNote {
                    start: t,
                    pitch: base + interval,
                    length,
                });
            }
        }
        t += length;
    }
    encode(&NoteSlice::new(4, notes).unwrap(), 3, Scheme::Doubled)
        .unwrap()
        .roll
}

/// Up to five bins on a 0.01 grid with integer weights summing to `total`.
pub fn bins(rng: &mut ChaCha8Rng, total: u32) -> Vec<(i32, u32)> {
    let n = rng.gen_range(1..=5);
    let mut values: Vec<i32> = (0..n).map(|_| rng.gen_range(0..1000)).collect();
    values.sort_unstable();
    values.dedup();
    let weights: Vec<u32> = values.iter().map(|_| rng.gen_range(1..10)).collect();
    let sum: u32 = weights.iter().sum();
    let mut out: Vec<(i32, u32)> = values
        .into_iter()
        .zip(weights)
        .map(|(v, w)| (v, w * total / sum))
        .collect();
    let assigned: u32 = out.iter().map(|b| b.1).sum();
    out[0].1 += total - assigned;
    out.retain(|b| b.1 > 0);
    out
}

/// A 4/4 song of `bars` bars with random sixteenth-aligned notes and tempo
/// changes.
pub fn song(rng: &mut ChaCha8Rng, bars: u64) -> Song {
    let mut b = Song::builder(480).end_tick(bars * 1920);
    for _ in 0..rng.gen_range(0..120) {
        let step = rng.gen_range(0..bars * 16);
        let len = rng.gen_range(1..12);
        let pitch = rng.gen_range(40..90);
        let track = rng.gen_range(0..3);
        b = b.note(NoteEvent::new(pitch, step * 120, len * 120, 90, track).unwrap());
    }
    for _ in 0..rng.gen_range(0..4) {
        let bar = rng.gen_range(1..bars);
        b = b.tempo_bpm(bar * 1920, rng.gen_range(40.0..200.0));
    }
    b.build().unwrap()
}
