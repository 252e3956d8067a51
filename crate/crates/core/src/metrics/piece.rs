//! Metrics of a single piano roll.

use std::collections::BTreeSet;

use crate::codec::{decode, PianoRoll};
use crate::model::PITCH_COUNT;
use crate::scalar::Scalar;

use super::MetricError;

/// Minor second, tritone and major seventh, taken modulo the octave.
pub fn is_dissonant(interval: u32) -> bool {
    matches!(interval % 12, 1 | 6 | 11)
}

/// Share of dissonant intervals among all pairs of simultaneous pitches.
pub fn dissonant_ratio<T: Scalar>(chord: &[u8]) -> Result<T, MetricError> {
    let v = chord.len();
    if v < 2 {
        return Err(MetricError::FewerThanTwoVoices(v));
    }
    let mut dissonant = 0;
    for (i, &a) in chord.iter().enumerate() {
        for &b in &chord[i + 1..] {
            if is_dissonant(u32::from(a.abs_diff(b))) {
                dissonant += 1;
            }
        }
    }
    Ok(T::ratio(dissonant, v * (v - 1) / 2))
}

/// Dissonant ratio of every step that sounds at least two distinct pitches.
pub fn piece_dissonant_values<T: Scalar>(roll: &PianoRoll) -> Vec<T> {
    roll.step_pitch_sets()
        .into_iter()
        .filter(|set| set.len() >= 2)
        .map(|set| {
            let chord: Vec<u8> = set.into_iter().collect();
            dissonant_ratio(&chord).expect("two or more pitches")
        })
        .collect()
}

/// Mean of [`piece_dissonant_values`], if the roll has any chord.
pub fn piece_dissonant_ratio<T: Scalar>(roll: &PianoRoll) -> Option<T> {
    let values: Vec<T> = piece_dissonant_values(roll);
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    Some(values.into_iter().fold(T::zero(), |acc, v| acc + v) / T::from_count(n))
}

/// Silent cells over all cells.
pub fn silent_ratio<T: Scalar>(roll: &PianoRoll) -> T {
    let cells = roll.grid().cells();
    let silent = cells.iter().filter(|&&c| c == 0).count();
    T::ratio(silent, cells.len().max(1))
}

/// Distinct sounding pitches over the 128 available.
pub fn variety_ratio<T: Scalar>(roll: &PianoRoll) -> T {
    let used: BTreeSet<u8> = roll.resolved_pitches().into_iter().flatten().collect();
    T::ratio(used.len(), PITCH_COUNT as usize)
}

/// Distinct non-silent step pitch sets over the number of steps.
pub fn variety_score<T: Scalar>(roll: &PianoRoll) -> T {
    let sets = roll.step_pitch_sets();
    let steps = sets.len().max(1);
    let unique: BTreeSet<BTreeSet<u8>> = sets.into_iter().filter(|s| !s.is_empty()).collect();
    T::ratio(unique.len(), steps)
}

/// Hold cells over non-silent cells; 0 for a silent roll.
pub fn length_variety_ratio<T: Scalar>(roll: &PianoRoll) -> T {
    let (mut held, mut sounding) = (0, 0);
    for &c in roll.grid().cells() {
        if c != 0 {
            sounding += 1;
            if roll.is_hold(c) {
                held += 1;
            }
        }
    }
    if sounding == 0 {
        return T::zero();
    }
    T::ratio(held, sounding)
}

/// Mean decoded note length in steps, if the roll has any note.
pub fn avg_note_length<T: Scalar>(roll: &PianoRoll) -> Option<T> {
    let slice = decode(roll);
    let notes = slice.notes();
    if notes.is_empty() {
        return None;
    }
    let total: usize = notes.iter().map(|n| n.length as usize).sum();
    Some(T::ratio(total, notes.len()))
}
