//! Descriptive statistics of medley corpora and transition samples.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::metrics::Histogram;
use crate::model::{Song, Symbol, TransitionSample, STEPS_PER_BAR};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("corpus is empty")]
    EmptyCorpus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedleySummary {
    pub song_id: String,
    pub duration_minutes: f64,
    pub key_change_count: usize,
    pub tempo_change_count: usize,
    pub instrument_count: usize,
}

/// General MIDI programs used by a song. A track that plays notes without
/// ever selecting a program uses the default program 0.
pub fn programs_of(song: &Song) -> BTreeSet<u8> {
    let mut programs: BTreeSet<u8> = song.programs().iter().map(|p| p.program).collect();
    let with_program: BTreeSet<usize> = song.programs().iter().map(|p| p.track).collect();
    if song
        .notes()
        .iter()
        .any(|n| !with_program.contains(&n.track))
    {
        programs.insert(0);
    }
    programs
}

pub fn medley_summary(song: &Song) -> MedleySummary {
    MedleySummary {
        song_id: song.id().to_string(),
        duration_minutes: song.duration_seconds() / 60.0,
        key_change_count: song.key_signatures().iter().filter(|k| k.tick > 0).count(),
        tempo_change_count: song.tempo_map().iter().filter(|t| t.tick > 0).count(),
        instrument_count: programs_of(song).len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub medleys: usize,
    pub mean_duration_minutes: f64,
    pub mean_key_changes: f64,
    pub mean_tempo_changes: f64,
    pub mean_instruments: f64,
}

pub fn corpus_summary(summaries: &[MedleySummary]) -> Result<CorpusSummary, StatsError> {
    if summaries.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let n = summaries.len() as f64;
    let mean = |f: &dyn Fn(&MedleySummary) -> f64| summaries.iter().map(f).sum::<f64>() / n;
    Ok(CorpusSummary {
        medleys: summaries.len(),
        mean_duration_minutes: mean(&|s| s.duration_minutes),
        mean_key_changes: mean(&|s| s.key_change_count as f64),
        mean_tempo_changes: mean(&|s| s.tempo_change_count as f64),
        mean_instruments: mean(&|s| s.instrument_count as f64),
    })
}

impl CorpusSummary {
    /// One-line report, e.g. `20 medleys, 17.47 key changes and 9.99 tempo
    /// changes on average, 7.65 instruments`.
    pub fn report_line(&self) -> String {
        format!(
            "{} medleys, {:.2} minutes, {:.2} key changes and {:.2} tempo changes on average, {:.2} instruments",
            self.medleys,
            self.mean_duration_minutes,
            self.mean_key_changes,
            self.mean_tempo_changes,
            self.mean_instruments
        )
    }
}

/// Fraction of songs that use each of the 128 programs, highest first
/// (ties by program number).
pub fn instrumentation_distribution<T: Scalar>(songs: &[Song]) -> Result<Vec<(u8, T)>, StatsError> {
    if songs.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let mut counts = [0usize; 128];
    for song in songs {
        for p in programs_of(song) {
            counts[usize::from(p)] += 1;
        }
    }
    let mut order: Vec<u8> = (0..128).collect();
    order.sort_by_key(|&p| (std::cmp::Reverse(counts[usize::from(p)]), p));
    Ok(order
        .into_iter()
        .map(|p| (p, T::ratio(counts[usize::from(p)], songs.len())))
        .collect())
}

pub fn instrumentation_csv<T: Scalar>(rows: &[(u8, T)]) -> String {
    let mut out = String::from("program,probability\n");
    for (p, prob) in rows {
        let _ = writeln!(out, "{p},{}", prob.as_f64());
    }
    out
}

/// Onset cells in the target bars of a sample.
pub fn target_onsets(sample: &TransitionSample) -> usize {
    let grid = &sample.grid;
    let range = TransitionSample::target_bars();
    let steps = range.start * STEPS_PER_BAR..(range.end * STEPS_PER_BAR).min(grid.steps());
    steps
        .flat_map(|t| grid.step_cells(t).iter())
        .filter(|&&c| matches!(Symbol::classify(c), Ok(Symbol::Onset(_))))
        .count()
}

/// How many samples have each number of target-bar onsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NoteCountHistogram {
    pub counts: BTreeMap<usize, usize>,
}

impl NoteCountHistogram {
    pub fn samples(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn min_note_count(&self) -> Option<usize> {
        self.counts.keys().next().copied()
    }

    pub fn to_histogram<T: Scalar>(&self) -> Histogram<T> {
        let n = self.samples();
        Histogram::from_weighted(
            self.counts
                .iter()
                .map(|(&k, &c)| (T::from_count(k), T::ratio(c, n))),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("note_count,frequency\n");
        for (k, c) in &self.counts {
            let _ = writeln!(out, "{k},{c}");
        }
        out
    }
}

pub fn transition_note_histogram(
    samples: &[TransitionSample],
) -> Result<NoteCountHistogram, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let mut counts = BTreeMap::new();
    for s in samples {
        *counts.entry(target_onsets(s)).or_default() += 1;
    }
    Ok(NoteCountHistogram { counts })
}
