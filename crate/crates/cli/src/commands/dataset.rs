//! Filtering, encoding, decoding and augmenting transition samples.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use medley_core::augment::{horizontal_windows, transpose_roll, MAX_SHIFT};
use medley_core::codec::{
    decode as decode_roll, encode as encode_slice, write_csv, write_mdlr, NoteSlice, Scheme,
};
use medley_core::filter::{filter_transitions, slice_sample, FilterConfig};
use medley_core::{Song, TransitionPoint};
use rayon::prelude::*;
use serde::Serialize;

use super::{file_name, outcome, report_failures, Failure};
use crate::error::CliError;
use crate::files::{
    load_rolls, load_song, midi_index, read_jsonl, stem, write_bytes, write_jsonl, write_text,
};
use crate::{Context, Outcome};

/// Transitions grouped by song, in song id order.
fn by_song(transitions: Vec<TransitionPoint>) -> BTreeMap<String, Vec<TransitionPoint>> {
    let mut out: BTreeMap<String, Vec<TransitionPoint>> = BTreeMap::new();
    for tp in transitions {
        out.entry(tp.song_id.clone()).or_default().push(tp);
    }
    out
}

/// Loads the MIDI file of `song_id` from `index`.
fn song_for(index: &BTreeMap<String, PathBuf>, dir: &Path, song_id: &str) -> Result<Song, Failure> {
    let path = index
        .get(song_id)
        .ok_or_else(|| Failure::new(song_id, dir, "missing_midi", "no MIDI file with this stem"))?;
    load_song(path).map_err(|e| Failure::new(song_id, path, "midi_parse", e))
}

#[derive(Debug, Serialize)]
struct AuditRecord {
    song_id: String,
    bar_real: u32,
    bar_offset: u32,
    reason: String,
}

pub fn filter(
    ctx: &Context,
    transitions: &Path,
    midi_dir: &Path,
    out: &Path,
    audit: Option<&Path>,
) -> Result<Outcome, CliError> {
    let groups = by_song(read_jsonl(transitions)?);
    let index = midi_index(midi_dir)?;
    let config = FilterConfig {
        tempo_tolerance_bpm: ctx.settings.tempo_tolerance_bpm,
        vivid_mode: ctx.settings.vivid_mode,
        ..FilterConfig::default()
    };
    let groups: Vec<(String, Vec<TransitionPoint>)> = groups.into_iter().collect();
    let results: Vec<_> = ctx.pool.install(|| {
        groups
            .par_iter()
            .map(|(id, tps)| {
                song_for(&index, midi_dir, id).map(|song| filter_transitions(&song, tps, &config))
            })
            .collect()
    });

    let mut kept = Vec::new();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for ((id, tps), result) in groups.iter().zip(results) {
        match result {
            Ok(o) => {
                kept.extend(o.kept);
                records.extend(o.skipped.into_iter().map(|s| {
                    AuditRecord {
                        song_id: s.song_id,
                        bar_real: s.bar_real,
                        bar_offset: s.bar_offset,
                        reason: serde_json::to_value(s.reason)
                            .ok()
                            .and_then(|v| v.as_str().map(String::from))
                            .unwrap_or_default(),
                    }
                }));
            }
            Err(f) => {
                records.extend(tps.iter().map(|tp| AuditRecord {
                    song_id: id.clone(),
                    bar_real: tp.bar_real,
                    bar_offset: tp.bar_offset,
                    reason: f.reason.clone(),
                }));
                failures.push(f);
            }
        }
    }
    write_jsonl(out, &kept)?;
    if let Some(p) = audit {
        write_jsonl(p, &records)?;
    }
    report_failures(&failures);
    eprintln!("kept {} transitions, skipped {}", kept.len(), records.len());
    if groups.is_empty() {
        return Ok(Outcome::Success);
    }
    outcome(groups.len(), failures.len())
}

/// A decoded roll, one line of `slices.jsonl` or of the decode output.
#[derive(Debug, Serialize)]
struct SliceRecord<'a> {
    file: String,
    #[serde(flatten)]
    slice: &'a NoteSlice,
}

#[derive(Debug, Serialize)]
struct IndexRecord {
    file: String,
    song_id: String,
    bar_real: u32,
    bar_offset: u32,
    tempo_bpm: f64,
    voices: usize,
    scheme: &'static str,
    /// Notes that were cut for lack of voices.
    overflow: usize,
}

struct Encoded {
    index: IndexRecord,
    slice: NoteSlice,
    roll_bytes: Vec<u8>,
    csv: Option<String>,
}

fn encode_one(
    song: &Song,
    tp: &TransitionPoint,
    voices: usize,
    scheme: Scheme,
    csv: bool,
) -> Result<Encoded, Failure> {
    let file = format!("{}_{:04}.mdlr", tp.song_id, tp.bar_offset);
    let slice = slice_sample(song, tp.bar_offset)
        .map_err(|e| Failure::new(&tp.song_id, Path::new(&file), "slice", e))?;
    let encoded = encode_slice(&slice, voices, scheme)
        .map_err(|e| Failure::new(&tp.song_id, Path::new(&file), "encode", e))?;
    let tick = song.bar_grid().start(tp.bar_offset as usize).unwrap_or(0);
    Ok(Encoded {
        index: IndexRecord {
            file,
            song_id: tp.song_id.clone(),
            bar_real: tp.bar_real,
            bar_offset: tp.bar_offset,
            tempo_bpm: song.bpm_at(tick),
            voices,
            scheme: scheme.name(),
            overflow: encoded.overflow.len(),
        },
        roll_bytes: write_mdlr(&encoded.roll),
        csv: csv.then(|| write_csv(&encoded.roll)),
        slice,
    })
}

pub fn encode(
    ctx: &Context,
    transitions: &Path,
    midi_dir: &Path,
    out_dir: &Path,
    voices: usize,
    scheme: Scheme,
    csv: bool,
) -> Result<Outcome, CliError> {
    if voices == 0 {
        return Err(CliError::Usage("--voices must be at least 1".into()));
    }
    let groups: Vec<(String, Vec<TransitionPoint>)> =
        by_song(read_jsonl(transitions)?).into_iter().collect();
    let index = midi_index(midi_dir)?;
    let results: Vec<Vec<Result<Encoded, Failure>>> = ctx.pool.install(|| {
        groups
            .par_iter()
            .map(|(id, tps)| match song_for(&index, midi_dir, id) {
                Ok(song) => tps
                    .iter()
                    .map(|tp| encode_one(&song, tp, voices, scheme, csv))
                    .collect(),
                Err(f) => vec![Err(f)],
            })
            .collect()
    });

    let mut index_records = Vec::new();
    let mut slice_lines = String::new();
    let mut failures = Vec::new();
    let mut attempted = 0;
    for r in results.into_iter().flatten() {
        attempted += 1;
        match r {
            Ok(e) => {
                write_bytes(&out_dir.join(&e.index.file), &e.roll_bytes)?;
                if let Some(text) = &e.csv {
                    write_text(
                        &out_dir
                            .join("csv")
                            .join(e.index.file.replace(".mdlr", ".csv")),
                        text,
                    )?;
                }
                let rec = SliceRecord {
                    file: e.index.file.clone(),
                    slice: &e.slice,
                };
                slice_lines.push_str(&serde_json::to_string(&rec).expect("slices serialize"));
                slice_lines.push('\n');
                index_records.push(e.index);
            }
            Err(f) => failures.push(f),
        }
    }
    write_jsonl(&out_dir.join("index.jsonl"), &index_records)?;
    write_text(&out_dir.join("slices.jsonl"), &slice_lines)?;
    write_jsonl(&out_dir.join("failures.jsonl"), &failures)?;
    report_failures(&failures);
    eprintln!(
        "encoded {} samples into {}",
        index_records.len(),
        out_dir.display()
    );
    if attempted == 0 {
        return Ok(Outcome::Success);
    }
    outcome(attempted, failures.len())
}

pub fn decode(input: &Path, out: &Path) -> Result<Outcome, CliError> {
    let rolls = if input.is_dir() {
        load_rolls(input)?
    } else {
        let dir = input.parent().unwrap_or(Path::new("."));
        load_rolls(dir)?
            .into_iter()
            .filter(|(p, _)| p.file_name() == input.file_name())
            .collect()
    };
    if rolls.is_empty() {
        return Err(CliError::NoInputFiles(input.to_path_buf()));
    }
    let mut text = String::new();
    for (path, roll) in &rolls {
        let slice = decode_roll(roll);
        let rec = SliceRecord {
            file: file_name(path),
            slice: &slice,
        };
        text.push_str(&serde_json::to_string(&rec).expect("slices serialize"));
        text.push('\n');
    }
    write_text(out, &text)?;
    Ok(Outcome::Success)
}

#[derive(Debug, Serialize)]
struct AugmentRecord {
    source: String,
    file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    shift: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_bar: Option<usize>,
}

pub fn augment(
    ctx: &Context,
    rolls: Option<&Path>,
    midi_dir: Option<&Path>,
    width: usize,
    voices: usize,
    out_dir: &Path,
) -> Result<Outcome, CliError> {
    if rolls.is_none() && midi_dir.is_none() {
        return Err(CliError::Usage(
            "augment needs --rolls and/or --midi-dir".into(),
        ));
    }
    if voices == 0 {
        return Err(CliError::Usage("--voices must be at least 1".into()));
    }
    let mut manifest = Vec::new();
    let mut failures = Vec::new();
    let mut attempted = 0;

    if let Some(dir) = rolls {
        for (path, roll) in load_rolls(dir)? {
            attempted += 1;
            let source = file_name(&path);
            for k in (-MAX_SHIFT..=MAX_SHIFT).filter(|&k| k != 0) {
                let shifted = transpose_roll(&roll, k).map_err(|e| CliError::input(&path, e))?;
                if let Some(variant) = shifted {
                    let file = format!("{}_t{k:+}.mdlr", stem(&path));
                    write_bytes(&out_dir.join(&file), &write_mdlr(&variant))?;
                    manifest.push(AugmentRecord {
                        source: source.clone(),
                        file,
                        shift: Some(k),
                        first_bar: None,
                    });
                }
            }
        }
    }

    if let Some(dir) = midi_dir {
        let songs: Vec<PathBuf> = midi_index(dir)?.into_values().collect();
        let results: Vec<_> = ctx.pool.install(|| {
            songs
                .par_iter()
                .map(|path| {
                    let id = stem(path);
                    let song =
                        load_song(path).map_err(|e| Failure::new(&id, path, "midi_parse", e))?;
                    let windows = horizontal_windows(&song, width)
                        .map_err(|e| Failure::new(&id, path, "too_short", e))?;
                    windows
                        .iter()
                        .enumerate()
                        .map(|(i, w)| {
                            encode_slice(w, voices, Scheme::Doubled)
                                .map(|enc| (i + 1, write_mdlr(&enc.roll)))
                                .map_err(|e| Failure::new(&id, path, "encode", e))
                        })
                        .collect::<Result<Vec<_>, _>>()
                        .map(|rolls| (path.clone(), rolls))
                })
                .collect()
        });
        for r in results {
            attempted += 1;
            match r {
                Ok((path, rolls)) => {
                    for (first_bar, bytes) in rolls {
                        let file = format!("{}_w{first_bar:04}.mdlr", stem(&path));
                        write_bytes(&out_dir.join(&file), &bytes)?;
                        manifest.push(AugmentRecord {
                            source: file_name(&path),
                            file,
                            shift: None,
                            first_bar: Some(first_bar),
                        });
                    }
                }
                Err(f) => failures.push(f),
            }
        }
    }

    write_jsonl(&out_dir.join("augment.jsonl"), &manifest)?;
    report_failures(&failures);
    eprintln!("wrote {} augmented rolls", manifest.len());
    if attempted == 0 {
        return Err(CliError::NoInputFiles(
            rolls
                .or(midi_dir)
                .map(Path::to_path_buf)
                .unwrap_or_default(),
        ));
    }
    outcome(attempted, failures.len())
}
