use std::collections::BTreeSet;
use std::path::Path;

use medley_core::io::{parse_midi, parse_mxl};
use medley_core::transitions::{
    extract_annotations, extract_transitions, BarLabel, Blacklist, ExtractConfig, ExtractError,
};
use medley_core::TransitionPoint;
use rayon::prelude::*;

use super::{outcome, report_failures, Failure};
use crate::error::CliError;
use crate::files::{pair_inputs, read_bytes, write_jsonl, InputPair};
use crate::{Context, Outcome};

pub fn load_blacklist(path: Option<&Path>) -> Result<Blacklist, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Ok(Blacklist::parse(&text))
        }
        None => Ok(Blacklist::default()),
    }
}

struct PairResult {
    transitions: Vec<TransitionPoint>,
    candidates: Vec<BarLabel>,
}

fn process(
    pair: &InputPair,
    blacklist: &Blacklist,
    config: &ExtractConfig,
) -> Result<PairResult, Failure> {
    let fail =
        |path: &Path, reason: &str, msg: String| Failure::new(&pair.song_id, path, reason, msg);
    let score_bytes =
        read_bytes(&pair.score).map_err(|e| fail(&pair.score, "io", e.to_string()))?;
    let doc =
        parse_mxl(&score_bytes).map_err(|e| fail(&pair.score, "score_parse", e.to_string()))?;
    let midi_bytes = read_bytes(&pair.midi).map_err(|e| fail(&pair.midi, "io", e.to_string()))?;
    let song = parse_midi(&midi_bytes)
        .map_err(|e| fail(&pair.midi, "midi_parse", e.to_string()))?
        .song
        .with_id(pair.song_id.clone());

    let extraction = extract_transitions(&doc, &song, blacklist, config).map_err(|e| {
        let reason = match e {
            ExtractError::AlignmentMismatch { .. } => "alignment_mismatch",
            ExtractError::BarOutOfRange(_) => "bar_out_of_range",
        };
        fail(&pair.score, reason, e.to_string())
    })?;
    for w in &extraction.warnings {
        eprintln!("warning: {}: {w:?}", pair.song_id);
    }
    let candidates: BTreeSet<u32> = extract_annotations(&doc)
        .into_iter()
        .map(|(bar, _)| bar)
        .collect();
    Ok(PairResult {
        transitions: extraction.transitions,
        candidates: candidates
            .into_iter()
            .map(|bar_real| BarLabel {
                song_id: pair.song_id.clone(),
                bar_real,
            })
            .collect(),
    })
}

pub fn extract(
    ctx: &Context,
    input: &Path,
    out: &Path,
    failures_path: Option<&Path>,
    candidates_path: Option<&Path>,
) -> Result<Outcome, CliError> {
    let pairing = pair_inputs(input)?;
    for path in &pairing.unpaired {
        eprintln!(
            "warning: {} has no counterpart and is skipped",
            path.display()
        );
    }
    if pairing.pairs.is_empty() {
        return Err(CliError::NoInputFiles(input.to_path_buf()));
    }
    let blacklist = load_blacklist(ctx.settings.blacklist.as_deref())?;
    let config = ExtractConfig {
        epsilon_seconds: ctx.settings.epsilon_seconds,
        ..ExtractConfig::default()
    };

    let results: Vec<Result<PairResult, Failure>> = ctx.pool.install(|| {
        pairing
            .pairs
            .par_iter()
            .map(|pair| process(pair, &blacklist, &config))
            .collect()
    });

    let mut transitions = Vec::new();
    let mut candidates = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(r) => {
                transitions.extend(r.transitions);
                candidates.extend(r.candidates);
            }
            Err(f) => failures.push(f),
        }
    }
    transitions.sort_by(|a, b| (&a.song_id, a.bar_real).cmp(&(&b.song_id, b.bar_real)));

    write_jsonl(out, &transitions)?;
    if let Some(p) = candidates_path {
        write_jsonl(p, &candidates)?;
    }
    if let Some(p) = failures_path {
        write_jsonl(p, &failures)?;
    }
    report_failures(&failures);
    eprintln!(
        "{} transitions from {} medleys ({} failed)",
        transitions.len(),
        pairing.pairs.len() - failures.len(),
        failures.len()
    );
    outcome(pairing.pairs.len(), failures.len())
}
