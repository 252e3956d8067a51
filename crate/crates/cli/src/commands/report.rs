//! Metric scoring, corpus statistics and label validation.

use std::path::Path;

use medley_core::metrics::{score_rolls, Metric, NormalizeConfig};
use medley_core::stats::{
    corpus_summary, instrumentation_csv, instrumentation_distribution, medley_summary,
    transition_note_histogram,
};
use medley_core::transitions::{evaluate_labels, BarLabel, ConfusionMatrix, LabelEvaluation};
use medley_core::{MetricReport, TransitionSample};
use rayon::prelude::*;
use serde::Serialize;

use super::{outcome, report_failures, Failure};
use crate::error::CliError;
use crate::files::{load_rolls, load_song, midi_index, read_jsonl, stem, write_jsonl, write_text};
use crate::{Context, Outcome};

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum MetricLine {
    Report(MetricReport),
    Error { metric: Metric, error: String },
}

pub fn metrics(
    ctx: &Context,
    generated: &Path,
    reference: &Path,
    names: &[String],
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let selected: Vec<Metric> = if names.is_empty() {
        Metric::ALL.to_vec()
    } else {
        names
            .iter()
            .map(|n| n.parse().map_err(|e| CliError::Usage(format!("{e}"))))
            .collect::<Result<_, _>>()?
    };
    let strip = |v: Vec<(std::path::PathBuf, _)>| v.into_iter().map(|(_, r)| r).collect::<Vec<_>>();
    let gen = strip(load_rolls(generated)?);
    let reference_rolls = strip(load_rolls(reference)?);
    if gen.is_empty() {
        return Err(CliError::NoInputFiles(generated.to_path_buf()));
    }
    if reference_rolls.is_empty() {
        return Err(CliError::NoInputFiles(reference.to_path_buf()));
    }
    let config = NormalizeConfig {
        n_splits: ctx.settings.n_splits,
        seed: ctx.settings.seed,
    };
    let lines: Vec<MetricLine> = ctx.pool.install(|| {
        selected
            .par_iter()
            .map(
                |&metric| match score_rolls::<f64>(metric, &gen, &reference_rolls, config) {
                    Ok(report) => MetricLine::Report(report),
                    Err(e) => MetricLine::Error {
                        metric,
                        error: e.to_string(),
                    },
                },
            )
            .collect()
    });
    let failed = lines
        .iter()
        .filter(|l| matches!(l, MetricLine::Error { .. }))
        .count();
    for l in &lines {
        if let MetricLine::Error { metric, error } = l {
            eprintln!("warning: {metric}: {error}");
        }
    }
    match out {
        Some(p) => write_jsonl(p, &lines)?,
        None => print!("{}", crate::files::jsonl_string(&lines)),
    }
    outcome(selected.len(), failed)
}

pub fn stats(
    ctx: &Context,
    midi_dir: &Path,
    samples: Option<&Path>,
    out_dir: &Path,
) -> Result<Outcome, CliError> {
    let paths: Vec<_> = midi_index(midi_dir)?.into_values().collect();
    if paths.is_empty() {
        return Err(CliError::NoInputFiles(midi_dir.to_path_buf()));
    }
    let loaded: Vec<_> = ctx.pool.install(|| {
        paths
            .par_iter()
            .map(|p| load_song(p).map_err(|e| Failure::new(&stem(p), p, "midi_parse", e)))
            .collect()
    });
    let mut songs = Vec::new();
    let mut failures = Vec::new();
    for r in loaded {
        match r {
            Ok(s) => songs.push(s),
            Err(f) => failures.push(f),
        }
    }
    report_failures(&failures);
    if songs.is_empty() {
        return Err(CliError::AllFailed(paths.len()));
    }

    let summaries: Vec<_> = songs.iter().map(medley_summary).collect();
    let corpus = corpus_summary(&summaries).map_err(|e| CliError::input(midi_dir, e))?;
    write_jsonl(&out_dir.join("medleys.jsonl"), &summaries)?;
    let corpus_json = serde_json::to_string_pretty(&corpus).expect("summary serializes");
    write_text(&out_dir.join("corpus.json"), &(corpus_json + "\n"))?;
    let instruments =
        instrumentation_distribution::<f64>(&songs).map_err(|e| CliError::input(midi_dir, e))?;
    write_text(
        &out_dir.join("instrumentation.csv"),
        &instrumentation_csv(&instruments),
    )?;
    println!("{}", corpus.report_line());

    if let Some(dir) = samples {
        let samples: Vec<TransitionSample> = load_rolls(dir)?
            .into_iter()
            .map(|(path, roll)| TransitionSample {
                grid: roll.into_grid(),
                tempo_bpm: 0.0,
                song_id: stem(&path),
                bar_offset: 0,
            })
            .collect();
        let hist = transition_note_histogram(&samples).map_err(|e| CliError::input(dir, e))?;
        write_text(&out_dir.join("note_counts.csv"), &hist.to_csv())?;
        if let Some(min) = hist.min_note_count() {
            println!(
                "{} transition samples, fewest target-bar onsets: {min}",
                hist.samples()
            );
        }
    }
    outcome(paths.len(), failures.len())
}

fn percent(value: Option<f64>) -> String {
    value.map_or_else(|| "undefined".to_string(), |v| format!("{:.2}%", v * 100.0))
}

pub fn validate(
    ctx: &Context,
    predicted: Option<&Path>,
    truth: Option<&Path>,
    candidates: Option<&Path>,
    counts: Option<&Path>,
) -> Result<Outcome, CliError> {
    let evaluation: LabelEvaluation = match (predicted, truth, counts) {
        (_, _, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let matrix: ConfusionMatrix =
                serde_json::from_str(&text).map_err(|e| CliError::input(path, e))?;
            matrix.into()
        }
        (Some(pred), Some(truth), None) => {
            let p: Vec<BarLabel> = read_jsonl(pred)?;
            let t: Vec<BarLabel> = read_jsonl(truth)?;
            let c: Vec<BarLabel> = match candidates {
                Some(path) => read_jsonl(path)?,
                None => Vec::new(),
            };
            evaluate_labels(&p, &t, ctx.settings.window_bars, &c)
        }
        _ => {
            return Err(CliError::Usage(
                "validate needs --counts or both --predicted and --truth".into(),
            ))
        }
    };
    println!(
        "{}",
        serde_json::to_string(&evaluation).expect("evaluation serializes")
    );
    eprintln!(
        "precision {} recall {}",
        percent(evaluation.precision),
        percent(evaluation.recall)
    );
    Ok(Outcome::Success)
}
