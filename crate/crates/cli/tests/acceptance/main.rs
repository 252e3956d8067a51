//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the criterion lines always reach the
//! console. Exits non-zero if any criterion fails.

mod gen;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use medley_core::augment::{transpose, valid_shift_count, vertical_variants, MAX_SHIFT};
use medley_core::codec::{
    decode, encode, normalize_holds, write_mdlr, NoteSlice, PianoRoll, Scheme, SliceNote,
    LEGACY_HOLD,
};
use medley_core::filter::{build_sample, is_vivid, FilterConfig};
use medley_core::io::parse_midi;
use medley_core::metrics::{
    avg_note_length, corpus_features, normalized_score, piece_dissonant_values, repetition_score,
    score_rolls, silent_ratio, total_variation, variety_score, wasserstein_1d, Categorical,
    Histogram, Metric, NormalizeConfig, ReportStatus,
};
use medley_core::model::{Grid, RollShape, HOLD_OFFSET};
use medley_core::stats::target_onsets;
use medley_core::transitions::{evaluate_labels, BarLabel, ConfusionMatrix, LabelEvaluation};
use medley_core::{Song, TransitionPoint, TransitionSample};
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use num_rational::Rational64;
use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use fixture::MedleySpec;

type Q = Rational64;
type Outcome = Result<String, String>;
type Criterion = (&'static str, fn(&Env) -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn q(n: usize, d: usize) -> Q {
    Q::new(n as i64, d as i64)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shared scratch space: the synthetic corpus and CLI outputs.
struct Env {
    _tmp: tempfile::TempDir,
    root: PathBuf,
    specs: Vec<MedleySpec>,
}

impl Env {
    fn new() -> Self {
        let tmp = tempfile::tempdir().unwrap();
        let root = tmp.path().to_path_buf();
        let specs = fixture::corpus();
        std::fs::create_dir_all(root.join("corpus")).unwrap();
        fixture::write_corpus(&root.join("corpus"), &specs);
        Env {
            _tmp: tmp,
            root,
            specs,
        }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    fn p(&self, rel: &str) -> String {
        self.path(rel).display().to_string()
    }

    fn song(&self, spec: &MedleySpec) -> Song {
        let bytes = std::fs::read(self.path("corpus").join(format!("{}.mid", spec.id))).unwrap();
        parse_midi(&bytes).unwrap().song.with_id(spec.id.clone())
    }
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
    elapsed: Duration,
}

fn medley(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_medley"))
        .args(args)
        .env_remove("MEDLEY_SEED")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        elapsed: start.elapsed(),
    }
}

fn run_ok(args: &[&str]) -> Result<Run, String> {
    let r = medley(args);
    ensure!(
        r.code == 0,
        "medley {} exited {}: {}",
        args.join(" "),
        r.code,
        r.stderr
    );
    Ok(r)
}

fn jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Vec<T> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// 1 ----------------------------------------------------------------------

fn criterion_1(env: &Env) -> Outcome {
    let counts = ConfusionMatrix {
        tp: 117,
        fp: 12,
        fn_: 88,
        tn: 4370,
    };
    let start = Instant::now();
    let eval = LabelEvaluation::from(counts);
    let elapsed = start.elapsed();
    let (p, r) = (
        eval.precision.unwrap() * 100.0,
        eval.recall.unwrap() * 100.0,
    );
    ensure!(
        close(p, 90.70, 0.01) && close(r, 57.07, 0.01),
        "precision {p:.4}% recall {r:.4}%"
    );
    ensure!(elapsed < Duration::from_millis(1), "took {elapsed:?}");

    // the same matrix from labels: 205 true bars, 117 of them predicted,
    // 12 spurious predictions and 4370 untouched candidates
    let label = |bar: u32| BarLabel {
        song_id: "m".into(),
        bar_real: bar,
    };
    let truth: Vec<_> = (0..205).map(label).collect();
    let predicted: Vec<_> = (0..117).chain(1000..1012).map(label).collect();
    let candidates: Vec<_> = (0..205).chain(2000..6370).map(label).collect();
    let from_labels = evaluate_labels(&predicted, &truth, 0, &candidates);
    ensure!(
        from_labels.matrix == counts,
        "labels gave {:?}",
        from_labels.matrix
    );

    let counts_file = env.path("counts.json");
    std::fs::write(&counts_file, r#"{"tp":117,"fp":12,"fn":88,"tn":4370}"#).unwrap();
    let run = run_ok(&["validate", "--counts", &counts_file.display().to_string()])?;
    let v: Value = serde_json::from_str(run.stdout.trim()).map_err(|e| e.to_string())?;
    let cli_p = v["precision"].as_f64().unwrap_or(f64::NAN);
    let cli_r = v["recall"].as_f64().unwrap_or(f64::NAN);
    ensure!(
        close(cli_p, 0.90698, 1e-5) && close(cli_r, 0.57073, 1e-5),
        "CLI printed {}",
        run.stdout
    );
    ensure!(
        run.stderr.contains("90.70%") && run.stderr.contains("57.07%"),
        "CLI summary {}",
        run.stderr
    );
    Ok(format!("precision {p:.2}%, recall {r:.2}% in {elapsed:?}"))
}

// 2 ----------------------------------------------------------------------

fn criterion_2(_: &Env) -> Outcome {
    let slice = NoteSlice::new(
        1,
        vec![SliceNote {
            start: 0,
            pitch: 72,
            length: 2,
        }],
    )
    .unwrap();
    let doubled = encode(&slice, 1, Scheme::Doubled).unwrap().roll;
    let legacy = encode(&slice, 1, Scheme::Legacy).unwrap().roll;
    let d = &doubled.grid().cells()[..2];
    let l = &legacy.grid().cells()[..2];
    ensure!(d == [72, 200], "doubled {d:?}");
    ensure!(l == [72, 129], "legacy {l:?}");
    ensure!(72 + HOLD_OFFSET == 200 && LEGACY_HOLD == 129, "constants");
    ensure!(
        decode(&doubled) == slice && decode(&legacy) == slice,
        "round trip"
    );
    Ok("doubled [72, 200], legacy [72, 129]".into())
}

// 3 ----------------------------------------------------------------------

fn expected_record(spec: &MedleySpec, p: &fixture::Planted) -> TransitionPoint {
    let at_start = spec.notes_at_bar_start();
    TransitionPoint {
        song_id: spec.id.clone(),
        text: p.text.clone(),
        bar_real: p.bar_real,
        bar_offset: p.bar_offset,
        time_seconds: spec.bar_start_seconds(p.bar_offset),
        notes_during: at_start,
        avg_note_length_seconds: spec.avg_length_at(p.bar_offset),
        notes_before_bar: at_start + 3,
        notes_after_bar: at_start + 3,
        half_bar_starts: [at_start + 1, 2, at_start + 1, 2],
    }
}

fn records_match(got: &TransitionPoint, want: &TransitionPoint) -> bool {
    got.song_id == want.song_id
        && got.text == want.text
        && got.bar_real == want.bar_real
        && got.bar_offset == want.bar_offset
        && close(got.time_seconds, want.time_seconds, 1e-6)
        && got.notes_during == want.notes_during
        && close(
            got.avg_note_length_seconds,
            want.avg_note_length_seconds,
            1e-6,
        )
        && got.notes_before_bar == want.notes_before_bar
        && got.notes_after_bar == want.notes_after_bar
        && got.half_bar_starts == want.half_bar_starts
}

fn criterion_3(env: &Env) -> Outcome {
    let run = medley(&[
        "extract",
        "--input",
        &env.p("corpus"),
        "--out",
        &env.p("out/transitions.jsonl"),
        "--failures",
        &env.p("out/failures.jsonl"),
        "--candidates",
        &env.p("out/candidates.jsonl"),
    ]);
    ensure!(run.code == 0, "extract exited {}: {}", run.code, run.stderr);
    ensure!(
        run.elapsed < Duration::from_secs(10),
        "extract took {:?}",
        run.elapsed
    );
    ensure!(
        run.stderr.contains("orphan.mid"),
        "orphan file not reported"
    );
    let failures = std::fs::read_to_string(env.path("out/failures.jsonl")).unwrap();
    ensure!(failures.is_empty(), "failures: {failures}");

    let got: Vec<TransitionPoint> = jsonl(&env.path("out/transitions.jsonl"));
    let mut want: Vec<TransitionPoint> = env
        .specs
        .iter()
        .flat_map(|s| s.planted.iter().map(move |p| expected_record(s, p)))
        .collect();
    want.sort_by(|a, b| (&a.song_id, a.bar_real).cmp(&(&b.song_id, b.bar_real)));

    let key = |t: &TransitionPoint| (t.song_id.clone(), t.bar_real);
    let got_keys: BTreeSet<_> = got.iter().map(key).collect();
    let want_keys: BTreeSet<_> = want.iter().map(key).collect();
    let found = want_keys.intersection(&got_keys).count();
    let false_pos = got_keys.difference(&want_keys).count();
    ensure!(
        found == want_keys.len(),
        "recovered {found}/{}",
        want_keys.len()
    );
    ensure!(false_pos == 0, "{false_pos} false positives");
    ensure!(got.len() == want.len(), "duplicate records");
    for (g, w) in got.iter().zip(&want) {
        ensure!(
            records_match(g, w),
            "record mismatch:\n got {g:?}\nwant {w:?}"
        );
    }
    let repeated = got
        .iter()
        .find(|t| t.song_id == "medley_00" && t.bar_real == 23);
    ensure!(
        repeated.is_some_and(|t| t.bar_offset == 27),
        "bar 23 -> {repeated:?}"
    );

    // validation against the planted truth, decoy bars as negatives
    let truth: Vec<BarLabel> = want.iter().map(BarLabel::from).collect();
    let truth_path = env.path("out/truth.jsonl");
    std::fs::write(
        &truth_path,
        truth
            .iter()
            .map(|t| serde_json::to_string(t).unwrap() + "\n")
            .collect::<String>(),
    )
    .unwrap();
    let v = run_ok(&[
        "validate",
        "--predicted",
        &env.p("out/transitions.jsonl"),
        "--truth",
        &truth_path.display().to_string(),
        "--candidates",
        &env.p("out/candidates.jsonl"),
    ])?;
    let eval: Value = serde_json::from_str(v.stdout.trim()).map_err(|e| e.to_string())?;
    let decoys: usize = env.specs.iter().map(|s| s.decoys.len()).sum();
    ensure!(
        eval["precision"] == 1.0 && eval["recall"] == 1.0 && eval["tn"] == decoys as u64,
        "validate: {eval}"
    );

    // identical bytes regardless of worker count
    let first = std::fs::read(env.path("out/transitions.jsonl")).unwrap();
    for workers in ["1", "4"] {
        let out = env.path(&format!("out/transitions_w{workers}.jsonl"));
        run_ok(&[
            "--workers",
            workers,
            "extract",
            "--input",
            &env.p("corpus"),
            "--out",
            &out.display().to_string(),
        ])?;
        ensure!(
            std::fs::read(&out).unwrap() == first,
            "output differs with {workers} workers"
        );
    }
    Ok(format!(
        "{found}/{} planted transitions, 0 false positives, {decoys} decoys rejected, {:?}",
        want_keys.len(),
        run.elapsed
    ))
}

// 4 ----------------------------------------------------------------------

fn criterion_4(_: &Env) -> Outcome {
    let mut r = rng(4);
    let mut identity = 0;
    for i in 0..1000 {
        let voices = r.gen_range(1..=4);
        let bars = r.gen_range(1..=3);
        let scheme = if i % 2 == 0 {
            Scheme::Doubled
        } else {
            Scheme::Legacy
        };
        let s = gen::slice(&mut r, voices, bars, (1, 128), 5);
        let enc = encode(&s, voices, scheme).map_err(|e| e.to_string())?;
        ensure!(enc.overflow.is_empty(), "overflow within polyphony bound");
        ensure!(decode(&enc.roll) == s, "decode(encode(s)) != s for {s:?}");
        identity += 1;
    }
    let mut idempotent = 0;
    for _ in 0..1000 {
        let shape = RollShape::new(r.gen_range(1..=2), r.gen_range(1..=3));
        let cells = (0..shape.cells()).map(|_| r.gen_range(0u16..256)).collect();
        let roll =
            PianoRoll::new(Grid::from_cells(shape, cells).unwrap(), Scheme::Doubled).unwrap();
        let once = normalize_holds(&roll).map_err(|e| e.to_string())?;
        let twice = normalize_holds(&once).map_err(|e| e.to_string())?;
        ensure!(once == twice, "normalize_holds not idempotent");
        ensure!(
            decode(&once) == decode(&roll),
            "normalization changed the notes"
        );
        idempotent += 1;
    }
    let legacy = PianoRoll::silent(RollShape::new(1, 1), Scheme::Legacy);
    ensure!(
        normalize_holds(&legacy).is_err(),
        "legacy normalization should be refused"
    );
    Ok(format!(
        "{identity} round trips, {idempotent} idempotence checks"
    ))
}

// 5 ----------------------------------------------------------------------

fn two_pitch_sample(lo: u8, hi: u8) -> TransitionSample {
    let shape = RollShape::new(12, 2);
    let mut cells = vec![0; shape.cells()];
    cells[0] = u16::from(hi);
    cells[1] = u16::from(lo);
    cells[2] = u16::from(hi) + HOLD_OFFSET;
    TransitionSample {
        grid: Grid::from_cells(shape, cells).unwrap(),
        tempo_bpm: 120.0,
        song_id: "s".into(),
        bar_offset: 7,
    }
}

fn criterion_5(env: &Env) -> Outcome {
    let mut r = rng(5);
    let mut both = 0;
    for _ in 0..500 {
        let lo = r.gen_range(1..=128u8);
        let s = gen::slice(&mut r, 2, 12, (lo, lo.saturating_add(20).min(128)), 6);
        let grid = encode(&s, 2, Scheme::Doubled).unwrap().roll.into_grid();
        let sample = TransitionSample {
            grid,
            tempo_bpm: 100.0,
            song_id: "g".into(),
            bar_offset: 9,
        };
        let k = r.gen_range(-MAX_SHIFT..=MAX_SHIFT);
        if let Some(up) = transpose(&sample, k).unwrap() {
            if let Some(back) = transpose(&up, -k).unwrap() {
                ensure!(back == sample, "shift {k} then {} is not the identity", -k);
                both += 1;
            }
        }
    }
    ensure!(both >= 250, "only {both} group-law pairs exercised");

    let mut max_seen = 0;
    for _ in 0..100 {
        let lo = r.gen_range(1..=128u8);
        let hi = r.gen_range(lo..=128u8);
        let analytic = (1..=MAX_SHIFT).filter(|k| i32::from(hi) + k <= 128).count()
            + (1..=MAX_SHIFT).filter(|k| i32::from(lo) - k >= 1).count();
        let n = vertical_variants(&two_pitch_sample(lo, hi)).len();
        ensure!(
            n == analytic && n == valid_shift_count(lo, hi),
            "span {lo}..{hi}: {n} vs {analytic}"
        );
        ensure!(n <= 22, "{n} variants");
        max_seen = max_seen.max(n);
    }
    ensure!(
        vertical_variants(&two_pitch_sample(12, 117)).len() == 22,
        "12..117 should give 22"
    );

    let rolls = env.path("aug_in");
    std::fs::create_dir_all(&rolls).unwrap();
    let roll = PianoRoll::new(two_pitch_sample(12, 117).grid, Scheme::Doubled).unwrap();
    std::fs::write(rolls.join("wide.mdlr"), write_mdlr(&roll)).unwrap();
    run_ok(&[
        "augment",
        "--rolls",
        &rolls.display().to_string(),
        "--out-dir",
        &env.p("aug_out"),
    ])?;
    let written = std::fs::read_dir(env.path("aug_out"))
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "mdlr")
        })
        .count();
    ensure!(written == 22, "CLI wrote {written} variants");
    Ok(format!(
        "{both} group-law pairs, 100 spans (max {max_seen}), CLI wrote 22 variants"
    ))
}

// 6 ----------------------------------------------------------------------

fn step_sets(slice: &NoteSlice) -> Vec<BTreeSet<u8>> {
    (0..slice.steps() as u32)
        .map(|t| {
            slice
                .notes()
                .iter()
                .filter(|n| n.start <= t && t < n.end())
                .map(|n| n.pitch)
                .collect()
        })
        .collect()
}

fn oracle_dissonance(slice: &NoteSlice) -> Vec<Q> {
    step_sets(slice)
        .into_iter()
        .filter(|s| s.len() >= 2)
        .map(|s| {
            let p: Vec<u8> = s.into_iter().collect();
            let (mut hits, mut pairs) = (0, 0);
            for i in 0..p.len() {
                for j in i + 1..p.len() {
                    pairs += 1;
                    if [1, 6, 11].contains(&((p[j] - p[i]) % 12)) {
                        hits += 1;
                    }
                }
            }
            q(hits, pairs)
        })
        .collect()
}

/// Repetition score from pairwise comparison of bar and quarter chunks.
fn oracle_repetition(roll: &PianoRoll) -> Q {
    let cells = roll.grid().cells();
    let v = roll.voices();
    let scaled = |size: usize| {
        let chunks: Vec<&[u16]> = cells.chunks(size).collect();
        let n = chunks.len();
        let best = chunks
            .iter()
            .map(|a| chunks.iter().filter(|b| *b == a).count())
            .max()
            .unwrap();
        if n == 1 {
            q(1, 1)
        } else {
            q(best - 1, n - 1)
        }
    };
    (scaled(16 * v) + scaled(4 * v)) / Q::from_integer(2)
}

fn criterion_6(_: &Env) -> Outcome {
    let mut r = rng(6);
    for i in 0..500 {
        let (slice, roll) = gen::roll(&mut r);
        ensure!(
            decode(&roll) == slice,
            "roll {i} does not decode to its notes"
        );
        let cells = roll.grid().cells().len();
        let sounding: usize = slice.notes().iter().map(|n| n.length as usize).sum();
        let onsets = slice.notes().len();
        ensure!(
            silent_ratio::<Q>(&roll) == q(cells - sounding, cells),
            "silent_ratio, roll {i}"
        );
        ensure!(
            piece_dissonant_values::<Q>(&roll) == oracle_dissonance(&slice),
            "dissonance, roll {i}"
        );
        let sets = step_sets(&slice);
        let distinct: BTreeSet<_> = sets.iter().filter(|s| !s.is_empty()).collect();
        ensure!(
            variety_score::<Q>(&roll) == q(distinct.len(), sets.len()),
            "variety_score, roll {i}"
        );
        let want_len = (onsets > 0).then(|| q(sounding, onsets));
        ensure!(
            avg_note_length::<Q>(&roll) == want_len,
            "avg_note_length, roll {i}"
        );
        let rep = repetition_score::<Q>(&roll).map_err(|e| e.to_string())?;
        ensure!(
            rep.repetition_score == oracle_repetition(&roll),
            "repetition_score, roll {i}"
        );
        let float = repetition_score::<f64>(&roll).unwrap().repetition_score;
        let exact = rep.repetition_score;
        ensure!(
            close(float, *exact.numer() as f64 / *exact.denom() as f64, 1e-12),
            "f64 repetition"
        );
    }
    Ok("500 rolls, exact rational agreement".into())
}

// 7 ----------------------------------------------------------------------

const TOTAL: u32 = 360;

fn hist(bins: &[(i32, u32)]) -> Histogram<f64> {
    Histogram::from_weighted(
        bins.iter()
            .map(|&(v, w)| (f64::from(v) / 100.0, f64::from(w) / f64::from(TOTAL))),
    )
}

fn exact_hist(bins: &[(i32, u32)]) -> Histogram<Q> {
    Histogram::from_weighted(bins.iter().map(|&(v, w)| {
        (
            Q::new(i64::from(v), 100),
            Q::new(i64::from(w), i64::from(TOTAL)),
        )
    }))
}

fn categorical(bins: &[(i32, u32)]) -> Categorical<i32, Q> {
    Categorical::from_counts(&bins.iter().map(|&(v, w)| (v, w as usize)).collect())
}

/// Minimum-cost transport between the two bin sets as a linear program.
fn transport_lp(a: &[(i32, u32)], b: &[(i32, u32)]) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let flow: Vec<Vec<_>> = a
        .iter()
        .map(|&(va, _)| {
            b.iter()
                .map(|&(vb, _)| {
                    lp.add_var(f64::from((va - vb).abs()) / 100.0, (0.0, f64::INFINITY))
                })
                .collect()
        })
        .collect();
    for (i, &(_, wa)) in a.iter().enumerate() {
        let terms: Vec<_> = flow[i].iter().map(|&x| (x, 1.0)).collect();
        lp.add_constraint(&terms, ComparisonOp::Eq, f64::from(wa));
    }
    for (j, &(_, wb)) in b.iter().enumerate() {
        let terms: Vec<_> = flow.iter().map(|row| (row[j], 1.0)).collect();
        lp.add_constraint(&terms, ComparisonOp::Eq, f64::from(wb));
    }
    lp.solve().unwrap().objective() / f64::from(TOTAL)
}

fn l1_half(a: &Categorical<i32, Q>, b: &Categorical<i32, Q>) -> Q {
    let keys: BTreeSet<i32> = a
        .masses()
        .keys()
        .chain(b.masses().keys())
        .copied()
        .collect();
    keys.iter()
        .map(|k| (a.mass(k) - b.mass(k)).abs())
        .sum::<Q>()
        / Q::from_integer(2)
}

fn criterion_7(_: &Env) -> Outcome {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (a, b) = (gen::bins(&mut r, TOTAL), gen::bins(&mut r, TOTAL));
        let w = wasserstein_1d(&hist(&a), &hist(&b)).map_err(|e| e.to_string())?;
        let lp = transport_lp(&a, &b);
        worst = worst.max((w - lp).abs());
        ensure!(close(w, lp, 1e-9), "W1 {w} vs LP {lp}");
        let tv: Q =
            total_variation(&categorical(&a), &categorical(&b)).map_err(|e| e.to_string())?;
        ensure!(
            tv == l1_half(&categorical(&a), &categorical(&b)),
            "TV != L1/2"
        );
    }
    for _ in 0..200 {
        let [x, y, z] = [0, 1, 2].map(|_| gen::bins(&mut r, TOTAL));
        let w = |p: &[(i32, u32)], q: &[(i32, u32)]| {
            wasserstein_1d(&exact_hist(p), &exact_hist(q)).unwrap()
        };
        let t = |p: &[(i32, u32)], q: &[(i32, u32)]| -> Q {
            total_variation(&categorical(p), &categorical(q)).unwrap()
        };
        let zero = Q::from_integer(0);
        ensure!(w(&x, &x) == zero && t(&x, &x) == zero, "d(x, x) != 0");
        ensure!(
            w(&x, &y) == w(&y, &x) && t(&x, &y) == t(&y, &x),
            "asymmetric"
        );
        ensure!(w(&x, &z) <= w(&x, &y) + w(&y, &z), "W1 triangle");
        ensure!(t(&x, &z) <= t(&x, &y) + t(&y, &z), "TV triangle");
        ensure!(
            x == y || (w(&x, &y) > zero && t(&x, &y) > zero),
            "distinct inputs at distance 0"
        );
    }
    Ok(format!(
        "200 LP pairs (max gap {worst:.1e}), TV exact, 200 axiom triples"
    ))
}

// 8 ----------------------------------------------------------------------

fn criterion_8(_: &Env) -> Outcome {
    let mut r = rng(8);
    let reference: Vec<PianoRoll> = (0..200).map(|_| gen::corpus_roll(&mut r)).collect();
    let mut summary = Vec::new();
    for metric in Metric::ALL {
        let features = corpus_features::<f64>(metric, &reference);
        let mut within = 0;
        for trial in 0..100u64 {
            let mut order: Vec<usize> = (0..features.len()).collect();
            order.shuffle(&mut rng(10_000 + trial));
            // The half is scored against the whole reference it came from,
            // so its raw distance runs below the split baseline and z < 0.
            let held: Vec<_> = order[..100].iter().map(|&i| features[i].clone()).collect();
            let report = normalized_score(
                metric,
                &held,
                &features,
                NormalizeConfig {
                    n_splits: 50,
                    seed: trial,
                },
            )
            .map_err(|e| format!("{metric}: {e}"))?;
            if report.normalized.is_some_and(|z| z.abs() <= 3.0) {
                within += 1;
            }
        }
        ensure!(
            within >= 95,
            "{metric}: only {within}/100 held-out halves within 3 std"
        );
        summary.push(format!("{metric} {within}"));
    }

    let silent: Vec<PianoRoll> = (0..50)
        .map(|_| PianoRoll::silent(RollShape::new(4, 3), Scheme::Doubled))
        .collect();
    let report = score_rolls::<f64>(
        Metric::SilentRatio,
        &silent,
        &reference,
        NormalizeConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    ensure!(report.status == ReportStatus::Ok, "degenerate baseline");
    let z = report.normalized.unwrap();
    ensure!(z > 3.0, "all-silent set scored {z}");
    Ok(format!(
        "held-out within 3 std: {}; all-silent silent_ratio {z:.1}",
        summary.join(", ")
    ))
}

// 9 ----------------------------------------------------------------------

/// Checks the four-onset guarantee for one transition; returns whether it
/// was vivid.
fn check_vivid(song: &Song, offset: u32) -> Result<bool, String> {
    if !is_vivid(song, offset, &FilterConfig::default()).map_err(|e| e.to_string())? {
        return Ok(false);
    }
    let grid = song.bar_grid();
    let from = grid.start(offset as usize - 2).unwrap();
    let to = grid.start(offset as usize + 2).unwrap();
    let starts = song
        .notes()
        .iter()
        .filter(|n| (from..to).contains(&n.onset))
        .count();
    ensure!(starts >= 4, "{}@{offset}: {starts} note starts", song.id());
    let (sample, overflow) = build_sample(song, offset, 8).map_err(|e| e.to_string())?;
    if overflow.is_empty() {
        ensure!(
            target_onsets(&sample) >= 4,
            "{}@{offset}: grid onsets {}",
            song.id(),
            target_onsets(&sample)
        );
    }
    Ok(true)
}

fn criterion_9(env: &Env) -> Outcome {
    let mut synthetic = 0;
    for spec in &env.specs {
        let song = env.song(spec);
        for p in &spec.planted {
            synthetic += usize::from(check_vivid(&song, p.bar_offset)?);
        }
    }
    ensure!(synthetic > 0, "no synthetic transition was vivid");

    let mut r = rng(9);
    let mut random = 0;
    for _ in 0..1000 {
        let song = gen::song(&mut r, 16);
        let offset = r.gen_range(7..=11);
        random += usize::from(check_vivid(&song, offset)?);
    }

    // the same guarantee through the CLI: filter, encode, count onsets
    run_ok(&[
        "filter",
        "--transitions",
        &env.p("out/transitions.jsonl"),
        "--midi-dir",
        &env.p("corpus"),
        "--out",
        &env.p("out/kept.jsonl"),
        "--audit",
        &env.p("out/audit.jsonl"),
    ])?;
    let kept: Vec<TransitionPoint> = jsonl(&env.path("out/kept.jsonl"));
    let audit: Vec<Value> = jsonl(&env.path("out/audit.jsonl"));
    let total: usize = env.specs.iter().map(|s| s.planted.len()).sum();
    ensure!(
        kept.len() + audit.len() == total,
        "kept {} + skipped {} != {total}",
        kept.len(),
        audit.len()
    );
    ensure!(!kept.is_empty(), "filter kept nothing");
    run_ok(&[
        "encode",
        "--transitions",
        &env.p("out/kept.jsonl"),
        "--midi-dir",
        &env.p("corpus"),
        "--out-dir",
        &env.p("out/samples"),
    ])?;
    let index: Vec<Value> = jsonl(&env.path("out/samples/index.jsonl"));
    ensure!(
        index.len() == kept.len(),
        "{} samples for {} transitions",
        index.len(),
        kept.len()
    );
    ensure!(
        index.iter().all(|i| i["overflow"] == 0),
        "voice overflow in synthetic samples"
    );
    for entry in std::fs::read_dir(env.path("out/samples")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "mdlr") {
            let roll = medley_core::codec::read_mdlr(&std::fs::read(&path).unwrap()).unwrap();
            let sample = TransitionSample {
                grid: roll.into_grid(),
                tempo_bpm: 0.0,
                song_id: String::new(),
                bar_offset: 0,
            };
            ensure!(
                target_onsets(&sample) >= 4,
                "{} has {} onsets",
                path.display(),
                target_onsets(&sample)
            );
        }
    }
    Ok(format!(
        "{synthetic} synthetic and {random}/1000 random vivid transitions, {} CLI samples, all with >= 4 onsets",
        kept.len()
    ))
}

// 10 ---------------------------------------------------------------------

fn criterion_10(env: &Env) -> Outcome {
    let midi_dir = env.path("stats_midi");
    std::fs::create_dir_all(&midi_dir).unwrap();
    for s in &env.specs {
        std::fs::write(midi_dir.join(format!("{}.mid", s.id)), s.midi_bytes()).unwrap();
    }
    let run = run_ok(&[
        "stats",
        "--midi-dir",
        &midi_dir.display().to_string(),
        "--samples",
        &env.p("out/samples"),
        "--out-dir",
        &env.p("out/stats"),
    ])?;

    let rows: Vec<Value> = jsonl(&env.path("out/stats/medleys.jsonl"));
    ensure!(rows.len() == env.specs.len(), "{} summary rows", rows.len());
    for (row, spec) in rows.iter().zip(&env.specs) {
        ensure!(row["song_id"] == spec.id.as_str(), "row order: {row}");
        ensure!(
            row["key_change_count"] == spec.key_changes,
            "{}: key changes {row}",
            spec.id
        );
        ensure!(
            row["tempo_change_count"] == spec.tempo_changes(),
            "{}: tempo changes {row}",
            spec.id
        );
        ensure!(
            row["instrument_count"] == spec.instrument_set().len(),
            "{}: instruments {row}",
            spec.id
        );
        let minutes = row["duration_minutes"].as_f64().unwrap();
        ensure!(
            close(minutes, spec.duration_minutes(), 1e-9),
            "{}: {minutes} minutes",
            spec.id
        );
    }

    let n = env.specs.len() as f64;
    let corpus: Value =
        serde_json::from_str(&std::fs::read_to_string(env.path("out/stats/corpus.json")).unwrap())
            .unwrap();
    let mean = |f: &dyn Fn(&MedleySpec) -> f64| env.specs.iter().map(f).sum::<f64>() / n;
    ensure!(
        close(
            corpus["mean_key_changes"].as_f64().unwrap(),
            mean(&|s| s.key_changes as f64),
            1e-12
        ),
        "mean key changes"
    );
    ensure!(
        close(
            corpus["mean_tempo_changes"].as_f64().unwrap(),
            mean(&|s| s.tempo_changes() as f64),
            1e-12
        ),
        "mean tempo changes"
    );
    ensure!(
        close(
            corpus["mean_instruments"].as_f64().unwrap(),
            mean(&|s| s.instrument_set().len() as f64),
            1e-12
        ),
        "mean instruments"
    );
    ensure!(
        run.stdout.contains("20 medleys"),
        "report line: {}",
        run.stdout
    );

    let mut uses: BTreeMap<u8, usize> = BTreeMap::new();
    for s in &env.specs {
        for p in s.instrument_set() {
            *uses.entry(p).or_default() += 1;
        }
    }
    let csv = std::fs::read_to_string(env.path("out/stats/instrumentation.csv")).unwrap();
    let mut lines = csv.lines();
    ensure!(
        lines.next() == Some("program,probability"),
        "instrumentation header"
    );
    let parsed: Vec<(u8, f64)> = lines
        .map(|l| {
            let (p, v) = l.split_once(',').unwrap();
            (p.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    ensure!(parsed.len() == 128, "{} programs", parsed.len());
    ensure!(
        parsed.windows(2).all(|w| w[0].1 >= w[1].1),
        "not sorted by probability"
    );
    for (p, prob) in &parsed {
        let want = *uses.get(p).unwrap_or(&0) as f64 / n;
        ensure!(close(*prob, want, 1e-12), "program {p}: {prob} vs {want}");
    }

    // every encoded sample has four target bars of melody, bass and extras
    let index: Vec<Value> = jsonl(&env.path("out/samples/index.jsonl"));
    let mut want_counts: BTreeMap<usize, usize> = BTreeMap::new();
    for entry in &index {
        let spec = env
            .specs
            .iter()
            .find(|s| entry["song_id"] == s.id.as_str())
            .unwrap();
        *want_counts
            .entry(4 * (spec.notes_at_bar_start() as usize + 3))
            .or_default() += 1;
    }
    let want_csv: String = std::iter::once("note_count,frequency\n".to_string())
        .chain(want_counts.iter().map(|(k, c)| format!("{k},{c}\n")))
        .collect();
    let got_csv = std::fs::read_to_string(env.path("out/stats/note_counts.csv")).unwrap();
    ensure!(
        got_csv == want_csv,
        "note counts:\n{got_csv}\nwant:\n{want_csv}"
    );
    Ok(format!(
        "{} medleys, {} programs in use, {} samples",
        env.specs.len(),
        uses.len(),
        index.len()
    ))
}

fn main() {
    let env = Env::new();
    let criteria: [Criterion; 10] = [
        ("label evaluation golden counts", criterion_1),
        ("C4 encoding golden values", criterion_2),
        ("synthetic end-to-end extraction", criterion_3),
        ("codec properties", criterion_4),
        ("augmentation properties", criterion_5),
        ("metric oracle equivalence", criterion_6),
        ("distance correctness", criterion_7),
        ("normalization sanity", criterion_8),
        ("vivid-filter guarantee", criterion_9),
        ("statistics counting oracles", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(|| check(&env))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let ms = start.elapsed().as_millis();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{ms} ms]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} [{ms} ms]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
