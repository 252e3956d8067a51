use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::TransitionPoint;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    /// `tp / (tp + fp)`, undefined without predictions.
    pub fn precision<T: Scalar>(&self) -> Option<T> {
        ratio(self.tp, self.tp + self.fp)
    }

    /// `tp / (tp + fn)`, undefined without ground truth.
    pub fn recall<T: Scalar>(&self) -> Option<T> {
        ratio(self.tp, self.tp + self.fn_)
    }
}

fn ratio<T: Scalar>(num: u64, den: u64) -> Option<T> {
    (den > 0).then(|| T::ratio(num as usize, den as usize))
}

/// A labelled bar of one song.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BarLabel {
    pub song_id: String,
    pub bar_real: u32,
}

impl From<&TransitionPoint> for BarLabel {
    fn from(tp: &TransitionPoint) -> Self {
        BarLabel {
            song_id: tp.song_id.clone(),
            bar_real: tp.bar_real,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelEvaluation {
    #[serde(flatten)]
    pub matrix: ConfusionMatrix,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

impl From<ConfusionMatrix> for LabelEvaluation {
    fn from(matrix: ConfusionMatrix) -> Self {
        LabelEvaluation {
            matrix,
            precision: matrix.precision(),
            recall: matrix.recall(),
        }
    }
}

/// Scores predicted transitions against ground-truth bars.
///
/// Within each song a truth bar matches at most one prediction whose bar
/// lies within `window_bars` of it; the matching is maximum. Unmatched
/// predictions count as false positives and unmatched truths as false
/// negatives. True negatives are the `candidates` (annotated bars) that are
/// neither predicted nor true.
pub fn evaluate_labels(
    predicted: &[BarLabel],
    truth: &[BarLabel],
    window_bars: u32,
    candidates: &[BarLabel],
) -> LabelEvaluation {
    fn group(labels: &[BarLabel]) -> BTreeMap<&str, Vec<u32>> {
        let mut by_song: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
        for l in labels {
            by_song.entry(&l.song_id).or_default().push(l.bar_real);
        }
        for bars in by_song.values_mut() {
            bars.sort_unstable();
        }
        by_song
    }
    let pred = group(predicted);
    let gold = group(truth);

    let mut matched = 0u64;
    for (song, truth_bars) in &gold {
        if let Some(pred_bars) = pred.get(song) {
            matched += max_window_matching(pred_bars, truth_bars, window_bars);
        }
    }

    let labelled: BTreeSet<(&str, u32)> = predicted
        .iter()
        .chain(truth)
        .map(|l| (l.song_id.as_str(), l.bar_real))
        .collect();
    let tn = candidates
        .iter()
        .map(|c| (c.song_id.as_str(), c.bar_real))
        .collect::<BTreeSet<_>>()
        .difference(&labelled)
        .count() as u64;

    ConfusionMatrix {
        tp: matched,
        fp: predicted.len() as u64 - matched,
        fn_: truth.len() as u64 - matched,
        tn,
    }
    .into()
}

/// Size of a maximum matching between two sorted bar lists where pairs may
/// differ by at most `window`. Greedy left-to-right is optimal because
/// every truth bar's admissible predictions form an interval.
fn max_window_matching(pred: &[u32], truth: &[u32], window: u32) -> u64 {
    let mut matched = 0;
    let mut p = 0;
    for &t in truth {
        while p < pred.len() && pred[p] + window < t {
            p += 1;
        }
        if p < pred.len() && pred[p] <= t + window {
            matched += 1;
            p += 1;
        }
    }
    matched
}
