//! Notation-to-playback bar alignment through repeat expansion.

use std::collections::BTreeMap;

use crate::model::ScoreDocument;

/// Playback order of notation bars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaybackMap {
    /// `bar_real` of every playback bar, in playback order.
    pub order: Vec<u32>,
    /// 1-based playback positions of every notation bar.
    pub real_to_offset: BTreeMap<u32, Vec<u32>>,
}

impl PlaybackMap {
    fn from_order(order: Vec<u32>) -> Self {
        let mut real_to_offset: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (pos, &bar) in order.iter().enumerate() {
            real_to_offset.entry(bar).or_default().push(pos as u32 + 1);
        }
        PlaybackMap {
            order,
            real_to_offset,
        }
    }

    /// First playback position of a notation bar.
    pub fn first_offset(&self, bar_real: u32) -> Option<u32> {
        self.real_to_offset.get(&bar_real)?.first().copied()
    }

    pub fn playback_len(&self) -> usize {
        self.order.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepeatWarning {
    /// A backward repeat had no forward repeat to return to; bar 1 was used.
    UnbalancedRepeat { bar_real: u32 },
    /// A navigation mark that is not expanded (da capo, segno, volta...).
    UnsupportedMark { bar_real: u32, mark: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub map: PlaybackMap,
    pub warnings: Vec<RepeatWarning>,
}

/// Unrolls forward/backward repeat pairs. A span closed by a backward
/// repeat with count `n` is played `n` times in total. A backward repeat
/// before any forward repeat returns to bar 1; one that follows an
/// already completed repeat without a new forward repeat also returns to
/// bar 1 but is reported as unbalanced.
pub fn expand_repeats(doc: &ScoreDocument) -> Expansion {
    let n = doc.measures.len();
    let mut warnings = Vec::new();
    for m in &doc.measures {
        for mark in &m.unsupported_marks {
            warnings.push(RepeatWarning::UnsupportedMark {
                bar_real: m.index_real,
                mark: mark.clone(),
            });
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut passes = vec![0u32; n];
    let mut span_start: Option<usize> = None;
    let mut completed_any = false;
    let mut i = 0;
    while i < n {
        let m = &doc.measures[i];
        if m.repeat_start {
            span_start = Some(i);
        }
        order.push(i as u32 + 1);
        if let Some(times) = m.repeat_end {
            if passes[i] + 1 < times {
                if passes[i] == 0 && span_start.is_none() && completed_any {
                    warnings.push(RepeatWarning::UnbalancedRepeat {
                        bar_real: m.index_real,
                    });
                }
                passes[i] += 1;
                i = span_start.unwrap_or(0);
                continue;
            }
            span_start = None;
            completed_any = true;
        }
        i += 1;
    }
    Expansion {
        map: PlaybackMap::from_order(order),
        warnings,
    }
}
