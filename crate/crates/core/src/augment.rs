//! Data augmentation: transposition of encoded samples and sliding bar
//! windows over whole songs.

use thiserror::Error;

use crate::codec::NoteSlice;
use crate::codec::{PianoRoll, Scheme, LEGACY_HOLD};
use crate::filter::{slice_bars, FilterError, WINDOW_BARS};
use crate::model::{Grid, Song, Symbol, TransitionSample};

pub const MAX_SHIFT: i32 = 11;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AugmentError {
    #[error("transposition {0} outside -11..=11")]
    KOutOfRange(i32),
    #[error(transparent)]
    Filter(#[from] FilterError),
}

fn check_shift(k: i32) -> Result<(), AugmentError> {
    if k.abs() > MAX_SHIFT {
        return Err(AugmentError::KOutOfRange(k));
    }
    Ok(())
}

fn shift_cell(cell: u16, k: i32) -> Option<u16> {
    let sym = Symbol::classify(cell).ok()?;
    let shift = |p: u8| {
        let q = i32::from(p) + k;
        (1..=128).contains(&q).then_some(q as u8)
    };
    Some(
        match sym {
            Symbol::Silence => Symbol::Silence,
            Symbol::Onset(p) => Symbol::Onset(shift(p)?),
            Symbol::Hold(p) => Symbol::Hold(shift(p)?),
        }
        .code(),
    )
}

/// Shifts every pitch of a doubled-scheme grid by `k` semitones, or returns
/// `None` if any pitch would leave `1..=128`.
pub fn transpose_grid(grid: &Grid, k: i32) -> Result<Option<Grid>, AugmentError> {
    check_shift(k)?;
    let cells: Option<Vec<u16>> = grid.cells().iter().map(|&c| shift_cell(c, k)).collect();
    Ok(cells.map(|cells| Grid::from_cells(grid.shape(), cells).expect("shape unchanged")))
}

/// Transposes a roll in either scheme; the legacy hold symbol is left as is.
pub fn transpose_roll(roll: &PianoRoll, k: i32) -> Result<Option<PianoRoll>, AugmentError> {
    check_shift(k)?;
    let cells: Option<Vec<u16>> = roll
        .grid()
        .cells()
        .iter()
        .map(|&c| match roll.scheme() {
            Scheme::Legacy if c == LEGACY_HOLD => Some(c),
            _ => shift_cell(c, k),
        })
        .collect();
    Ok(cells.map(|cells| {
        let grid = Grid::from_cells(roll.shape(), cells).expect("shape unchanged");
        PianoRoll::new(grid, roll.scheme()).expect("scheme preserved")
    }))
}

pub fn transpose(
    sample: &TransitionSample,
    k: i32,
) -> Result<Option<TransitionSample>, AugmentError> {
    Ok(
        transpose_grid(&sample.grid, k)?.map(|grid| TransitionSample {
            grid,
            ..sample.clone()
        }),
    )
}

/// All successful shifts `k` in `-11..=-1` and `1..=11`, ascending. The
/// untransposed sample is not included.
pub fn vertical_variants(sample: &TransitionSample) -> Vec<TransitionSample> {
    (-MAX_SHIFT..=MAX_SHIFT)
        .filter(|&k| k != 0)
        .filter_map(|k| transpose(sample, k).expect("shift within range"))
        .collect()
}

/// Number of shifts [`vertical_variants`] can produce for pitches spanning
/// `lowest..=highest`.
pub fn valid_shift_count(lowest: u8, highest: u8) -> usize {
    let down = (i32::from(lowest) - 1).min(MAX_SHIFT);
    let up = (128 - i32::from(highest)).min(MAX_SHIFT);
    (down + up) as usize
}

/// Every window of `width` bars with a one-bar stride.
pub fn horizontal_windows(song: &Song, width: usize) -> Result<Vec<NoteSlice>, AugmentError> {
    let width = if width == 0 { WINDOW_BARS } else { width };
    let bars = song.bar_count();
    if bars < width {
        return Err(FilterError::SongTooShort { bars, width }.into());
    }
    (1..=bars - width + 1)
        .map(|first| slice_bars(song, first, width).map_err(AugmentError::from))
        .collect()
}
