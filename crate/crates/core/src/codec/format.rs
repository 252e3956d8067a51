//! Roll serialization.
//!
//! Binary `.mdlr` layout, little-endian:
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 4    | magic `MDLR`                   |
//! | 4      | 2    | version (1)                    |
//! | 6      | 2    | bars                           |
//! | 8      | 2    | steps per bar                  |
//! | 10     | 2    | voices                         |
//! | 12     | 1    | scheme (0 doubled, 1 legacy)   |
//! | 13     | 2·n  | cells as u16, bar/step/voice order |
//!
//! The CSV mirror starts with a `# mdlr scheme=.. bars=.. steps=.. voices=..`
//! line followed by one row per `(bar, step)` holding the voice cells.

use std::fmt::Write as _;

use crate::model::{Grid, RollShape, STEPS_PER_BAR};

use super::{CodecError, PianoRoll, Scheme};

pub const MAGIC: &[u8; 4] = b"MDLR";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 13;

fn scheme_byte(s: Scheme) -> u8 {
    match s {
        Scheme::Doubled => 0,
        Scheme::Legacy => 1,
    }
}

pub fn write_mdlr(roll: &PianoRoll) -> Vec<u8> {
    let shape = roll.shape();
    let mut out = Vec::with_capacity(HEADER_LEN + 2 * shape.cells());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for dim in [shape.bars, shape.steps_per_bar, shape.voices] {
        out.extend_from_slice(&(dim as u16).to_le_bytes());
    }
    out.push(scheme_byte(roll.scheme()));
    for &cell in roll.grid().cells() {
        out.extend_from_slice(&cell.to_le_bytes());
    }
    out
}

pub fn read_mdlr(bytes: &[u8]) -> Result<PianoRoll, CodecError> {
    if bytes.len() < HEADER_LEN {
        return Err(CodecError::Format("truncated header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(CodecError::Format("bad magic".into()));
    }
    let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
    let version = u16_at(4);
    if version != VERSION {
        return Err(CodecError::Format(format!("unsupported version {version}")));
    }
    let (bars, steps, voices) = (u16_at(6) as usize, u16_at(8) as usize, u16_at(10) as usize);
    let scheme = match bytes[12] {
        0 => Scheme::Doubled,
        1 => Scheme::Legacy,
        other => return Err(CodecError::Format(format!("unknown scheme byte {other}"))),
    };
    let shape = shape_of(bars, steps, voices)?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 2 * shape.cells() {
        return Err(CodecError::Format(format!(
            "expected {} cell bytes, found {}",
            2 * shape.cells(),
            body.len()
        )));
    }
    let cells = body
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    PianoRoll::new(Grid::from_cells(shape, cells)?, scheme)
}

fn shape_of(bars: usize, steps: usize, voices: usize) -> Result<RollShape, CodecError> {
    if steps != STEPS_PER_BAR {
        return Err(CodecError::Format(format!(
            "steps per bar must be {STEPS_PER_BAR}, found {steps}"
        )));
    }
    if voices == 0 {
        return Err(CodecError::NoVoices);
    }
    Ok(RollShape::new(bars, voices))
}

pub fn write_csv(roll: &PianoRoll) -> String {
    let shape = roll.shape();
    let mut out = format!(
        "# mdlr scheme={} bars={} steps={} voices={}\n",
        roll.scheme().name(),
        shape.bars,
        shape.steps_per_bar,
        shape.voices
    );
    for step in 0..shape.steps() {
        let row = roll.grid().step_cells(step);
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{cell}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn read_csv(text: &str) -> Result<PianoRoll, CodecError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix("# mdlr "))
        .ok_or_else(|| CodecError::Format("missing '# mdlr' header".into()))?;
    let field = |name: &str| -> Result<&str, CodecError> {
        header
            .split_whitespace()
            .find_map(|kv| kv.strip_prefix(name)?.strip_prefix('='))
            .ok_or_else(|| CodecError::Format(format!("header lacks {name}")))
    };
    let number = |name: &str| -> Result<usize, CodecError> {
        field(name)?
            .parse()
            .map_err(|_| CodecError::Format(format!("bad {name}")))
    };
    let scheme: Scheme = field("scheme")?.parse()?;
    let shape = shape_of(number("bars")?, number("steps")?, number("voices")?)?;
    let mut cells = Vec::with_capacity(shape.cells());
    for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let values: Result<Vec<u16>, _> = line.split(',').map(|v| v.trim().parse()).collect();
        let values = values.map_err(|_| CodecError::Format(format!("row {row}: bad integer")))?;
        if values.len() != shape.voices {
            return Err(CodecError::Format(format!(
                "row {row}: expected {} columns, found {}",
                shape.voices,
                values.len()
            )));
        }
        cells.extend(values);
    }
    PianoRoll::new(Grid::from_cells(shape, cells)?, scheme)
}
