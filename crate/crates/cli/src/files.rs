//! Directory scanning, score/MIDI pairing and JSON-lines I/O.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use medley_core::codec::{read_csv, read_mdlr, PianoRoll};
use medley_core::io::parse_midi;
use medley_core::Song;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::CliError;

const SCORE_EXTENSIONS: [&str; 3] = ["mxl", "musicxml", "xml"];
const MIDI_EXTENSIONS: [&str; 2] = ["mid", "midi"];

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Regular files of `dir`, sorted by name.
pub fn list_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputPair {
    pub song_id: String,
    pub score: PathBuf,
    pub midi: PathBuf,
}

#[derive(Debug, Default)]
pub struct Pairing {
    pub pairs: Vec<InputPair>,
    /// Score or MIDI files without a counterpart of the same stem.
    pub unpaired: Vec<PathBuf>,
}

/// Matches scores and MIDI files by stem. The first file in name order
/// wins when a stem has several scores or several MIDI files.
pub fn pair_inputs(dir: &Path) -> Result<Pairing, CliError> {
    let mut scores: BTreeMap<String, PathBuf> = BTreeMap::new();
    let mut midis: BTreeMap<String, PathBuf> = BTreeMap::new();
    let mut unpaired = Vec::new();
    for path in list_files(dir)? {
        let Some(ext) = extension(&path) else {
            continue;
        };
        let target = if SCORE_EXTENSIONS.contains(&ext.as_str()) {
            &mut scores
        } else if MIDI_EXTENSIONS.contains(&ext.as_str()) {
            &mut midis
        } else {
            continue;
        };
        match target.entry(stem(&path)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(path);
            }
            std::collections::btree_map::Entry::Occupied(_) => unpaired.push(path),
        }
    }
    if scores.is_empty() && midis.is_empty() {
        return Err(CliError::NoInputFiles(dir.to_path_buf()));
    }
    let mut pairs = Vec::new();
    for (id, score) in scores {
        match midis.remove(&id) {
            Some(midi) => pairs.push(InputPair {
                song_id: id,
                score,
                midi,
            }),
            None => unpaired.push(score),
        }
    }
    unpaired.extend(midis.into_values());
    unpaired.sort();
    Ok(Pairing { pairs, unpaired })
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn load_song(path: &Path) -> Result<Song, CliError> {
    let parsed = parse_midi(&read_bytes(path)?).map_err(|e| CliError::input(path, e))?;
    Ok(parsed.song.with_id(stem(path)))
}

/// Every MIDI file of `dir`, keyed by stem.
pub fn midi_index(dir: &Path) -> Result<BTreeMap<String, PathBuf>, CliError> {
    Ok(list_files(dir)?
        .into_iter()
        .filter(|p| extension(p).is_some_and(|e| MIDI_EXTENSIONS.contains(&e.as_str())))
        .map(|p| (stem(&p), p))
        .collect())
}

/// Piano rolls stored as `.mdlr` or `.csv`, sorted by file name.
pub fn load_rolls(dir: &Path) -> Result<Vec<(PathBuf, PianoRoll)>, CliError> {
    let mut out = Vec::new();
    for path in list_files(dir)? {
        let roll = match extension(&path).as_deref() {
            Some("mdlr") => read_mdlr(&read_bytes(&path)?),
            Some("csv") => {
                read_csv(&fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?)
            }
            _ => continue,
        }
        .map_err(|e| CliError::input(&path, e))?;
        out.push((path, roll));
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::Record {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn jsonl_string<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CliError> {
    write_text(path, &jsonl_string(records))
}
