//! MusicXML reading: compressed `.mxl` containers and bare documents, in
//! both part-wise and time-wise layouts.
//!
//! Only the notation structure needed for transition labelling is kept:
//! measure order, text directions, time signatures and repeat barlines.

use std::io::{Cursor, Read};

use roxmltree::{Document, Node, ParsingOptions};
use thiserror::Error;

use crate::model::{Annotation, Measure, Placement, ScoreDocument};

#[derive(Debug, Error)]
pub enum MxlError {
    #[error("input is neither a ZIP archive nor an XML document")]
    NotAZipOrXml,
    #[error("META-INF/container.xml missing or names no rootfile")]
    MissingContainerRootfile,
    #[error("rootfile {0} not found in archive")]
    MissingRootfileEntry(String),
    #[error("corrupt archive: {0}")]
    Zip(String),
    #[error("XML syntax error at {row}:{col}: {message}")]
    XmlSyntax { row: u32, col: u32, message: String },
    #[error("document root <{0}> is not score-partwise or score-timewise")]
    NotAScore(String),
}

const ZIP_MAGIC: &[u8] = b"PK\x03\x04";

/// Parses either a ZIP container (via `META-INF/container.xml`) or a bare
/// MusicXML document.
pub fn parse_mxl(bytes: &[u8]) -> Result<ScoreDocument, MxlError> {
    if bytes.starts_with(ZIP_MAGIC) {
        let xml = read_rootfile(bytes)?;
        return parse_musicxml(&xml);
    }
    let text = decode_text(bytes).ok_or(MxlError::NotAZipOrXml)?;
    if !text.trim_start().starts_with('<') {
        return Err(MxlError::NotAZipOrXml);
    }
    parse_musicxml(&text)
}

fn decode_text(bytes: &[u8]) -> Option<String> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    String::from_utf8(bytes.to_vec()).ok()
}

fn read_rootfile(bytes: &[u8]) -> Result<String, MxlError> {
    let mut archive =
        zip::ZipArchive::new(Cursor::new(bytes)).map_err(|e| MxlError::Zip(e.to_string()))?;
    let container = read_entry(&mut archive, "META-INF/container.xml")?
        .ok_or(MxlError::MissingContainerRootfile)?;
    let doc = parse_xml(&container)?;
    let path = doc
        .descendants()
        .filter(|n| n.has_tag_name("rootfile"))
        .find_map(|n| n.attribute("full-path"))
        .ok_or(MxlError::MissingContainerRootfile)?
        .to_string();
    read_entry(&mut archive, &path)?.ok_or(MxlError::MissingRootfileEntry(path))
}

fn read_entry(
    archive: &mut zip::ZipArchive<Cursor<&[u8]>>,
    name: &str,
) -> Result<Option<String>, MxlError> {
    let mut file = match archive.by_name(name) {
        Ok(f) => f,
        Err(zip::result::ZipError::FileNotFound) => return Ok(None),
        Err(e) => return Err(MxlError::Zip(e.to_string())),
    };
    let mut raw = Vec::new();
    file.read_to_end(&mut raw)
        .map_err(|e| MxlError::Zip(e.to_string()))?;
    decode_text(&raw)
        .map(Some)
        .ok_or_else(|| MxlError::Zip(format!("{name} is not UTF-8")))
}

fn parse_xml(text: &str) -> Result<Document<'_>, MxlError> {
    let opts = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    Document::parse_with_options(text, opts).map_err(|e| {
        let pos = e.pos();
        MxlError::XmlSyntax {
            row: pos.row,
            col: pos.col,
            message: e.to_string(),
        }
    })
}

/// Parses an uncompressed MusicXML document.
pub fn parse_musicxml(text: &str) -> Result<ScoreDocument, MxlError> {
    let doc = parse_xml(text)?;
    let root = doc.root_element();
    let title = root
        .descendants()
        .find(|n| n.has_tag_name("work-title"))
        .or_else(|| {
            root.descendants()
                .find(|n| n.has_tag_name("movement-title"))
        })
        .and_then(|n| n.text())
        .map(|t| t.trim().to_string())
        .unwrap_or_default();
    let parts: Vec<String> = root
        .descendants()
        .filter(|n| n.has_tag_name("score-part"))
        .filter_map(|n| n.attribute("id").map(str::to_string))
        .collect();

    // Each entry holds the measure nodes (one per part) at one notation position.
    let columns: Vec<Vec<Node>> = match root.tag_name().name() {
        "score-partwise" => {
            let mut columns: Vec<Vec<Node>> = Vec::new();
            for part in root.children().filter(|n| n.has_tag_name("part")) {
                for (i, m) in part
                    .children()
                    .filter(|n| n.has_tag_name("measure"))
                    .enumerate()
                {
                    if columns.len() <= i {
                        columns.push(Vec::new());
                    }
                    columns[i].push(m);
                }
            }
            columns
        }
        "score-timewise" => root
            .children()
            .filter(|n| n.has_tag_name("measure"))
            .map(|m| m.children().filter(|n| n.has_tag_name("part")).collect())
            .collect(),
        other => return Err(MxlError::NotAScore(other.to_string())),
    };

    let measures = columns
        .iter()
        .enumerate()
        .map(|(i, nodes)| read_measure(i as u32 + 1, nodes))
        .collect();
    Ok(ScoreDocument {
        title,
        parts,
        measures,
    })
}

fn read_measure(index_real: u32, nodes: &[Node]) -> Measure {
    let mut measure = Measure::new(index_real);
    for node in nodes {
        for child in node.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "direction" => read_direction(child, &mut measure),
                "attributes" => {
                    if measure.time_signature.is_none() {
                        measure.time_signature = read_time(child);
                    }
                }
                "barline" => read_barline(child, &mut measure),
                "sound" => read_sound(child, &mut measure),
                _ => {}
            }
        }
    }
    measure
}

fn read_direction(direction: Node, measure: &mut Measure) {
    let placement = match direction.attribute("placement") {
        Some("above") => Placement::Above,
        Some("below") => Placement::Below,
        _ => Placement::Unspecified,
    };
    let mut words = String::new();
    for dt in direction
        .children()
        .filter(|n| n.has_tag_name("direction-type"))
    {
        for item in dt.children().filter(Node::is_element) {
            match item.tag_name().name() {
                // styled text is often split across several <words>
                "words" => words.push_str(item.text().unwrap_or("")),
                "rehearsal" => push_annotation(measure, item.text().unwrap_or(""), placement),
                _ => {}
            }
        }
    }
    push_annotation(measure, &words, placement);
    for sound in direction.children().filter(|n| n.has_tag_name("sound")) {
        read_sound(sound, measure);
    }
}

fn push_annotation(measure: &mut Measure, text: &str, placement: Placement) {
    let text = text.trim();
    if !text.is_empty() {
        measure.annotations.push(Annotation {
            text: text.to_string(),
            placement,
        });
    }
}

fn read_sound(sound: Node, measure: &mut Measure) {
    for attr in ["dacapo", "dalsegno", "tocoda", "fine"] {
        if let Some(value) = sound.attribute(attr) {
            if attr != "dacapo" || value == "yes" {
                measure.unsupported_marks.push(attr.to_string());
            }
        }
    }
}

fn read_time(attributes: Node) -> Option<(u8, u8)> {
    let time = attributes.children().find(|n| n.has_tag_name("time"))?;
    let text_of = |tag: &str| {
        time.children()
            .find(|n| n.has_tag_name(tag))
            .and_then(|n| n.text())
    };
    // compound beats such as "3+2" are summed
    let beats: u32 = text_of("beats")?
        .split('+')
        .map(|s| s.trim().parse::<u32>().ok())
        .sum::<Option<u32>>()?;
    let beat_type: u32 = text_of("beat-type")?.trim().parse().ok()?;
    Some((u8::try_from(beats).ok()?, u8::try_from(beat_type).ok()?))
}

fn read_barline(barline: Node, measure: &mut Measure) {
    for child in barline.children().filter(Node::is_element) {
        match child.tag_name().name() {
            "repeat" => match child.attribute("direction") {
                Some("forward") => measure.repeat_start = true,
                Some("backward") => {
                    let times = child
                        .attribute("times")
                        .and_then(|t| t.trim().parse::<u32>().ok())
                        .filter(|&t| t >= 1)
                        .unwrap_or(2);
                    measure.repeat_end = Some(times);
                }
                _ => {}
            },
            "ending" => {
                let number = child.attribute("number").unwrap_or("?");
                let kind = child.attribute("type").unwrap_or("?");
                measure
                    .unsupported_marks
                    .push(format!("ending {number} {kind}"));
            }
            _ => {}
        }
    }
}
