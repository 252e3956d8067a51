use std::collections::BTreeSet;

const DEFAULT_LIST: &str = include_str!("../../data/blacklist.txt");

/// Unicode "Musical Symbols" block, always treated as forbidden glyphs.
const MUSICAL_SYMBOLS: std::ops::RangeInclusive<char> = '\u{1D100}'..='\u{1D1FF}';

/// Terms and glyphs that disqualify a score annotation as a song label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blacklist {
    words: BTreeSet<String>,
    glyphs: BTreeSet<char>,
}

impl Default for Blacklist {
    fn default() -> Self {
        Blacklist::parse(DEFAULT_LIST)
    }
}

impl Blacklist {
    pub fn empty() -> Self {
        Blacklist {
            words: BTreeSet::new(),
            glyphs: BTreeSet::new(),
        }
    }

    /// Reads one entry per line; `#` starts a comment line. An entry made
    /// of a single non-alphanumeric character is a glyph.
    pub fn parse(text: &str) -> Self {
        let mut list = Blacklist::empty();
        for line in text.lines() {
            let entry = line.trim();
            if entry.is_empty() || entry.starts_with('#') {
                continue;
            }
            let mut chars = entry.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) if !c.is_alphanumeric() => {
                    list.glyphs.insert(c);
                }
                _ => list.insert_word(entry),
            }
        }
        list
    }

    pub fn insert_word(&mut self, word: &str) {
        self.words.insert(normalize(word));
    }

    pub fn insert_glyph(&mut self, glyph: char) {
        self.glyphs.insert(glyph);
    }

    pub fn contains_word(&self, word: &str) -> bool {
        self.words.contains(&normalize(word))
    }

    pub fn is_glyph(&self, c: char) -> bool {
        self.glyphs.contains(&c) || MUSICAL_SYMBOLS.contains(&c)
    }

    pub fn len(&self) -> usize {
        self.words.len() + self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn normalize(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn strip_punctuation(token: &str) -> &str {
    token.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Decides whether an annotation names a song.
///
/// Rejected: text without any letter (numbers, punctuation), text holding a
/// forbidden glyph, text that is itself a listed term, and text whose every
/// word is a listed term (e.g. "Allegro ma non troppo").
pub fn classify_annotation(text: &str, blacklist: &Blacklist) -> bool {
    let text = text.trim();
    if !text.chars().any(char::is_alphabetic) {
        return false;
    }
    if text.chars().any(|c| blacklist.is_glyph(c)) {
        return false;
    }
    if blacklist.contains_word(text) || blacklist.contains_word(strip_punctuation(text)) {
        return false;
    }
    let all_listed = text
        .split_whitespace()
        .filter(|t| !strip_punctuation(t).is_empty() || blacklist.contains_word(t))
        .all(|t| blacklist.contains_word(t) || blacklist.contains_word(strip_punctuation(t)));
    !all_listed
}
