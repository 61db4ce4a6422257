//! Turning utterance text into content terms.

mod porter;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Debate, RoundKind, Side, SideTurn};

pub use porter::stem;

const DEFAULT_STOPWORDS: &str = include_str!("../../resources/stopwords_en.txt");

/// A normalized content term: lowercase, stemmed, letters only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Term(String);

impl Term {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Wraps an already-normalized string. No stemming is applied.
    pub fn new_unchecked(s: impl Into<String>) -> Term {
        Term(s.into())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for Term {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone)]
pub struct Stopwords {
    words: HashSet<String>,
    hash: String,
}

impl Stopwords {
    /// The shipped English function-word list.
    pub fn english() -> Stopwords {
        Stopwords::from_text(DEFAULT_STOPWORDS)
    }

    /// One word per line; blank lines are skipped and words are lowercased.
    pub fn from_text(text: &str) -> Stopwords {
        let words: HashSet<String> = text
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .collect();
        let mut sorted: Vec<&str> = words.iter().map(String::as_str).collect();
        sorted.sort_unstable();
        let hash = hex::encode(Sha256::digest(sorted.join("\n").as_bytes()));
        Stopwords { words, hash }
    }

    pub fn from_file(path: &Path) -> std::io::Result<Stopwords> {
        Ok(Stopwords::from_text(&fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// SHA-256 over the sorted, deduplicated list.
    pub fn content_hash(&self) -> &str {
        &self.hash
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Stopwords::english()
    }
}

/// Lowercased maximal alphabetic runs. Bracketed editorial notes such as
/// `[laughter]` are removed first; an unclosed `[` is treated as punctuation.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c == '[' {
            if let Some(close) = text[i..].find(']') {
                let end = i + close;
                while chars.peek().is_some_and(|&(j, _)| j <= end) {
                    chars.next();
                }
            }
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            continue;
        }
        if c.is_alphabetic() {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

pub fn normalize(token: &str, stopwords: &Stopwords) -> Option<Term> {
    if token.is_empty() || stopwords.contains(token) {
        return None;
    }
    let stemmed = stem(token);
    if stemmed.is_empty() || stopwords.contains(&stemmed) {
        return None;
    }
    Some(Term(stemmed))
}

/// One content term with its place in the transcript.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermOccurrence {
    pub term: Term,
    pub side: Side,
    pub round: RoundKind,
    pub turn_index: usize,
    /// Offset of the source token inside its turn.
    pub offset: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermSequence {
    pub occurrences: Vec<TermOccurrence>,
}

impl TermSequence {
    pub fn len(&self) -> usize {
        self.occurrences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occurrences.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.occurrences.iter().map(|o| &o.term)
    }

    /// Occurrences spoken by `side` in round `round`.
    pub fn filter(&self, side: Side, round: RoundKind) -> impl Iterator<Item = &TermOccurrence> {
        self.occurrences
            .iter()
            .filter(move |o| o.side == side && o.round == round)
    }
}

pub fn content_terms(turns: &[SideTurn<'_>], stopwords: &Stopwords) -> TermSequence {
    let mut occurrences = Vec::new();
    // transcripts repeat a small vocabulary, so each distinct token is stemmed once
    let mut seen: HashMap<String, Option<Term>> = HashMap::new();
    for st in turns {
        for (offset, token) in tokenize(&st.turn.text).into_iter().enumerate() {
            let normalized = match seen.get(&token) {
                Some(t) => t.clone(),
                None => {
                    let t = normalize(&token, stopwords);
                    seen.insert(token, t.clone());
                    t
                }
            };
            if let Some(term) = normalized {
                occurrences.push(TermOccurrence {
                    term,
                    side: st.side,
                    round: st.round,
                    turn_index: st.index,
                    offset,
                });
            }
        }
    }
    TermSequence { occurrences }
}

/// All debater content terms of a debate, in transcript order.
pub fn debate_terms(d: &Debate, stopwords: &Stopwords) -> TermSequence {
    let turns: Vec<SideTurn<'_>> = d.debater_turns().collect();
    content_terms(&turns, stopwords)
}
