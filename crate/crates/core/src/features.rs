//! Labeled per-debate feature vectors for each feature family.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{reaction_counts, Debate, Outcome, ReactionKind, RoundKind, Side, WinnerLabel};
use crate::divergence::TermTable;
use crate::flow::DebateFlow;
use crate::textproc::{tokenize, Stopwords, Term, TermSequence};

/// Terms must occur at least this often in the training debates to enter the BOW vocabulary.
pub const BOW_MIN_COUNT: u64 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub debate_id: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// `Some(true)` when For won; `None` for a tie.
    pub label: Option<bool>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

pub fn label_of(w: &WinnerLabel) -> Option<bool> {
    match w.outcome {
        Outcome::ForWins => Some(true),
        Outcome::AgainstWins => Some(false),
        Outcome::Tie => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSet {
    Flow,
    /// Flow features with per-split univariate selection.
    FlowStar,
    Length,
    Bow,
    Audience,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 5] = [
        FeatureSet::Flow,
        FeatureSet::FlowStar,
        FeatureSet::Length,
        FeatureSet::Bow,
        FeatureSet::Audience,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::Flow => "flow",
            FeatureSet::FlowStar => "flow-star",
            FeatureSet::Length => "length",
            FeatureSet::Bow => "bow",
            FeatureSet::Audience => "audience",
        }
    }

    pub fn uses_selection(self) -> bool {
        self == FeatureSet::FlowStar
    }

    /// Fixed column names; `None` for BOW, whose columns depend on the training vocabulary.
    pub fn names(self) -> Option<Vec<String>> {
        match self {
            FeatureSet::Flow | FeatureSet::FlowStar => Some(flow_names()),
            FeatureSet::Length => Some(length_names()),
            FeatureSet::Audience => Some(audience_names()),
            FeatureSet::Bow => None,
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureSet::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown feature set {s:?} (expected flow, flow-star, length, bow or audience)"))
    }
}

pub fn flow_names() -> Vec<String> {
    let mut names = Vec::with_capacity(10);
    for side in Side::BOTH {
        let s = side.as_str();
        names.push(format!("{s}_disc_self_coverage"));
        names.push(format!("{s}_disc_opponent_coverage"));
        names.push(format!("{s}_disc_coverage_sum"));
        names.push(format!("{s}_self_coverage_drop"));
        names.push(format!("{s}_adopted_points"));
    }
    names
}

pub fn length_names() -> Vec<String> {
    Side::BOTH
        .into_iter()
        .flat_map(|s| [format!("{s}_words"), format!("{s}_turns")])
        .collect()
}

pub fn audience_names() -> Vec<String> {
    let mut names = Vec::with_capacity(12);
    for side in Side::BOTH {
        for round in RoundKind::ALL {
            for kind in ReactionKind::ALL {
                names.push(format!("{side}_{round}_{}", kind.as_str()));
            }
        }
    }
    names
}

/// Discussion-round coverage, self-coverage drop and adoption counts per side.
pub fn flow_features(flow: &DebateFlow) -> FeatureVector {
    let mut values = Vec::with_capacity(10);
    for side in Side::BOTH {
        let sf = flow.side(side);
        let disc = sf.round(RoundKind::Discussion);
        values.push(disc.self_coverage);
        values.push(disc.opponent_coverage);
        values.push(disc.self_coverage + disc.opponent_coverage);
        values.push(sf.self_coverage_drop);
        values.push(sf.adopted_points as f64);
    }
    FeatureVector {
        debate_id: flow.id.clone(),
        names: flow_names(),
        values,
        label: label_of(&flow.label),
    }
}

/// Raw token counts and turn counts per side over all rounds.
pub fn length_features(d: &Debate) -> FeatureVector {
    let mut words = [0usize; 2];
    let mut turns = [0usize; 2];
    for st in d.debater_turns() {
        words[st.side.index()] += tokenize(&st.turn.text).len();
        turns[st.side.index()] += 1;
    }
    let values = Side::BOTH
        .into_iter()
        .flat_map(|s| [words[s.index()] as f64, turns[s.index()] as f64])
        .collect();
    FeatureVector {
        debate_id: d.id.clone(),
        names: length_names(),
        values,
        label: label_of(&crate::corpus::winner(d)),
    }
}

pub fn audience_features(d: &Debate) -> FeatureVector {
    let table = reaction_counts(d);
    let mut values = Vec::with_capacity(12);
    for side in Side::BOTH {
        for round in RoundKind::ALL {
            for kind in ReactionKind::ALL {
                values.push(table.get(side, round, kind) as f64);
            }
        }
    }
    FeatureVector {
        debate_id: d.id.clone(),
        names: audience_names(),
        values,
        label: label_of(&crate::corpus::winner(d)),
    }
}

/// Per-side term counts over all debater content terms of one debate.
#[derive(Debug, Clone, PartialEq)]
pub struct BowCounts {
    pub debate_id: String,
    pub label: Option<bool>,
    pub sides: [TermTable; 2],
}

impl BowCounts {
    pub fn from_terms(debate_id: &str, label: Option<bool>, terms: &TermSequence) -> BowCounts {
        let mut sides = [TermTable::default(), TermTable::default()];
        for o in &terms.occurrences {
            sides[o.side.index()].add(o.term.clone(), 1);
        }
        BowCounts {
            debate_id: debate_id.to_string(),
            label,
            sides,
        }
    }

    pub fn from_debate(d: &Debate, stopwords: &Stopwords) -> BowCounts {
        let terms = crate::textproc::debate_terms(d, stopwords);
        BowCounts::from_terms(&d.id, label_of(&crate::corpus::winner(d)), &terms)
    }

    pub fn side(&self, side: Side) -> &TermTable {
        &self.sides[side.index()]
    }
}

/// Terms whose summed count over `training` reaches `min_count`, sorted.
pub fn build_vocab<'a>(training: impl IntoIterator<Item = &'a BowCounts>, min_count: u64) -> Vec<Term> {
    let mut totals: BTreeMap<&'a Term, u64> = BTreeMap::new();
    for counts in training {
        for table in &counts.sides {
            for (term, n) in table.iter() {
                *totals.entry(term).or_default() += n;
            }
        }
    }
    totals
        .into_iter()
        .filter(|&(_, n)| n >= min_count)
        .map(|(t, _)| t.clone())
        .collect()
}

pub fn bow_names(vocab: &[Term]) -> Vec<String> {
    Side::BOTH
        .into_iter()
        .flat_map(|s| vocab.iter().map(move |t| format!("{s}:{t}")))
        .collect()
}

/// Vocabulary-restricted term frequencies, For slice then Against slice.
pub fn bow_features(counts: &BowCounts, vocab: &[Term]) -> FeatureVector {
    let values = Side::BOTH
        .into_iter()
        .flat_map(|s| vocab.iter().map(move |t| counts.side(s).get(t.as_str()) as f64))
        .collect();
    FeatureVector {
        debate_id: counts.debate_id.clone(),
        names: bow_names(vocab),
        values,
        label: counts.label,
    }
}
