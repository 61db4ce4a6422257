//! Debate data model, canonical JSON ingestion, and winner labeling.
//!
//! A debate is stored as one JSON document with a vote tally and exactly
//! three rounds (introduction, discussion, conclusion). Parsing goes through
//! a permissive raw layer first so every validation failure can be reported
//! with a path into the document (`rounds[1].turns[4].role`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Allowed deviation of a vote tally from 100 percentage points.
pub const TALLY_TOLERANCE: f64 = 0.5;

/// Optional file inside a corpus directory listing the debate ids to load.
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: malformed JSON: {message}")]
    Json { path: String, message: String },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        CorpusError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    fn with_file(self, file: &Path) -> Self {
        let prefix = file.display().to_string();
        match self {
            CorpusError::Json { path, message } => CorpusError::Json {
                path: format!("{prefix}:{path}"),
                message,
            },
            CorpusError::Schema { path, message } => CorpusError::Schema {
                path: format!("{prefix}:{path}"),
                message,
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    For,
    Against,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::For, Side::Against];

    pub fn opponent(self) -> Side {
        match self {
            Side::For => Side::Against,
            Side::Against => Side::For,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::For => "for",
            Side::Against => "against",
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Side::For => 0,
            Side::Against => 1,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundKind {
    Introduction,
    Discussion,
    Conclusion,
}

impl RoundKind {
    /// Canonical round order of every debate.
    pub const ALL: [RoundKind; 3] = [
        RoundKind::Introduction,
        RoundKind::Discussion,
        RoundKind::Conclusion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RoundKind::Introduction => "introduction",
            RoundKind::Discussion => "discussion",
            RoundKind::Conclusion => "conclusion",
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            RoundKind::Introduction => 0,
            RoundKind::Discussion => 1,
            RoundKind::Conclusion => 2,
        }
    }

    fn parse(s: &str) -> Option<RoundKind> {
        RoundKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for RoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    ForDebater,
    AgainstDebater,
    Moderator,
    Audience,
    Other,
}

impl Role {
    const ALL: [Role; 5] = [
        Role::ForDebater,
        Role::AgainstDebater,
        Role::Moderator,
        Role::Audience,
        Role::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::ForDebater => "for-debater",
            Role::AgainstDebater => "against-debater",
            Role::Moderator => "moderator",
            Role::Audience => "audience",
            Role::Other => "other",
        }
    }

    /// The side a role speaks for; moderators, audience members and others
    /// speak for neither.
    pub fn side(self) -> Option<Side> {
        match self {
            Role::ForDebater => Some(Side::For),
            Role::AgainstDebater => Some(Side::Against),
            _ => None,
        }
    }

    fn parse(s: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReactionKind {
    Laughter,
    Applause,
}

impl ReactionKind {
    pub const ALL: [ReactionKind; 2] = [ReactionKind::Laughter, ReactionKind::Applause];

    pub fn as_str(self) -> &'static str {
        match self {
            ReactionKind::Laughter => "laughter",
            ReactionKind::Applause => "applause",
        }
    }

    fn parse(s: &str) -> Option<ReactionKind> {
        ReactionKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    fn index(self) -> usize {
        match self {
            ReactionKind::Laughter => 0,
            ReactionKind::Applause => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reaction {
    pub kind: ReactionKind,
    /// Token offset inside the turn text.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: String,
    pub role: Role,
    pub text: String,
    #[serde(default)]
    pub reactions: Vec<Reaction>,
}

impl Turn {
    pub fn side(&self) -> Option<Side> {
        self.role.side()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoteShares {
    #[serde(rename = "for")]
    pub for_pct: f64,
    #[serde(rename = "against")]
    pub against_pct: f64,
    #[serde(rename = "undecided")]
    pub undecided_pct: f64,
}

impl VoteShares {
    fn validate(&self, path: &str) -> Result<(), CorpusError> {
        for (name, v) in [
            ("for", self.for_pct),
            ("against", self.against_pct),
            ("undecided", self.undecided_pct),
        ] {
            if !v.is_finite() || !(0.0..=100.0).contains(&v) {
                return Err(CorpusError::schema(
                    format!("{path}.{name}"),
                    format!("percentage {v} outside [0, 100]"),
                ));
            }
        }
        let total = self.for_pct + self.against_pct + self.undecided_pct;
        if (total - 100.0).abs() > TALLY_TOLERANCE {
            return Err(CorpusError::schema(
                path,
                format!("vote shares sum to {total}, expected 100 ± {TALLY_TOLERANCE}"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoteTally {
    pub pre: VoteShares,
    pub post: VoteShares,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub kind: RoundKind,
    pub turns: Vec<Turn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Debate {
    pub id: String,
    pub motion: String,
    pub tally: VoteTally,
    pub rounds: Vec<Round>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    ForWins,
    AgainstWins,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinnerLabel {
    pub outcome: Outcome,
    pub delta_for: f64,
    pub delta_against: f64,
}

impl WinnerLabel {
    pub fn winner(&self) -> Option<Side> {
        match self.outcome {
            Outcome::ForWins => Some(Side::For),
            Outcome::AgainstWins => Some(Side::Against),
            Outcome::Tie => None,
        }
    }
}

/// A debater turn together with where it sits in the transcript.
#[derive(Debug, Clone, Copy)]
pub struct SideTurn<'a> {
    pub side: Side,
    pub round: RoundKind,
    /// Index of the turn inside its round's turn list.
    pub index: usize,
    pub turn: &'a Turn,
}

impl Debate {
    pub fn round(&self, kind: RoundKind) -> &Round {
        // validated debates hold the rounds in canonical order
        &self.rounds[kind.index()]
    }

    /// Every debater turn of the debate in transcript order.
    pub fn debater_turns(&self) -> impl Iterator<Item = SideTurn<'_>> {
        self.rounds.iter().flat_map(|round| {
            round.turns.iter().enumerate().filter_map(move |(index, turn)| {
                turn.side().map(|side| SideTurn {
                    side,
                    round: round.kind,
                    index,
                    turn,
                })
            })
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("debate serializes")
    }
}

pub fn winner(d: &Debate) -> WinnerLabel {
    let delta_for = d.tally.post.for_pct - d.tally.pre.for_pct;
    let delta_against = d.tally.post.against_pct - d.tally.pre.against_pct;
    let outcome = if delta_for > delta_against {
        Outcome::ForWins
    } else if delta_against > delta_for {
        Outcome::AgainstWins
    } else {
        Outcome::Tie
    };
    WinnerLabel {
        outcome,
        delta_for,
        delta_against,
    }
}

/// All turns of round `r` spoken for side `s`, in transcript order.
pub fn side_turns(d: &Debate, s: Side, r: RoundKind) -> Vec<SideTurn<'_>> {
    d.round(r)
        .turns
        .iter()
        .enumerate()
        .filter(|(_, t)| t.side() == Some(s))
        .map(|(index, turn)| SideTurn {
            side: s,
            round: r,
            index,
            turn,
        })
        .collect()
}

/// Reaction counts indexed by (side, round, kind).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReactionTable {
    counts: [[[u32; 2]; 3]; 2],
}

impl ReactionTable {
    pub fn get(&self, side: Side, round: RoundKind, kind: ReactionKind) -> u32 {
        self.counts[side.index()][round.index()][kind.index()]
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().flatten().flatten().sum()
    }

    fn bump(&mut self, side: Side, round: RoundKind, kind: ReactionKind) {
        self.counts[side.index()][round.index()][kind.index()] += 1;
    }
}

/// Reactions attributed to the side of the turn they are annotated on.
pub fn reaction_counts(d: &Debate) -> ReactionTable {
    let mut table = ReactionTable::default();
    for st in d.debater_turns() {
        for reaction in &st.turn.reactions {
            table.bump(st.side, st.round, reaction.kind);
        }
    }
    table
}

// Raw document layer. Enumerations are kept as strings here so that an
// unknown value can be reported with its location.

#[derive(Deserialize)]
struct RawDebate {
    id: Option<String>,
    motion: Option<String>,
    tally: Option<VoteTally>,
    rounds: Option<Vec<RawRound>>,
}

#[derive(Deserialize)]
struct RawRound {
    kind: String,
    #[serde(default)]
    turns: Vec<RawTurn>,
}

#[derive(Deserialize)]
struct RawTurn {
    speaker: String,
    role: String,
    #[serde(default)]
    text: String,
    #[serde(default)]
    reactions: Vec<RawReaction>,
}

#[derive(Deserialize)]
struct RawReaction {
    kind: String,
    position: usize,
}

pub fn parse_debate(json_text: &str) -> Result<Debate, CorpusError> {
    let raw: RawDebate = serde_json::from_str(json_text).map_err(|e| CorpusError::Json {
        path: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;

    let id = raw
        .id
        .ok_or_else(|| CorpusError::schema("id", "missing field"))?;
    if id.trim().is_empty() {
        return Err(CorpusError::schema("id", "empty debate id"));
    }
    let motion = raw
        .motion
        .ok_or_else(|| CorpusError::schema("motion", "missing field"))?;
    let tally = raw
        .tally
        .ok_or_else(|| CorpusError::schema("tally", "missing field"))?;
    tally.pre.validate("tally.pre")?;
    tally.post.validate("tally.post")?;
    let raw_rounds = raw
        .rounds
        .ok_or_else(|| CorpusError::schema("rounds", "missing field"))?;

    let mut rounds = Vec::with_capacity(raw_rounds.len());
    for (ri, rr) in raw_rounds.into_iter().enumerate() {
        let kind = RoundKind::parse(&rr.kind).ok_or_else(|| {
            CorpusError::schema(
                format!("rounds[{ri}].kind"),
                format!("unknown round kind {:?}", rr.kind),
            )
        })?;
        let mut turns = Vec::with_capacity(rr.turns.len());
        for (ti, rt) in rr.turns.into_iter().enumerate() {
            let path = format!("rounds[{ri}].turns[{ti}]");
            let role = Role::parse(&rt.role).ok_or_else(|| {
                CorpusError::schema(format!("{path}.role"), format!("unknown role {:?}", rt.role))
            })?;
            let mut reactions = Vec::with_capacity(rt.reactions.len());
            for (xi, rx) in rt.reactions.into_iter().enumerate() {
                let kind = ReactionKind::parse(&rx.kind).ok_or_else(|| {
                    CorpusError::schema(
                        format!("{path}.reactions[{xi}].kind"),
                        format!("unknown reaction kind {:?}", rx.kind),
                    )
                })?;
                reactions.push(Reaction {
                    kind,
                    position: rx.position,
                });
            }
            if rt.text.is_empty() && reactions.is_empty() {
                return Err(CorpusError::schema(
                    format!("{path}.text"),
                    "empty text is only allowed on turns carrying reactions",
                ));
            }
            turns.push(Turn {
                speaker: rt.speaker,
                role,
                text: rt.text,
                reactions,
            });
        }
        rounds.push(Round { kind, turns });
    }

    let debate = Debate {
        id,
        motion,
        tally,
        rounds,
    };
    validate_rounds(&debate)?;
    Ok(debate)
}

fn validate_rounds(d: &Debate) -> Result<(), CorpusError> {
    for kind in RoundKind::ALL {
        let n = d.rounds.iter().filter(|r| r.kind == kind).count();
        if n == 0 {
            return Err(CorpusError::schema(
                "rounds",
                format!("missing {kind} round"),
            ));
        }
        if n > 1 {
            return Err(CorpusError::schema(
                "rounds",
                format!("{kind} round appears {n} times"),
            ));
        }
    }
    for (i, (round, expected)) in d.rounds.iter().zip(RoundKind::ALL).enumerate() {
        if round.kind != expected {
            return Err(CorpusError::schema(
                format!("rounds[{i}].kind"),
                format!("expected {expected} round at this position, found {}", round.kind),
            ));
        }
    }
    for side in Side::BOTH {
        if !d.debater_turns().any(|t| t.side == side) {
            return Err(CorpusError::schema(
                "rounds",
                format!("debate has no {side} turns"),
            ));
        }
    }
    Ok(())
}

pub fn load_debate(path: &Path) -> Result<Debate, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_debate(&text).map_err(|e| e.with_file(path))
}

/// A set of debates sorted by id.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub debates: Vec<Debate>,
}

impl Corpus {
    pub fn new(mut debates: Vec<Debate>) -> Result<Corpus, CorpusError> {
        debates.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in debates.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(CorpusError::schema(
                    "id",
                    format!("duplicate debate id {:?}", pair[0].id),
                ));
            }
        }
        Ok(Corpus { debates })
    }

    /// Loads every `*.json` file of `dir` (except the manifest). When a
    /// manifest is present only the listed ids are kept, and each must exist.
    pub fn load_dir(dir: &Path) -> Result<Corpus, CorpusError> {
        let files = corpus_files(dir)?;
        let debates = files
            .par_iter()
            .map(|p| load_debate(p))
            .collect::<Result<Vec<_>, _>>()?;
        let mut corpus = Corpus::new(debates)?;

        let manifest = dir.join(MANIFEST_FILE);
        if manifest.exists() {
            let ids = read_manifest(&manifest)?;
            let present: BTreeSet<&str> = corpus.debates.iter().map(|d| d.id.as_str()).collect();
            if let Some(missing) = ids.iter().find(|id| !present.contains(id.as_str())) {
                return Err(CorpusError::schema(
                    manifest.display().to_string(),
                    format!("manifest lists {missing:?} but no such debate was found"),
                ));
            }
            let wanted: BTreeSet<String> = ids.into_iter().collect();
            corpus.debates.retain(|d| wanted.contains(&d.id));
        }
        Ok(corpus)
    }

    pub fn len(&self) -> usize {
        self.debates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.debates.is_empty()
    }

    /// SHA-256 over the canonical JSON of every debate in id order; file
    /// names and formatting do not enter.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for d in &self.debates {
            h.update(d.to_json().as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    pub fn summary(&self) -> CorpusSummary {
        let n = self.debates.len();
        let mut words = 0usize;
        let mut turns = 0usize;
        let mut outcomes: BTreeMap<&'static str, usize> = BTreeMap::new();
        for d in &self.debates {
            for t in d.debater_turns() {
                turns += 1;
                words += crate::textproc::tokenize(&t.turn.text).len();
            }
            let key = match winner(d).outcome {
                Outcome::ForWins => "for-wins",
                Outcome::AgainstWins => "against-wins",
                Outcome::Tie => "tie",
            };
            *outcomes.entry(key).or_default() += 1;
        }
        let denom = n.max(1) as f64;
        CorpusSummary {
            debates: n,
            mean_words: words as f64 / denom,
            mean_turns: turns as f64 / denom,
            for_wins: outcomes.get("for-wins").copied().unwrap_or(0),
            against_wins: outcomes.get("against-wins").copied().unwrap_or(0),
            ties: outcomes.get("tie").copied().unwrap_or(0),
        }
    }
}

/// Debater words and turns per debate, summed over both sides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub debates: usize,
    pub mean_words: f64,
    pub mean_turns: f64,
    pub for_wins: usize,
    pub against_wins: usize,
    pub ties: usize,
}

/// Debate files of a corpus directory in sorted order.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        let is_json = path.extension().is_some_and(|e| e == "json");
        let is_manifest = path.file_name().is_some_and(|n| n == MANIFEST_FILE);
        if path.is_file() && is_json && !is_manifest {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn read_manifest(path: &Path) -> Result<Vec<String>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str::<Vec<String>>(&text).map_err(|e| CorpusError::Json {
        path: path.display().to_string(),
        message: format!("manifest must be a JSON array of debate ids: {e}"),
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn turn(role: Role, text: &str) -> Turn {
        Turn {
            speaker: role.as_str().to_string(),
            role,
            text: text.to_string(),
            reactions: Vec::new(),
        }
    }

    /// Builds a validated debate from per-round turn lists.
    pub fn debate(id: &str, rounds: [Vec<Turn>; 3], pre: [f64; 3], post: [f64; 3]) -> Debate {
        let shares = |v: [f64; 3]| VoteShares {
            for_pct: v[0],
            against_pct: v[1],
            undecided_pct: v[2],
        };
        let d = Debate {
            id: id.to_string(),
            motion: "test motion".to_string(),
            tally: VoteTally {
                pre: shares(pre),
                post: shares(post),
            },
            rounds: RoundKind::ALL
                .into_iter()
                .zip(rounds)
                .map(|(kind, turns)| Round { kind, turns })
                .collect(),
        };
        parse_debate(&d.to_json()).expect("fixture is valid")
    }

    pub fn minimal() -> Debate {
        let r = || {
            vec![
                turn(Role::ForDebater, "one two three four five"),
                turn(Role::AgainstDebater, "six seven eight nine ten"),
            ]
        };
        debate("minimal", [r(), r(), r()], [30.0, 30.0, 40.0], [50.0, 35.0, 15.0])
    }
}
