//! Seeded generator of synthetic debates with planted talking points,
//! planted discussion points and a tunable link between flow behaviour and
//! the winner.
//!
//! Text is drawn from a unigram distribution over a fixed list of pseudo
//! words, each of which is a fixed point of the stemmer and not a stopword,
//! so every generated word survives normalization unchanged.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    Debate, Reaction, ReactionKind, Role, Round, RoundKind, Side, Turn, VoteShares, VoteTally,
};
use crate::textproc::{stem, Stopwords};

/// Number of distinct pseudo words available.
pub const WORDLIST_LEN: usize = 4000;

const INTRO_TURNS_PER_SIDE: usize = 3;
const INTRO_WORDS_PER_TURN: usize = 2000;
const DISCUSSION_TURNS: usize = 16;
const DISCUSSION_WORDS_PER_TURN: usize = 150;
const CONCLUSION_WORDS: usize = 200;
const FILLER_RATE: f64 = 0.4;
const FILLERS: &[&str] = &["the", "of", "and", "to", "we", "that", "is", "in", "it", "this"];
/// Share of planted discussion points introduced by the side that loses
/// the flow contest.
const LOSER_INTRODUCES: f64 = 0.75;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("inconsistent synth spec: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_debates: usize,
    pub vocab_size: usize,
    pub planted_tp_per_side: usize,
    pub tp_frequency_boost: f64,
    pub planted_dp_per_debate: usize,
    /// Probability that a debate's flow behaviour follows its winner.
    pub signal_strength: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 0,
            n_debates: 40,
            vocab_size: 500,
            planted_tp_per_side: 20,
            tp_frequency_boost: 6.0,
            planted_dp_per_debate: 6,
            signal_strength: 1.0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Inconsistent(m));
        if self.n_debates == 0 {
            return bad("n_debates must be positive".into());
        }
        if self.vocab_size > WORDLIST_LEN {
            return bad(format!("vocab_size {} exceeds the {WORDLIST_LEN}-word list", self.vocab_size));
        }
        let reserved = 2 * self.planted_tp_per_side + self.planted_dp_per_debate;
        if reserved >= self.vocab_size {
            return bad(format!(
                "2 x {} planted talking points + {} discussion points do not fit a vocabulary of {}",
                self.planted_tp_per_side, self.planted_dp_per_debate, self.vocab_size
            ));
        }
        if !(self.tp_frequency_boost.is_finite() && self.tp_frequency_boost > 1.0) {
            return bad(format!("tp_frequency_boost must exceed 1, got {}", self.tp_frequency_boost));
        }
        if !(0.0..=1.0).contains(&self.signal_strength) {
            return bad(format!("signal_strength must lie in [0, 1], got {}", self.signal_strength));
        }
        Ok(())
    }
}

/// A generated debate with the ground truth planted into it.
#[derive(Debug, Clone)]
pub struct SynthDebate {
    pub debate: Debate,
    pub planted_for: BTreeSet<String>,
    pub planted_against: BTreeSet<String>,
    pub planted_discussion_points: BTreeSet<String>,
    /// Side whose flow behaviour mimics a winner.
    pub flow_winner: Side,
}

impl SynthDebate {
    pub fn planted(&self, side: Side) -> &BTreeSet<String> {
        match side {
            Side::For => &self.planted_for,
            Side::Against => &self.planted_against,
        }
    }
}

fn wordlist() -> &'static [String] {
    static WORDS: OnceLock<Vec<String>> = OnceLock::new();
    WORDS.get_or_init(|| {
        const CONS: &[u8] = b"bdfgklmnprtvz";
        const VOWELS: &[u8] = b"aiou";
        let stopwords = Stopwords::english();
        let syllables: Vec<[u8; 2]> = CONS
            .iter()
            .flat_map(|&c| VOWELS.iter().map(move |&v| [c, v]))
            .collect();
        let n = syllables.len();
        let mut out = Vec::with_capacity(WORDLIST_LEN);
        // walk the syllable cube with a stride coprime to its size so that
        // consecutive words differ in every position
        let total = n * n * n;
        let mut idx = 0usize;
        for _ in 0..total {
            idx = (idx + 7919) % total;
            let (a, b, c) = (idx / (n * n), (idx / n) % n, idx % n);
            let word: String = [syllables[a], syllables[b], syllables[c]]
                .iter()
                .flatten()
                .map(|&b| b as char)
                .collect();
            if stem(&word) == word && !stopwords.contains(&word) {
                out.push(word);
                if out.len() == WORDLIST_LEN {
                    break;
                }
            }
        }
        assert_eq!(out.len(), WORDLIST_LEN, "syllable space too small");
        out
    })
}

/// The `i`-th pseudo word; stable across releases of the word list.
pub fn word_for_index(i: usize) -> String {
    wordlist()[i].clone()
}

pub fn generate(spec: &SynthSpec) -> Result<Vec<Debate>, SynthError> {
    Ok(generate_with_truth(spec)?
        .into_iter()
        .map(|s| s.debate)
        .collect())
}

pub fn generate_with_truth(spec: &SynthSpec) -> Result<Vec<SynthDebate>, SynthError> {
    spec.validate()?;
    Ok((0..spec.n_debates)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i as u64);
            generate_one(spec, i, &mut rng)
        })
        .collect())
}

struct Writer<'a> {
    words: &'a [String],
}

impl Writer<'_> {
    /// Content words drawn from `dist`, interleaved with stopword filler.
    fn text(&self, rng: &mut ChaCha8Rng, pool: &[usize], dist: &WeightedIndex<f64>, n: usize) -> Vec<String> {
        let mut out = Vec::with_capacity(n * 2);
        for _ in 0..n {
            if rng.gen_bool(FILLER_RATE) {
                out.push(FILLERS[rng.gen_range(0..FILLERS.len())].to_string());
            }
            out.push(self.words[pool[dist.sample(rng)]].clone());
        }
        out
    }
}

fn join(tokens: &[String]) -> String {
    let mut s = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            s.push(if i % 12 == 0 { '.' } else { ' ' });
            if i % 12 == 0 {
                s.push(' ');
            }
        }
        s.push_str(t);
    }
    s.push('.');
    s
}

fn debater(side: Side, slot: usize) -> (String, Role) {
    let role = match side {
        Side::For => Role::ForDebater,
        Side::Against => Role::AgainstDebater,
    };
    (format!("{side}-{}", slot + 1), role)
}

fn random_reactions(rng: &mut ChaCha8Rng, tokens: usize) -> Vec<Reaction> {
    let mut out = Vec::new();
    for kind in ReactionKind::ALL {
        if tokens > 0 && rng.gen_bool(0.2) {
            out.push(Reaction {
                kind,
                position: rng.gen_range(0..tokens),
            });
        }
    }
    out.sort_by_key(|r| r.position);
    out
}

fn generate_one(spec: &SynthSpec, index: usize, rng: &mut ChaCha8Rng) -> SynthDebate {
    let words = &wordlist()[..spec.vocab_size];
    let writer = Writer { words };
    let mut order: Vec<usize> = (0..spec.vocab_size).collect();
    order.shuffle(rng);
    let k = spec.planted_tp_per_side;
    let planted_for: Vec<usize> = order[..k].to_vec();
    let planted_against: Vec<usize> = order[k..2 * k].to_vec();
    let dp_words: Vec<usize> = order[2 * k..2 * k + spec.planted_dp_per_debate].to_vec();
    let background: Vec<usize> = order[..2 * k]
        .iter()
        .chain(&order[2 * k + spec.planted_dp_per_debate..])
        .copied()
        .collect();
    let is_planted = |w: usize, side: Side| match side {
        Side::For => planted_for.contains(&w),
        Side::Against => planted_against.contains(&w),
    };

    let winner = if rng.gen_bool(0.5) { Side::For } else { Side::Against };
    let flow_winner = if rng.gen_bool(spec.signal_strength) {
        winner
    } else if rng.gen_bool(0.5) {
        Side::For
    } else {
        Side::Against
    };

    let weights = |pool: &[usize], side: Side, own: f64, opp: f64| {
        let w: Vec<f64> = pool
            .iter()
            .map(|&w| {
                if is_planted(w, side) {
                    own
                } else if is_planted(w, side.opponent()) {
                    opp
                } else {
                    1.0
                }
            })
            .collect();
        WeightedIndex::new(w).expect("positive weights")
    };

    // introduction: prepared statements biased towards own talking points
    let boost = spec.tp_frequency_boost;
    let mut intro = Vec::new();
    let mut intro_used = BTreeSet::new();
    for slot in 0..INTRO_TURNS_PER_SIDE {
        for side in Side::BOTH {
            let dist = weights(&background, side, boost, 1.0);
            let tokens = writer.text(rng, &background, &dist, INTRO_WORDS_PER_TURN);
            intro_used.extend(tokens.iter().cloned());
            let (speaker, role) = debater(side, slot);
            let reactions = random_reactions(rng, tokens.len());
            intro.push(Turn {
                speaker,
                role,
                text: join(&tokens),
                reactions,
            });
        }
    }
    // later rounds only draw from words already spoken, so nothing but the
    // planted discussion points can be newly introduced
    let spoken: Vec<usize> = background
        .iter()
        .copied()
        .filter(|&w| intro_used.contains(&words[w]))
        .collect();

    // discussion
    let first = if rng.gen_bool(0.5) { Side::For } else { Side::Against };
    let speakers: Vec<Side> = (0..DISCUSSION_TURNS)
        .map(|t| if t % 2 == 0 { first } else { first.opponent() })
        .collect();
    let mut disc_tokens: Vec<Vec<String>> = speakers
        .iter()
        .map(|&side| {
            let (own, opp) = if side == flow_winner {
                (1.0, boost / 2.0)
            } else {
                (boost, 1.0)
            };
            let dist = weights(&spoken, side, own, opp);
            writer.text(rng, &spoken, &dist, DISCUSSION_WORDS_PER_TURN)
        })
        .collect();

    let flow_loser = flow_winner.opponent();
    for &dp in &dp_words {
        let introducer = if rng.gen_bool(LOSER_INTRODUCES) {
            flow_loser
        } else {
            flow_winner
        };
        // introduce early enough that the opponent still speaks afterwards
        let candidates: Vec<usize> = (0..DISCUSSION_TURNS - 2)
            .filter(|&t| speakers[t] == introducer)
            .collect();
        let at = candidates[rng.gen_range(0..candidates.len())];
        let later: Vec<usize> = (at + 1..DISCUSSION_TURNS)
            .filter(|&t| speakers[t] == introducer.opponent())
            .collect();
        insert_word(rng, &mut disc_tokens[at], &words[dp]);
        for _ in 0..rng.gen_range(2..=3) {
            let t = later[rng.gen_range(0..later.len())];
            insert_word(rng, &mut disc_tokens[t], &words[dp]);
        }
    }

    let moderator_dist = WeightedIndex::new(vec![1.0; spoken.len()]).expect("non-empty");
    let mut discussion = Vec::new();
    let mut slots = [0usize; 2];
    for (t, tokens) in disc_tokens.into_iter().enumerate() {
        if t % 4 == 0 {
            let mod_tokens = writer.text(rng, &spoken, &moderator_dist, 20);
            discussion.push(Turn {
                speaker: "moderator".into(),
                role: Role::Moderator,
                text: join(&mod_tokens),
                reactions: Vec::new(),
            });
        }
        let side = speakers[t];
        let slot = &mut slots[side.index()];
        let (speaker, role) = debater(side, *slot % INTRO_TURNS_PER_SIDE);
        *slot += 1;
        let reactions = random_reactions(rng, tokens.len());
        discussion.push(Turn {
            speaker,
            role,
            text: join(&tokens),
            reactions,
        });
    }

    let mut conclusion = Vec::new();
    for side in Side::BOTH {
        let dist = weights(&spoken, side, boost / 2.0, 1.0);
        let tokens = writer.text(rng, &spoken, &dist, CONCLUSION_WORDS);
        let (speaker, role) = debater(side, 0);
        let reactions = random_reactions(rng, tokens.len());
        conclusion.push(Turn {
            speaker,
            role,
            text: join(&tokens),
            reactions,
        });
    }

    let tally = random_tally(rng, winner);
    let name = |ws: &[usize]| ws.iter().map(|&w| words[w].clone()).collect::<BTreeSet<_>>();
    SynthDebate {
        debate: Debate {
            id: format!("synth-{:016x}-{index:04}", spec.seed),
            motion: format!("synthetic motion {index}"),
            tally,
            rounds: vec![
                Round {
                    kind: RoundKind::Introduction,
                    turns: intro,
                },
                Round {
                    kind: RoundKind::Discussion,
                    turns: discussion,
                },
                Round {
                    kind: RoundKind::Conclusion,
                    turns: conclusion,
                },
            ],
        },
        planted_for: name(&planted_for),
        planted_against: name(&planted_against),
        planted_discussion_points: name(&dp_words),
        flow_winner,
    }
}

fn insert_word(rng: &mut ChaCha8Rng, tokens: &mut Vec<String>, word: &str) {
    let at = rng.gen_range(0..=tokens.len());
    tokens.insert(at, word.to_string());
}

/// Integer vote shares in which `winner` gains strictly more than the other side.
fn random_tally(rng: &mut ChaCha8Rng, winner: Side) -> VoteTally {
    let pre_for: i32 = rng.gen_range(20..=40);
    let pre_against: i32 = rng.gen_range(20..=40);
    let pre_undecided = 100 - pre_for - pre_against;
    let win_delta: i32 = rng.gen_range(2..=10);
    let lose_delta: i32 = rng.gen_range(-5..win_delta);
    let (delta_for, delta_against) = match winner {
        Side::For => (win_delta, lose_delta),
        Side::Against => (lose_delta, win_delta),
    };
    let shares = |f: i32, a: i32, u: i32| VoteShares {
        for_pct: f as f64,
        against_pct: a as f64,
        undecided_pct: u as f64,
    };
    VoteTally {
        pre: shares(pre_for, pre_against, pre_undecided),
        post: shares(
            pre_for + delta_for,
            pre_against + delta_against,
            pre_undecided - delta_for - delta_against,
        ),
    }
}
