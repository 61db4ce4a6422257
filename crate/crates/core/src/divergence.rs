//! Log-odds-ratio divergence with a uniform Dirichlet prior, and talking
//! points: the introduction-round terms that most separate the two sides.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Debate, RoundKind, Side};
use crate::textproc::{debate_terms, Stopwords, Term, TermSequence};

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_K: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum DivergenceError {
    #[error("prior pseudocount must be a positive finite number, got {0}")]
    InvalidAlpha(f64),
    #[error("both term tables are empty")]
    EmptyTables,
    #[error("log-odds need at least two distinct terms across both tables")]
    SingleTermVocabulary,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("the {0} side utters no content terms in the introduction")]
    EmptyIntroduction(Side),
    #[error("introduction vocabulary has {vocab} terms but 2k = {needed} are required ({shortfall} short)", shortfall = needed - vocab)]
    VocabularyTooSmall { vocab: usize, needed: usize },
}

/// Multiset of terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermTable {
    counts: BTreeMap<Term, u64>,
    total: u64,
}

impl TermTable {
    pub fn from_terms<'a>(terms: impl IntoIterator<Item = &'a Term>) -> TermTable {
        let mut table = TermTable::default();
        for t in terms {
            table.add(t.clone(), 1);
        }
        table
    }

    pub fn add(&mut self, term: Term, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(term).or_default() += count;
        self.total += count;
    }

    pub fn get(&self, term: &str) -> u64 {
        self.counts.get(term).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn vocabulary_size(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, u64)> {
        self.counts.iter().map(|(t, &c)| (t, c))
    }
}

pub fn term_table(seq: &TermSequence) -> TermTable {
    TermTable::from_terms(seq.terms())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZScores {
    pub alpha: f64,
    pub z: BTreeMap<Term, f64>,
}

impl ZScores {
    pub fn get(&self, term: &str) -> Option<f64> {
        self.z.get(term).copied()
    }
}

/// Per-term z-scores of the smoothed log-odds ratio between `a` and `b`.
/// Positive values lean towards `a`.
///
/// With `y` a term's count, `n` a table's total, `V` the union vocabulary and
/// `a0 = alpha * V`:
///
/// ```text
/// delta = ln((ya + alpha) / (na + a0 - ya - alpha)) - ln((yb + alpha) / (nb + a0 - yb - alpha))
/// var   = 1 / (ya + alpha) + 1 / (yb + alpha)
/// z     = delta / sqrt(var)
/// ```
pub fn log_odds_z(a: &TermTable, b: &TermTable, alpha: f64) -> Result<ZScores, DivergenceError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(DivergenceError::InvalidAlpha(alpha));
    }
    if a.is_empty() && b.is_empty() {
        return Err(DivergenceError::EmptyTables);
    }
    let vocab: BTreeSet<&Term> = a.counts.keys().chain(b.counts.keys()).collect();
    if vocab.len() < 2 {
        // the odds against the only term have a zero denominator
        return Err(DivergenceError::SingleTermVocabulary);
    }
    let alpha0 = alpha * vocab.len() as f64;
    let (na, nb) = (a.total as f64, b.total as f64);
    let log_odds = |y: f64, n: f64| ((y + alpha) / (n + alpha0 - y - alpha)).ln();

    let z = vocab
        .into_iter()
        .map(|term| {
            let ya = a.get(term.as_str()) as f64;
            let yb = b.get(term.as_str()) as f64;
            let delta = log_odds(ya, na) - log_odds(yb, nb);
            let var = 1.0 / (ya + alpha) + 1.0 / (yb + alpha);
            // adding 0.0 folds -0.0 into 0.0
            (term.clone(), delta / var.sqrt() + 0.0)
        })
        .collect();
    Ok(ZScores { alpha, z })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TalkingPointSet {
    pub side: Side,
    pub points: Vec<(Term, f64)>,
}

impl TalkingPointSet {
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.points.iter().map(|(t, _)| t)
    }
}

/// Both sides' talking points plus the parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TalkingPoints {
    pub for_side: TalkingPointSet,
    pub against_side: TalkingPointSet,
    pub alpha: f64,
    pub k: usize,
    for_lookup: HashSet<Term>,
    against_lookup: HashSet<Term>,
}

impl TalkingPoints {
    fn new(for_side: TalkingPointSet, against_side: TalkingPointSet, alpha: f64, k: usize) -> Self {
        let for_lookup = for_side.terms().cloned().collect();
        let against_lookup = against_side.terms().cloned().collect();
        TalkingPoints {
            for_side,
            against_side,
            alpha,
            k,
            for_lookup,
            against_lookup,
        }
    }

    pub fn set(&self, side: Side) -> &TalkingPointSet {
        match side {
            Side::For => &self.for_side,
            Side::Against => &self.against_side,
        }
    }

    /// Whether `term` is one of `side`'s talking points.
    pub fn contains(&self, side: Side, term: &Term) -> bool {
        match side {
            Side::For => self.for_lookup.contains(term),
            Side::Against => self.against_lookup.contains(term),
        }
    }
}

/// Talking points from two term tables: the `k` highest z-scores belong to
/// `for_table`'s side and the `k` lowest to the other. Terms are ranked by
/// z-score and then by term, so ties resolve deterministically.
pub fn talking_points_from_tables(
    for_table: &TermTable,
    against_table: &TermTable,
    k: usize,
    alpha: f64,
) -> Result<TalkingPoints, DivergenceError> {
    if k == 0 {
        return Err(DivergenceError::InvalidK);
    }
    if for_table.is_empty() {
        return Err(DivergenceError::EmptyIntroduction(Side::For));
    }
    if against_table.is_empty() {
        return Err(DivergenceError::EmptyIntroduction(Side::Against));
    }
    let scores = log_odds_z(for_table, against_table, alpha)?;
    if scores.z.len() < 2 * k {
        return Err(DivergenceError::VocabularyTooSmall {
            vocab: scores.z.len(),
            needed: 2 * k,
        });
    }
    let mut ranked: Vec<(Term, f64)> = scores.z.into_iter().collect();
    ranked.sort_by(|(ta, za), (tb, zb)| zb.total_cmp(za).then_with(|| ta.cmp(tb)));
    // the Against side reads the same total order from the far end, so the
    // two sets cannot overlap even when z-scores tie across the cut
    let top: Vec<_> = ranked[..k].to_vec();
    let bottom: Vec<_> = ranked.iter().rev().take(k).cloned().collect();
    Ok(TalkingPoints::new(
        TalkingPointSet {
            side: Side::For,
            points: top,
        },
        TalkingPointSet {
            side: Side::Against,
            points: bottom,
        },
        alpha,
        k,
    ))
}

/// Introduction-round term tables of both sides.
pub fn introduction_tables(terms: &TermSequence) -> (TermTable, TermTable) {
    let table = |side| {
        TermTable::from_terms(
            terms
                .filter(side, RoundKind::Introduction)
                .map(|o| &o.term),
        )
    };
    (table(Side::For), table(Side::Against))
}

pub fn talking_points(
    d: &Debate,
    k: usize,
    alpha: f64,
    stopwords: &Stopwords,
) -> Result<TalkingPoints, DivergenceError> {
    let terms = debate_terms(d, stopwords);
    talking_points_for_terms(&terms, k, alpha)
}

/// Same as [`talking_points`] for an already extracted term sequence.
pub fn talking_points_for_terms(
    terms: &TermSequence,
    k: usize,
    alpha: f64,
) -> Result<TalkingPoints, DivergenceError> {
    let (for_table, against_table) = introduction_tables(terms);
    talking_points_from_tables(&for_table, &against_table, k, alpha)
}
