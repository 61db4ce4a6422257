//! Talking-point coverage per round and spontaneously arising discussion
//! points.

use std::collections::HashMap;

use serde::Serialize;

use crate::corpus::{winner, Debate, RoundKind, Side, WinnerLabel};
use crate::divergence::{talking_points_for_terms, DivergenceError, TalkingPoints};
use crate::textproc::{debate_terms, Stopwords, Term, TermSequence};

/// Opponent occurrences needed before a newly introduced term counts.
pub const MIN_OPPONENT_USES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coverage {
    pub speaker: Side,
    pub target: Side,
    pub round: RoundKind,
    pub value: f64,
    /// Speaker's content terms in the round (the denominator).
    pub content_terms: usize,
    /// Set when the speaker uttered no content terms and `value` is 0 by rule.
    pub empty: bool,
}

/// Fraction of `speaker`'s content terms in `round` that are talking points
/// of `target`.
pub fn coverage(
    terms: &TermSequence,
    speaker: Side,
    target: Side,
    round: RoundKind,
    tps: &TalkingPoints,
) -> Coverage {
    let mut total = 0usize;
    let mut hits = 0usize;
    for o in terms.filter(speaker, round) {
        total += 1;
        if tps.contains(target, &o.term) {
            hits += 1;
        }
    }
    Coverage {
        speaker,
        target,
        round,
        value: if total == 0 { 0.0 } else { hits as f64 / total as f64 },
        content_terms: total,
        empty: total == 0,
    }
}

/// Self-coverage in the introduction minus self-coverage in the discussion.
/// Positive values are drops.
pub fn coverage_drop(terms: &TermSequence, side: Side, tps: &TalkingPoints) -> f64 {
    coverage(terms, side, side, RoundKind::Introduction, tps).value
        - coverage(terms, side, side, RoundKind::Discussion, tps).value
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscussionPoint {
    pub term: Term,
    pub introducer: Side,
    pub turn_index: usize,
    pub offset: usize,
    pub opponent_uses: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiscussionPoints {
    pub points: Vec<DiscussionPoint>,
    /// Terms whose first debater occurrence falls in the discussion round.
    pub newly_introduced: usize,
}

impl DiscussionPoints {
    /// Share of newly introduced terms that qualified.
    pub fn qualifying_fraction(&self) -> f64 {
        if self.newly_introduced == 0 {
            0.0
        } else {
            self.points.len() as f64 / self.newly_introduced as f64
        }
    }
}

/// Terms first uttered (over all debater speech) during the discussion and
/// then used at least twice by the other side later in the discussion.
/// Conclusion-round occurrences are ignored.
pub fn discussion_points(terms: &TermSequence) -> DiscussionPoints {
    struct Candidate {
        introducer: Side,
        turn_index: usize,
        offset: usize,
        opponent_uses: usize,
        order: usize,
    }

    let mut seen: HashMap<&Term, Option<usize>> = HashMap::new();
    let mut candidates: Vec<(&Term, Candidate)> = Vec::new();
    for o in &terms.occurrences {
        match seen.get(&o.term) {
            None => {
                let slot = (o.round == RoundKind::Discussion).then(|| {
                    candidates.push((
                        &o.term,
                        Candidate {
                            introducer: o.side,
                            turn_index: o.turn_index,
                            offset: o.offset,
                            opponent_uses: 0,
                            order: candidates.len(),
                        },
                    ));
                    candidates.len() - 1
                });
                seen.insert(&o.term, slot);
            }
            Some(Some(slot)) if o.round == RoundKind::Discussion => {
                let cand = &mut candidates[*slot].1;
                if o.side != cand.introducer {
                    cand.opponent_uses += 1;
                }
            }
            Some(_) => {}
        }
    }

    let newly_introduced = candidates.len();
    let mut points: Vec<(usize, DiscussionPoint)> = candidates
        .into_iter()
        .filter(|(_, c)| c.opponent_uses >= MIN_OPPONENT_USES)
        .map(|(term, c)| {
            (
                c.order,
                DiscussionPoint {
                    term: term.clone(),
                    introducer: c.introducer,
                    turn_index: c.turn_index,
                    offset: c.offset,
                    opponent_uses: c.opponent_uses,
                },
            )
        })
        .collect();
    points.sort_by_key(|(order, _)| *order);
    DiscussionPoints {
        points: points.into_iter().map(|(_, p)| p).collect(),
        newly_introduced,
    }
}

/// Discussion points `side` picked up from its opponent.
pub fn adopted_points(dps: &[DiscussionPoint], side: Side) -> usize {
    dps.iter().filter(|p| p.introducer == side.opponent()).count()
}

/// Coverage values of one side in one round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundCoverage {
    pub round: RoundKind,
    pub self_coverage: f64,
    pub opponent_coverage: f64,
    pub content_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideFlow {
    pub side: Side,
    pub rounds: Vec<RoundCoverage>,
    pub self_coverage_drop: f64,
    /// Drop of self + opponent coverage from introduction to discussion.
    pub total_coverage_drop: f64,
    pub adopted_points: usize,
}

impl SideFlow {
    pub fn round(&self, round: RoundKind) -> &RoundCoverage {
        &self.rounds[round.index()]
    }
}

/// Everything the flow analysis derives from one debate.
#[derive(Debug, Clone)]
pub struct DebateFlow {
    pub id: String,
    pub label: WinnerLabel,
    pub terms: TermSequence,
    pub talking_points: TalkingPoints,
    pub discussion: DiscussionPoints,
    pub sides: [SideFlow; 2],
}

impl DebateFlow {
    pub fn side(&self, side: Side) -> &SideFlow {
        &self.sides[side.index()]
    }
}

pub fn analyze_terms(
    id: &str,
    label: WinnerLabel,
    terms: TermSequence,
    k: usize,
    alpha: f64,
) -> Result<DebateFlow, DivergenceError> {
    let tps = talking_points_for_terms(&terms, k, alpha)?;
    let discussion = discussion_points(&terms);
    let side_flow = |side: Side| {
        let rounds: Vec<RoundCoverage> = RoundKind::ALL
            .into_iter()
            .map(|round| {
                let own = coverage(&terms, side, side, round, &tps);
                let opp = coverage(&terms, side, side.opponent(), round, &tps);
                RoundCoverage {
                    round,
                    self_coverage: own.value,
                    opponent_coverage: opp.value,
                    content_terms: own.content_terms,
                }
            })
            .collect();
        let intro = rounds[RoundKind::Introduction.index()];
        let disc = rounds[RoundKind::Discussion.index()];
        SideFlow {
            side,
            self_coverage_drop: intro.self_coverage - disc.self_coverage,
            total_coverage_drop: (intro.self_coverage + intro.opponent_coverage)
                - (disc.self_coverage + disc.opponent_coverage),
            adopted_points: adopted_points(&discussion.points, side),
            rounds,
        }
    };
    let sides = [side_flow(Side::For), side_flow(Side::Against)];
    Ok(DebateFlow {
        id: id.to_string(),
        label,
        terms,
        talking_points: tps,
        discussion,
        sides,
    })
}

pub fn analyze(
    d: &Debate,
    k: usize,
    alpha: f64,
    stopwords: &Stopwords,
) -> Result<DebateFlow, DivergenceError> {
    analyze_terms(&d.id, winner(d), debate_terms(d, stopwords), k, alpha)
}
