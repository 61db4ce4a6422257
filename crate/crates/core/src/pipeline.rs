//! Corpus-level glue: feature matrices, LOO prediction and the paired
//! comparisons between winners and losers.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{reaction_counts, winner, Debate, ReactionKind, RoundKind, Side};
use crate::divergence::{DivergenceError, DEFAULT_ALPHA, DEFAULT_K};
use crate::features::{
    audience_features, flow_features, length_features, BowCounts, FeatureSet, FeatureVector, BOW_MIN_COUNT,
};
use crate::flow::{analyze, DebateFlow};
use crate::learn::{loo_evaluate, BowSource, EvalReport, FeatureSource, FixedSource, Grid, LearnError};
use crate::stats::{wilcoxon_signed_rank, Method, StatsError};
use crate::textproc::Stopwords;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("debate {id}: {source}")]
    Divergence {
        id: String,
        #[source]
        source: DivergenceError,
    },
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// Talking-point parameters and the stopword list.
#[derive(Debug, Clone)]
pub struct Params {
    pub k: usize,
    pub alpha: f64,
    pub stopwords: Stopwords,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            k: DEFAULT_K,
            alpha: DEFAULT_ALPHA,
            stopwords: Stopwords::english(),
        }
    }
}

/// Flow analysis of every debate, in input order.
pub fn analyze_all(debates: &[Debate], params: &Params) -> Result<Vec<DebateFlow>, PipelineError> {
    debates
        .par_iter()
        .map(|d| {
            analyze(d, params.k, params.alpha, &params.stopwords).map_err(|source| PipelineError::Divergence {
                id: d.id.clone(),
                source,
            })
        })
        .collect()
}

/// Debates with a winner; ties are dropped.
pub fn labeled(debates: &[Debate]) -> Vec<&Debate> {
    debates.iter().filter(|d| winner(d).winner().is_some()).collect()
}

/// Feature vectors of a fixed-column family for every debate, ties included.
///
/// # Panics
/// For [`FeatureSet::Bow`], whose columns depend on a training vocabulary.
pub fn feature_vectors(debates: &[Debate], fs: FeatureSet, params: &Params) -> Result<Vec<FeatureVector>, PipelineError> {
    match fs {
        FeatureSet::Flow | FeatureSet::FlowStar => {
            Ok(analyze_all(debates, params)?.iter().map(flow_features).collect())
        }
        FeatureSet::Length => Ok(debates.par_iter().map(length_features).collect()),
        FeatureSet::Audience => Ok(debates.par_iter().map(audience_features).collect()),
        FeatureSet::Bow => panic!("bag-of-words columns need a vocabulary"),
    }
}

/// The labeled debates as a learner input.
pub fn feature_source(
    debates: &[Debate],
    fs: FeatureSet,
    params: &Params,
) -> Result<Box<dyn FeatureSource>, PipelineError> {
    let kept: Vec<Debate> = labeled(debates).into_iter().cloned().collect();
    Ok(match fs {
        FeatureSet::Bow => {
            let counts = kept
                .par_iter()
                .map(|d| BowCounts::from_debate(d, &params.stopwords))
                .collect();
            Box::new(BowSource::new(counts, BOW_MIN_COUNT)?)
        }
        _ => Box::new(FixedSource::new(&feature_vectors(&kept, fs, params)?)?),
    })
}

pub fn predict(
    debates: &[Debate],
    fs: FeatureSet,
    grid: &Grid,
    seed: u64,
    params: &Params,
) -> Result<EvalReport, PipelineError> {
    let src = feature_source(debates, fs, params)?;
    Ok(loo_evaluate(src.as_ref(), grid, seed)?)
}

/// One paired Wilcoxon comparison over the corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub name: String,
    /// Which difference is tested, e.g. "winner - loser".
    pub difference: String,
    /// Number of pairs before zero differences are dropped.
    pub pairs: usize,
    /// Nonzero differences that were ranked.
    pub n: usize,
    pub statistic: Option<f64>,
    pub p_two_sided: Option<f64>,
    pub p_greater: Option<f64>,
    pub p_less: Option<f64>,
    /// Sign of W+ - W-: "positive", "negative" or "none".
    pub direction: String,
    pub method: Option<Method>,
    pub mean_difference: f64,
    pub median_difference: f64,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn compare(name: &str, difference: &str, diffs: Vec<f64>) -> Comparison {
    let mean = if diffs.is_empty() {
        f64::NAN
    } else {
        diffs.iter().sum::<f64>() / diffs.len() as f64
    };
    let median_difference = median(&diffs);
    let base = Comparison {
        name: name.to_string(),
        difference: difference.to_string(),
        pairs: diffs.len(),
        n: 0,
        statistic: None,
        p_two_sided: None,
        p_greater: None,
        p_less: None,
        direction: "none".to_string(),
        method: None,
        mean_difference: mean,
        median_difference,
    };
    match wilcoxon_signed_rank(&diffs) {
        Ok(r) => Comparison {
            n: r.n,
            statistic: Some(r.statistic),
            p_two_sided: Some(r.p_two_sided),
            p_greater: Some(r.p_greater),
            p_less: Some(r.p_less),
            direction: if r.w_plus > r.w_minus {
                "positive"
            } else if r.w_plus < r.w_minus {
                "negative"
            } else {
                "none"
            }
            .to_string(),
            method: Some(r.method),
            ..base
        },
        Err(StatsError::DegenerateSample | StatsError::EmptySample) => base,
        Err(e) => panic!("corpus statistics are finite: {e}"),
    }
}

/// The corpus-level tests: side-level coverage shifts between rounds, and
/// winner-minus-loser differences in reactions, coverage drops and adoption.
pub fn corpus_comparisons(debates: &[Debate], flows: &[DebateFlow]) -> Vec<Comparison> {
    assert_eq!(debates.len(), flows.len());
    let mut out = Vec::new();

    let per_side = |f: &dyn Fn(&DebateFlow, Side) -> f64| -> Vec<f64> {
        flows
            .iter()
            .flat_map(|fl| Side::BOTH.into_iter().map(move |s| (fl, s)))
            .map(|(fl, s)| f(fl, s))
            .collect()
    };
    let cov = |fl: &DebateFlow, s: Side, r: RoundKind| *fl.side(s).round(r);
    out.push(compare(
        "discussion_self_vs_opponent_coverage",
        "self - opponent coverage, discussion, per side",
        per_side(&|fl, s| {
            let c = cov(fl, s, RoundKind::Discussion);
            c.self_coverage - c.opponent_coverage
        }),
    ));
    out.push(compare(
        "self_coverage_shift",
        "discussion - introduction self-coverage, per side",
        per_side(&|fl, s| {
            cov(fl, s, RoundKind::Discussion).self_coverage - cov(fl, s, RoundKind::Introduction).self_coverage
        }),
    ));
    out.push(compare(
        "opponent_coverage_shift",
        "discussion - introduction opponent-coverage, per side",
        per_side(&|fl, s| {
            cov(fl, s, RoundKind::Discussion).opponent_coverage
                - cov(fl, s, RoundKind::Introduction).opponent_coverage
        }),
    ));

    let decided: Vec<(usize, Side)> = debates
        .iter()
        .enumerate()
        .filter_map(|(i, d)| winner(d).winner().map(|w| (i, w)))
        .collect();
    let paired = |f: &dyn Fn(usize, Side) -> f64| -> Vec<f64> {
        decided.iter().map(|&(i, w)| f(i, w) - f(i, w.opponent())).collect()
    };
    let tables: Vec<_> = debates.iter().map(reaction_counts).collect();
    for round in RoundKind::ALL {
        for kind in ReactionKind::ALL {
            out.push(compare(
                &format!("{}_{}", round.as_str(), kind.as_str()),
                "winner - loser reaction count",
                paired(&|i, s| f64::from(tables[i].get(s, round, kind))),
            ));
        }
    }
    out.push(compare(
        "self_coverage_drop",
        "winner - loser drop in self-coverage",
        paired(&|i, s| flows[i].side(s).self_coverage_drop),
    ));
    out.push(compare(
        "total_coverage_drop",
        "winner - loser drop in self- plus opponent-coverage",
        paired(&|i, s| flows[i].side(s).total_coverage_drop),
    ));
    out.push(compare(
        "adopted_points",
        "winner - loser discussion points adopted",
        paired(&|i, s| flows[i].side(s).adopted_points as f64),
    ));
    out
}
