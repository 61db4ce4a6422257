//! Browser bindings. Every export takes plain values and returns a JSON
//! string; the page in `www/` renders it.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use ideaflow::corpus::RoundKind;
use ideaflow::divergence::{talking_points_from_tables, TermTable};
use ideaflow::features::FeatureSet;
use ideaflow::learn::Grid;
use ideaflow::pipeline::{analyze_all, predict, Params};
use ideaflow::synth::{generate, SynthSpec};
use ideaflow::textproc::{normalize, tokenize, Stopwords, Term};

#[derive(Serialize)]
struct TalkingPointsView {
    #[serde(rename = "for")]
    for_side: Vec<(Term, f64)>,
    against: Vec<(Term, f64)>,
    for_terms: u64,
    against_terms: u64,
}

fn table(text: &str, sw: &Stopwords) -> TermTable {
    let terms: Vec<Term> = tokenize(text).iter().filter_map(|t| normalize(t, sw)).collect();
    TermTable::from_terms(&terms)
}

pub fn talking_points_json(for_text: &str, against_text: &str, k: usize, alpha: f64) -> Result<String, String> {
    let sw = Stopwords::english();
    let (a, b) = (table(for_text, &sw), table(against_text, &sw));
    let tp = talking_points_from_tables(&a, &b, k, alpha).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&TalkingPointsView {
        for_side: tp.for_side.points,
        against: tp.against_side.points,
        for_terms: a.total(),
        against_terms: b.total(),
    })
    .expect("serializable"))
}

#[derive(Serialize)]
struct CoverageBar {
    standing: &'static str,
    round: RoundKind,
    self_coverage: f64,
    opponent_coverage: f64,
}

/// Mean coverage per round of winners and losers in a synthetic corpus.
pub fn synth_flow_json(seed: u64, n_debates: usize, signal: f64) -> Result<String, String> {
    let spec = SynthSpec {
        seed,
        n_debates,
        signal_strength: signal,
        ..SynthSpec::default()
    };
    let debates = generate(&spec).map_err(|e| e.to_string())?;
    let flows = analyze_all(&debates, &Params::default()).map_err(|e| e.to_string())?;
    let mut bars = Vec::new();
    for (standing, want_winner) in [("winner", true), ("loser", false)] {
        for round in RoundKind::ALL {
            let (mut own, mut opp, mut n) = (0.0, 0.0, 0usize);
            for f in &flows {
                let Some(w) = f.label.winner() else { continue };
                let side = if want_winner { w } else { w.opponent() };
                let rc = f.side(side).round(round);
                own += rc.self_coverage;
                opp += rc.opponent_coverage;
                n += 1;
            }
            let n = n.max(1) as f64;
            bars.push(CoverageBar {
                standing,
                round,
                self_coverage: own / n,
                opponent_coverage: opp / n,
            });
        }
    }
    Ok(serde_json::to_string(&bars).expect("serializable"))
}

#[derive(Serialize)]
struct PredictionView {
    feature_set: FeatureSet,
    n: usize,
    correct: usize,
    accuracy: f64,
    binomial_p: f64,
}

/// Leave-one-out accuracy on a synthetic corpus with a reduced C grid.
pub fn synth_predict_json(seed: u64, n_debates: usize, signal: f64, feature_set: &str) -> Result<String, String> {
    let fs: FeatureSet = feature_set.parse()?;
    let spec = SynthSpec {
        seed,
        n_debates,
        signal_strength: signal,
        ..SynthSpec::default()
    };
    let debates = generate(&spec).map_err(|e| e.to_string())?;
    let grid = Grid::default_for(fs)
        .with_overrides("C=1e-2..1e2;m=1..5")
        .map_err(|e| e.to_string())?;
    let grid = if fs.uses_selection() { grid } else { Grid { select_m: Vec::new(), ..grid } };
    let report = predict(&debates, fs, &grid, seed, &Params::default()).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&PredictionView {
        feature_set: fs,
        n: report.n,
        correct: report.correct,
        accuracy: report.accuracy,
        binomial_p: report.binomial_p,
    })
    .expect("serializable"))
}

#[wasm_bindgen]
pub fn talking_points(for_text: &str, against_text: &str, k: usize, alpha: f64) -> Result<String, JsValue> {
    talking_points_json(for_text, against_text, k, alpha).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn synth_flow(seed: u32, n_debates: usize, signal: f64) -> Result<String, JsValue> {
    synth_flow_json(u64::from(seed), n_debates, signal).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn synth_predict(seed: u32, n_debates: usize, signal: f64, feature_set: &str) -> Result<String, JsValue> {
    synth_predict_json(u64::from(seed), n_debates, signal, feature_set).map_err(|e| JsValue::from_str(&e))
}
