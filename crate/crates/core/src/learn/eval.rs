//! Inner cross-validation and outer leave-one-out evaluation.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logistic::{fit, fit_prepared, ModelConfig, Penalty, Prepared, TrainedModel};
use super::LearnError;
use crate::corpus::Side;
use crate::features::{bow_features, bow_names, build_vocab, BowCounts, FeatureSet, FeatureVector};
use crate::stats::binomial_test_full;

/// How many seed offsets are tried before an unbalanced inner split is an error.
pub const FOLD_ATTEMPTS: usize = 5;

pub const OBJECTIVE_DESCRIPTION: &str = "class-balanced logistic loss (each class weighted 1/2, averaged within class) \
     plus |w|^2/(2Cn) for l2 or |w|_1/(Cn) for l1; intercept unpenalized; features z-scored with \
     training-fold statistics when standardize is on; converged when the objective changes by < 1e-8 \
     or after 10000 iterations; predicted For when p >= 0.5";

/// Column matrices for one train/test split, built from the training rows only.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub names: Vec<String>,
    pub train: Array2<f64>,
    pub test: Array2<f64>,
}

/// Labeled debates whose feature columns may depend on the training rows.
pub trait FeatureSource: Sync {
    fn len(&self) -> usize;
    fn id(&self, i: usize) -> &str;
    fn label(&self, i: usize) -> bool;
    /// Columns fitted on `train` only, evaluated on both index lists.
    fn design(&self, train: &[usize], test: &[usize]) -> Design;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Feature families with a fixed column list.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedSource {
    pub ids: Vec<String>,
    pub labels: Vec<bool>,
    pub names: Vec<String>,
    pub x: Array2<f64>,
}

impl FixedSource {
    pub fn new(vectors: &[FeatureVector]) -> Result<FixedSource, LearnError> {
        let names = vectors.first().map(|v| v.names.clone()).unwrap_or_default();
        let mut x = Array2::zeros((vectors.len(), names.len()));
        let mut labels = Vec::with_capacity(vectors.len());
        for (i, v) in vectors.iter().enumerate() {
            if v.names != names || v.values.len() != names.len() {
                return Err(LearnError::InconsistentNames { id: v.debate_id.clone() });
            }
            if let Some(j) = v.values.iter().position(|x| !x.is_finite()) {
                return Err(LearnError::NonFinite { row: i, col: j });
            }
            labels.push(v.label.ok_or_else(|| LearnError::Unlabeled { id: v.debate_id.clone() })?);
            x.row_mut(i).assign(&ndarray::ArrayView1::from(&v.values));
        }
        Ok(FixedSource {
            ids: vectors.iter().map(|v| v.debate_id.clone()).collect(),
            labels,
            names,
            x,
        })
    }
}

impl FeatureSource for FixedSource {
    fn len(&self) -> usize {
        self.ids.len()
    }

    fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    fn label(&self, i: usize) -> bool {
        self.labels[i]
    }

    fn design(&self, train: &[usize], test: &[usize]) -> Design {
        Design {
            names: self.names.clone(),
            train: self.x.select(Axis(0), train),
            test: self.x.select(Axis(0), test),
        }
    }
}

/// Bag-of-words counts; the vocabulary is rebuilt from each training set.
#[derive(Debug, Clone, PartialEq)]
pub struct BowSource {
    pub counts: Vec<BowCounts>,
    pub labels: Vec<bool>,
    pub min_count: u64,
}

impl BowSource {
    pub fn new(counts: Vec<BowCounts>, min_count: u64) -> Result<BowSource, LearnError> {
        let labels = counts
            .iter()
            .map(|c| c.label.ok_or_else(|| LearnError::Unlabeled { id: c.debate_id.clone() }))
            .collect::<Result<_, _>>()?;
        Ok(BowSource {
            counts,
            labels,
            min_count,
        })
    }
}

impl FeatureSource for BowSource {
    fn len(&self) -> usize {
        self.counts.len()
    }

    fn id(&self, i: usize) -> &str {
        &self.counts[i].debate_id
    }

    fn label(&self, i: usize) -> bool {
        self.labels[i]
    }

    fn design(&self, train: &[usize], test: &[usize]) -> Design {
        let vocab = build_vocab(train.iter().map(|&i| &self.counts[i]), self.min_count);
        let matrix = |rows: &[usize]| {
            let mut x = Array2::zeros((rows.len(), 2 * vocab.len()));
            for (r, &i) in rows.iter().enumerate() {
                let fv = bow_features(&self.counts[i], &vocab);
                x.row_mut(r).assign(&ndarray::ArrayView1::from(&fv.values));
            }
            x
        };
        Design {
            names: bow_names(&vocab),
            train: matrix(train),
            test: matrix(test),
        }
    }
}

/// Hyperparameter grid searched by the inner cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub penalties: Vec<Penalty>,
    #[serde(rename = "C")]
    pub cs: Vec<f64>,
    /// Feature counts tried by univariate selection; empty means no selection.
    pub select_m: Vec<usize>,
    pub standardize: bool,
    pub folds: usize,
}

impl Grid {
    /// l1 and l2, C in 1e-5..=1e5 by decades, and m in 1..=10 when selecting.
    pub fn default_for(fs: FeatureSet) -> Grid {
        Grid {
            penalties: vec![Penalty::L2, Penalty::L1],
            cs: (-5..=5).map(|e| 10f64.powi(e)).collect(),
            select_m: if fs.uses_selection() { (1..=10).collect() } else { Vec::new() },
            standardize: true,
            folds: 3,
        }
    }

    /// Applies `key=value` overrides separated by `;`, for example
    /// `penalty=l2;C=1e-2..1e2;m=1..5;standardize=false;folds=3`.
    /// A `C` range steps by decades; an `m` range by one.
    pub fn with_overrides(mut self, spec: &str) -> Result<Grid, LearnError> {
        let bad = |m: String| LearnError::InvalidGrid(m);
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
            match key.trim().to_ascii_lowercase().as_str() {
                "penalty" => {
                    self.penalties = value
                        .split(',')
                        .map(|p| match p.trim().to_ascii_lowercase().as_str() {
                            "l1" => Ok(Penalty::L1),
                            "l2" => Ok(Penalty::L2),
                            other => Err(bad(format!("unknown penalty {other:?}"))),
                        })
                        .collect::<Result<_, _>>()?;
                }
                "c" => {
                    self.cs = if let Some((lo, hi)) = value.split_once("..") {
                        let parse = |s: &str| {
                            s.trim()
                                .parse::<f64>()
                                .ok()
                                .filter(|v| *v > 0.0 && v.is_finite())
                                .ok_or_else(|| bad(format!("bad C bound {s:?}")))
                        };
                        let (lo, hi) = (parse(lo)?.log10().round() as i32, parse(hi)?.log10().round() as i32);
                        (lo..=hi).map(|e| 10f64.powi(e)).collect()
                    } else {
                        value
                            .split(',')
                            .map(|s| s.trim().parse::<f64>().map_err(|_| bad(format!("bad C value {s:?}"))))
                            .collect::<Result<_, _>>()?
                    };
                }
                "m" => {
                    self.select_m = if value.trim().is_empty() || value.trim() == "none" {
                        Vec::new()
                    } else if let Some((lo, hi)) = value.split_once("..") {
                        let p = |s: &str| s.trim().parse::<usize>().map_err(|_| bad(format!("bad m bound {s:?}")));
                        (p(lo)?..=p(hi)?).collect()
                    } else {
                        value
                            .split(',')
                            .map(|s| s.trim().parse::<usize>().map_err(|_| bad(format!("bad m value {s:?}"))))
                            .collect::<Result<_, _>>()?
                    };
                }
                "standardize" => {
                    self.standardize = value
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("standardize must be true or false, got {value:?}")))?;
                }
                "folds" => {
                    self.folds = value
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("bad fold count {value:?}")))?;
                }
                other => return Err(bad(format!("unknown grid key {other:?}"))),
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |m: &str| Err(LearnError::InvalidGrid(m.to_string()));
        if self.penalties.is_empty() || self.cs.is_empty() {
            return bad("at least one penalty and one C value are required");
        }
        if self.cs.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return bad("C values must be positive and finite");
        }
        if self.select_m.contains(&0) {
            return bad("m must be at least 1");
        }
        if self.folds < 2 {
            return bad("at least two folds are required");
        }
        Ok(())
    }

    /// Candidates in preference order: smaller C, then l2 before l1, then smaller m.
    fn candidates(&self, n_features: usize) -> Vec<(f64, Penalty, Option<usize>)> {
        let mut cs = self.cs.clone();
        cs.sort_by(f64::total_cmp);
        cs.dedup();
        let mut penalties = self.penalties.clone();
        penalties.sort();
        penalties.dedup();
        let mut ms: Vec<Option<usize>> = self
            .select_m
            .iter()
            .filter(|&&m| m <= n_features)
            .map(|&m| Some(m))
            .collect();
        ms.sort();
        ms.dedup();
        if ms.is_empty() {
            ms.push(None);
        }
        let mut out = Vec::new();
        for &c in &cs {
            for &p in &penalties {
                for &m in &ms {
                    out.push((c, p, m));
                }
            }
        }
        out
    }
}

/// Fold number per position; each class is shuffled and dealt round-robin.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut fold = vec![0; labels.len()];
    for (slot, &i) in pos.iter().chain(&neg).enumerate() {
        fold[i] = slot % k;
    }
    fold
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub config: ModelConfig,
    pub cv_accuracy: f64,
}

/// Picks the grid point with the best mean inner-fold accuracy on `train`.
pub fn choose_config(
    src: &dyn FeatureSource,
    train: &[usize],
    grid: &Grid,
    seed: u64,
) -> Result<Choice, LearnError> {
    grid.validate()?;
    let labels: Vec<bool> = train.iter().map(|&i| src.label(i)).collect();
    let k = grid.folds;
    let mut folds = None;
    for attempt in 0..FOLD_ATTEMPTS as u64 {
        let f = stratified_folds(&labels, k, seed.wrapping_add(attempt));
        let ok = (0..k).all(|fold| {
            let inner: Vec<bool> = (0..labels.len()).filter(|&i| f[i] != fold).map(|i| labels[i]).collect();
            inner.iter().any(|&l| l) && inner.iter().any(|&l| !l)
        });
        if ok {
            folds = Some(f);
            break;
        }
    }
    let folds = folds.ok_or(LearnError::FoldsUnbalanced {
        folds: k,
        attempts: FOLD_ATTEMPTS,
    })?;

    let mut candidates: Option<Vec<(f64, Penalty, Option<usize>)>> = None;
    let mut acc_sum: Vec<f64> = Vec::new();
    for fold in 0..k {
        let inner_train: Vec<usize> = (0..train.len()).filter(|&i| folds[i] != fold).map(|i| train[i]).collect();
        let inner_test: Vec<usize> = (0..train.len()).filter(|&i| folds[i] == fold).map(|i| train[i]).collect();
        if inner_test.is_empty() {
            continue;
        }
        let design = src.design(&inner_train, &inner_test);
        let y_train: Vec<bool> = inner_train.iter().map(|&i| src.label(i)).collect();
        let y_test: Vec<bool> = inner_test.iter().map(|&i| src.label(i)).collect();
        let cands = candidates.get_or_insert_with(|| grid.candidates(design.names.len()));
        if acc_sum.is_empty() {
            acc_sum = vec![0.0; cands.len()];
        }
        // one prepared design per m; warm starts run along increasing C for each (penalty, m)
        let mut prepared: BTreeMap<Option<usize>, Prepared> = BTreeMap::new();
        let mut warm: BTreeMap<(Penalty, Option<usize>), TrainedModel> = BTreeMap::new();
        for (ci, &(c, penalty, m)) in cands.iter().enumerate() {
            let cfg = ModelConfig {
                penalty,
                c,
                select_m: m,
                standardize: grid.standardize,
                seed,
            };
            if let Entry::Vacant(slot) = prepared.entry(m) {
                slot.insert(Prepared::new(design.train.view(), &y_train, m, grid.standardize)?);
            }
            let model = fit_prepared(&prepared[&m], &y_train, &cfg, warm.get(&(penalty, m)))?;
            let correct = model
                .predict(design.test.view())
                .iter()
                .zip(&y_test)
                .filter(|(p, y)| p == y)
                .count();
            acc_sum[ci] += correct as f64 / y_test.len() as f64;
            warm.insert((penalty, m), model);
        }
    }
    let cands = candidates.unwrap_or_default();
    let mut best: Option<(usize, f64)> = None;
    for (ci, &s) in acc_sum.iter().enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((ci, s));
        }
    }
    let (ci, s) = best.ok_or(LearnError::TooFewDebates {
        n: train.len(),
        positives: labels.iter().filter(|&&l| l).count(),
    })?;
    let (c, penalty, select_m) = cands[ci];
    Ok(Choice {
        config: ModelConfig {
            penalty,
            c,
            select_m,
            standardize: grid.standardize,
            seed,
        },
        cv_accuracy: s / k as f64,
    })
}

/// Everything produced when one debate is held out.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome {
    pub held_out: usize,
    pub choice: Choice,
    pub names: Vec<String>,
    pub model: TrainedModel,
    pub probability: f64,
    pub predicted: bool,
}

/// Trains on every debate except `held_out` and predicts it.
pub fn loo_split(src: &dyn FeatureSource, held_out: usize, grid: &Grid, seed: u64) -> Result<SplitOutcome, LearnError> {
    let split_seed = seed ^ held_out as u64;
    let train: Vec<usize> = (0..src.len()).filter(|&i| i != held_out).collect();
    let choice = choose_config(src, &train, grid, split_seed)?;
    let design = src.design(&train, &[held_out]);
    let y: Vec<bool> = train.iter().map(|&i| src.label(i)).collect();
    let model = fit(design.train.view(), &y, &choice.config)?;
    let probability = model.probability(design.test.row(0));
    Ok(SplitOutcome {
        held_out,
        choice,
        names: design.names,
        model,
        probability,
        predicted: probability >= 0.5,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub id: String,
    pub predicted: Side,
    pub actual: Side,
    /// Model probability that For wins.
    pub probability: f64,
    pub penalty: Penalty,
    #[serde(rename = "C")]
    pub c: f64,
    pub select_m: Option<usize>,
    pub cv_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Exact two-sided binomial test against 0.5.
    pub binomial_p: f64,
    /// One-sided: accuracy above 0.5.
    pub binomial_p_greater: f64,
    pub for_wins: usize,
    pub against_wins: usize,
    pub rows: Vec<PredictionRow>,
    /// Splits in which each feature entered the model with a nonzero weight.
    pub selected_feature_tally: BTreeMap<String, usize>,
    /// Standardized coefficients summed over splits, divided by n.
    pub mean_coefficients: BTreeMap<String, f64>,
    pub grid: Grid,
    pub seed: u64,
    pub objective: String,
}

fn side(b: bool) -> Side {
    if b {
        Side::For
    } else {
        Side::Against
    }
}

/// Leave-one-out accuracy with per-split model selection. Splits run in
/// parallel; results do not depend on the thread count.
pub fn loo_evaluate(src: &dyn FeatureSource, grid: &Grid, seed: u64) -> Result<EvalReport, LearnError> {
    grid.validate()?;
    let n = src.len();
    let positives = (0..n).filter(|&i| src.label(i)).count();
    if n < 4 || positives == 0 || positives == n {
        return Err(LearnError::TooFewDebates { n, positives });
    }
    let outcomes: Vec<SplitOutcome> = (0..n)
        .into_par_iter()
        .map(|i| loo_split(src, i, grid, seed))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(n);
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    let mut coef: BTreeMap<String, f64> = BTreeMap::new();
    let mut correct = 0;
    for o in &outcomes {
        let actual = src.label(o.held_out);
        correct += usize::from(o.predicted == actual);
        rows.push(PredictionRow {
            id: src.id(o.held_out).to_string(),
            predicted: side(o.predicted),
            actual: side(actual),
            probability: o.probability,
            penalty: o.choice.config.penalty,
            c: o.choice.config.c,
            select_m: o.choice.config.select_m,
            cv_accuracy: o.choice.cv_accuracy,
        });
        for (&j, &w) in o.model.selected.iter().zip(&o.model.weights) {
            if w != 0.0 {
                *tally.entry(o.names[j].clone()).or_default() += 1;
                *coef.entry(o.names[j].clone()).or_default() += w;
            }
        }
    }
    for v in coef.values_mut() {
        *v /= n as f64;
    }
    let binom = binomial_test_full(correct as u64, n as u64, 0.5).expect("valid counts");
    Ok(EvalReport {
        n,
        correct,
        accuracy: correct as f64 / n as f64,
        binomial_p: binom.p_two_sided,
        binomial_p_greater: binom.p_greater,
        for_wins: positives,
        against_wins: n - positives,
        rows,
        selected_feature_tally: tally,
        mean_coefficients: coef,
        grid: grid.clone(),
        seed,
        objective: OBJECTIVE_DESCRIPTION.to_string(),
    })
}
