use std::collections::BTreeSet;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use ideaflow::corpus::{load_debate, winner, Corpus, Debate, Outcome, RoundKind, Side, MANIFEST_FILE};
use ideaflow::divergence::TalkingPoints;
use ideaflow::features::{bow_features, bow_names, BowCounts, FeatureSet, FeatureVector};
use ideaflow::flow::{DebateFlow, DiscussionPoint, SideFlow};
use ideaflow::learn::Grid;
use ideaflow::pipeline::{self, median, Comparison, Params};
use ideaflow::synth::{generate, SynthSpec};
use ideaflow::textproc::{tokenize, Stopwords, Term};

use crate::args::{
    AnalysisArgs, Command, FeaturesArgs, Format, IngestArgs, Input, PredictArgs, SynthArgs, TermArgs,
};
use crate::report::{csv_report, csv_table, emit, json_report, RunManifest};
use crate::CliError;

const INTRODUCTION_CHECK_NOTE: &str =
    "a term counts as new in the discussion when no debater used it earlier; moderator speech is not checked";

fn invalid(e: impl Display) -> CliError {
    CliError::Validation(e.to_string())
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Synth(a) => synth(a),
        Command::TalkingPoints(a) => talking_points(a),
        Command::Flow(a) => flow(a),
        Command::DiscussionPoints(a) => discussion_points(a),
        Command::Features(a) => features(a),
        Command::Predict(a) => predict(a),
        Command::Stats(a) => stats(a),
    }
}

struct Loaded {
    corpus: Corpus,
    /// Directory that must not be written to.
    protected: Option<PathBuf>,
    kind: &'static str,
}

fn load_corpus_dir(dir: &Path) -> Result<Loaded, CliError> {
    let corpus = Corpus::load_dir(dir).map_err(invalid)?;
    if corpus.is_empty() {
        return Err(CliError::Validation(format!("no debate files found in {}", dir.display())));
    }
    Ok(Loaded {
        corpus,
        protected: Some(dir.to_path_buf()),
        kind: "corpus",
    })
}

fn load_input(input: &Input) -> Result<Loaded, CliError> {
    match (&input.corpus, &input.debate) {
        (Some(dir), _) => load_corpus_dir(dir),
        (None, Some(file)) => {
            let d = load_debate(file).map_err(invalid)?;
            Ok(Loaded {
                corpus: Corpus::new(vec![d]).map_err(invalid)?,
                protected: None,
                kind: "debate",
            })
        }
        (None, None) => Err(CliError::Validation("one of --corpus or --debate is required".into())),
    }
}

fn params(t: &TermArgs) -> Result<Params, CliError> {
    if t.k == 0 {
        return Err(CliError::Validation("--k must be at least 1".into()));
    }
    if !(t.alpha.is_finite() && t.alpha > 0.0) {
        return Err(CliError::Validation(format!("--alpha must be positive, got {}", t.alpha)));
    }
    let stopwords = match &t.stopwords {
        Some(p) => Stopwords::from_file(p)
            .map_err(|e| CliError::Validation(format!("cannot read stopwords {}: {e}", p.display())))?,
        None => Stopwords::english(),
    };
    Ok(Params {
        k: t.k,
        alpha: t.alpha,
        stopwords,
    })
}

fn manifest(command: &str, loaded: &Loaded, p: &Params, format: Format) -> RunManifest {
    let mut m = RunManifest::new(command)
        .param("input", loaded.kind)
        .param("k", p.k)
        .param("alpha", p.alpha)
        .param("format", format_name(format));
    m.stopwords_hash = Some(p.stopwords.content_hash().to_string());
    m.corpus_hash = Some(loaded.corpus.content_hash());
    m
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::ForWins => "for-wins",
        Outcome::AgainstWins => "against-wins",
        Outcome::Tie => "tie",
    }
}

/// "winner", "loser" or "tie" for one side of a debate.
fn standing(d: &Debate, side: Side) -> &'static str {
    match winner(d).winner() {
        Some(w) if w == side => "winner",
        Some(_) => "loser",
        None => "tie",
    }
}

fn analyze(loaded: &Loaded, p: &Params) -> Result<Vec<DebateFlow>, CliError> {
    pipeline::analyze_all(&loaded.corpus.debates, p).map_err(invalid)
}

#[derive(Serialize)]
struct IngestDebate {
    id: String,
    outcome: &'static str,
    delta_for: f64,
    delta_against: f64,
    turns: usize,
    words: usize,
}

#[derive(Serialize)]
struct IngestReport {
    summary: ideaflow::corpus::CorpusSummary,
    debates: Vec<IngestDebate>,
}

fn ingest(a: IngestArgs) -> Result<(), CliError> {
    let loaded = load_corpus_dir(&a.corpus)?;
    let format = a.output.format.unwrap_or(Format::Json);
    let mut m = RunManifest::new("ingest").param("format", format_name(format));
    m.corpus_hash = Some(loaded.corpus.content_hash());
    let debates: Vec<IngestDebate> = loaded
        .corpus
        .debates
        .par_iter()
        .map(|d| {
            let label = winner(d);
            let (turns, words) = d
                .debater_turns()
                .fold((0, 0), |(t, w), st| (t + 1, w + tokenize(&st.turn.text).len()));
            IngestDebate {
                id: d.id.clone(),
                outcome: outcome_name(label.outcome),
                delta_for: label.delta_for,
                delta_against: label.delta_against,
                turns,
                words,
            }
        })
        .collect();
    let bytes = match format {
        Format::Json => json_report(
            &m,
            &IngestReport {
                summary: loaded.corpus.summary(),
                debates,
            },
        ),
        Format::Csv => csv_report(&m, debates),
    };
    emit(a.output.out.as_deref(), &bytes, loaded.protected.as_deref())
}

#[derive(Serialize)]
struct SynthReport<'a> {
    spec: &'a SynthSpec,
    debates: Vec<&'a str>,
}

fn synth(a: SynthArgs) -> Result<(), CliError> {
    let spec = SynthSpec {
        seed: a.seed,
        n_debates: a.n_debates,
        vocab_size: a.vocab_size,
        planted_tp_per_side: a.planted_tp,
        tp_frequency_boost: a.boost,
        planted_dp_per_debate: a.planted_dp,
        signal_strength: a.signal,
    };
    let debates = generate(&spec).map_err(invalid)?;
    let out = &a.out;
    if out.exists() {
        let empty = out.is_dir()
            && fs::read_dir(out)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", out.display())))?
                .next()
                .is_none();
        if !empty {
            return Err(CliError::Validation(format!(
                "{} already exists and is not an empty directory",
                out.display()
            )));
        }
    }
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("writing {}: {e}", out.display()));
    // the corpus appears under its final name only once every file is written
    let staging = tempfile::Builder::new()
        .prefix(".ideaflow-synth")
        .tempdir_in(&parent)
        .map_err(io)?;
    for d in &debates {
        fs::write(staging.path().join(format!("{}.json", d.id)), d.to_json()).map_err(io)?;
    }
    let ids: Vec<&str> = debates.iter().map(|d| d.id.as_str()).collect();
    let listing = serde_json::to_string_pretty(&ids).expect("ids serialize");
    fs::write(staging.path().join(MANIFEST_FILE), listing + "\n").map_err(io)?;
    if out.exists() {
        fs::remove_dir(out).map_err(io)?;
    }
    fs::rename(staging.keep(), out).map_err(io)?;

    let m = RunManifest::new("synth").param("spec", &spec);
    let bytes = json_report(&m, &SynthReport { spec: &spec, debates: ids });
    emit(None, &bytes, None)
}

#[derive(Serialize)]
struct TalkingPointsRow {
    debate: String,
    #[serde(rename = "for")]
    for_side: Vec<(Term, f64)>,
    against: Vec<(Term, f64)>,
    alpha: f64,
    k: usize,
}

impl TalkingPointsRow {
    fn new(id: &str, tp: &TalkingPoints) -> TalkingPointsRow {
        TalkingPointsRow {
            debate: id.to_string(),
            for_side: tp.for_side.points.clone(),
            against: tp.against_side.points.clone(),
            alpha: tp.alpha,
            k: tp.k,
        }
    }
}

#[derive(Serialize)]
struct TalkingPointsCsv<'a> {
    debate: &'a str,
    side: Side,
    rank: usize,
    term: &'a Term,
    z: f64,
}

#[derive(Serialize)]
struct Many<T> {
    debates: Vec<T>,
}

fn talking_points(a: AnalysisArgs) -> Result<(), CliError> {
    let loaded = load_input(&a.input)?;
    let p = params(&a.terms)?;
    let format = a.output.format.unwrap_or(Format::Json);
    let m = manifest("talking-points", &loaded, &p, format);
    let flows = analyze(&loaded, &p)?;
    let bytes = match format {
        Format::Json => {
            let rows: Vec<_> = flows.iter().map(|f| TalkingPointsRow::new(&f.id, &f.talking_points)).collect();
            if loaded.kind == "debate" {
                json_report(&m, &rows[0])
            } else {
                json_report(&m, &Many { debates: rows })
            }
        }
        Format::Csv => {
            let rows = flows.iter().flat_map(|f| {
                Side::BOTH.into_iter().flat_map(move |side| {
                    f.talking_points.set(side).points.iter().enumerate().map(move |(i, (term, z))| {
                        TalkingPointsCsv {
                            debate: &f.id,
                            side,
                            rank: i + 1,
                            term,
                            z: *z,
                        }
                    })
                })
            });
            csv_report(&m, rows)
        }
    };
    emit(a.output.out.as_deref(), &bytes, loaded.protected.as_deref())
}

#[derive(Serialize)]
struct FlowDebate<'a> {
    debate: &'a str,
    outcome: &'static str,
    sides: &'a [SideFlow; 2],
    discussion_points: usize,
}

#[derive(Serialize)]
struct FlowSummary {
    group: &'static str,
    round: RoundKind,
    measure: &'static str,
    n: usize,
    mean: f64,
    median: f64,
}

#[derive(Serialize)]
struct FlowReport<'a> {
    debates: Vec<FlowDebate<'a>>,
    summary: Vec<FlowSummary>,
}

#[derive(Serialize)]
struct FlowCsv<'a> {
    debate: &'a str,
    side: Side,
    standing: &'static str,
    round: RoundKind,
    self_coverage: f64,
    opponent_coverage: f64,
    content_terms: usize,
}

/// Mean and median coverage per round, over all sides and split by
/// winners and losers.
fn flow_summary(debates: &[Debate], flows: &[DebateFlow]) -> Vec<FlowSummary> {
    let mut out = Vec::new();
    for group in ["all", "winner", "loser"] {
        for round in RoundKind::ALL {
            for measure in ["self", "opponent"] {
                let values: Vec<f64> = debates
                    .iter()
                    .zip(flows)
                    .flat_map(|(d, f)| Side::BOTH.into_iter().map(move |s| (d, f, s)))
                    .filter(|(d, _, s)| group == "all" || standing(d, *s) == group)
                    .map(|(_, f, s)| {
                        let rc = f.side(s).round(round);
                        if measure == "self" {
                            rc.self_coverage
                        } else {
                            rc.opponent_coverage
                        }
                    })
                    .collect();
                let mean = if values.is_empty() {
                    f64::NAN
                } else {
                    values.iter().sum::<f64>() / values.len() as f64
                };
                out.push(FlowSummary {
                    group,
                    round,
                    measure,
                    n: values.len(),
                    mean,
                    median: median(&values),
                });
            }
        }
    }
    out
}

fn flow(a: AnalysisArgs) -> Result<(), CliError> {
    let loaded = load_input(&a.input)?;
    let p = params(&a.terms)?;
    let format = a.output.format.unwrap_or(Format::Json);
    let m = manifest("flow", &loaded, &p, format);
    let flows = analyze(&loaded, &p)?;
    let debates = &loaded.corpus.debates;
    let bytes = match format {
        Format::Json => json_report(
            &m,
            &FlowReport {
                debates: flows
                    .iter()
                    .map(|f| FlowDebate {
                        debate: &f.id,
                        outcome: outcome_name(f.label.outcome),
                        sides: &f.sides,
                        discussion_points: f.discussion.points.len(),
                    })
                    .collect(),
                summary: flow_summary(debates, &flows),
            },
        ),
        Format::Csv => {
            let rows = debates.iter().zip(&flows).flat_map(|(d, f)| {
                Side::BOTH.into_iter().flat_map(move |side| {
                    f.side(side).rounds.iter().map(move |rc| FlowCsv {
                        debate: &f.id,
                        side,
                        standing: standing(d, side),
                        round: rc.round,
                        self_coverage: rc.self_coverage,
                        opponent_coverage: rc.opponent_coverage,
                        content_terms: rc.content_terms,
                    })
                })
            });
            csv_report(&m, rows)
        }
    };
    emit(a.output.out.as_deref(), &bytes, loaded.protected.as_deref())
}

#[derive(Serialize)]
struct DiscussionDebate<'a> {
    debate: &'a str,
    newly_introduced: usize,
    qualifying_fraction: f64,
    adopted_by_for: usize,
    adopted_by_against: usize,
    points: &'a [DiscussionPoint],
}

#[derive(Serialize)]
struct DiscussionReport<'a> {
    note: &'static str,
    mean_points_per_debate: f64,
    debates: Vec<DiscussionDebate<'a>>,
}

#[derive(Serialize)]
struct DiscussionCsv<'a> {
    debate: &'a str,
    term: &'a Term,
    introducer: Side,
    turn_index: usize,
    offset: usize,
    opponent_uses: usize,
}

fn discussion_points(a: AnalysisArgs) -> Result<(), CliError> {
    let loaded = load_input(&a.input)?;
    let p = params(&a.terms)?;
    let format = a.output.format.unwrap_or(Format::Json);
    let m = manifest("discussion-points", &loaded, &p, format);
    let flows = analyze(&loaded, &p)?;
    let bytes = match format {
        Format::Json => {
            let total: usize = flows.iter().map(|f| f.discussion.points.len()).sum();
            json_report(
                &m,
                &DiscussionReport {
                    note: INTRODUCTION_CHECK_NOTE,
                    mean_points_per_debate: total as f64 / flows.len() as f64,
                    debates: flows
                        .iter()
                        .map(|f| DiscussionDebate {
                            debate: &f.id,
                            newly_introduced: f.discussion.newly_introduced,
                            qualifying_fraction: f.discussion.qualifying_fraction(),
                            adopted_by_for: f.side(Side::For).adopted_points,
                            adopted_by_against: f.side(Side::Against).adopted_points,
                            points: &f.discussion.points,
                        })
                        .collect(),
                },
            )
        }
        Format::Csv => {
            let rows = flows.iter().flat_map(|f| {
                f.discussion.points.iter().map(move |dp| DiscussionCsv {
                    debate: &f.id,
                    term: &dp.term,
                    introducer: dp.introducer,
                    turn_index: dp.turn_index,
                    offset: dp.offset,
                    opponent_uses: dp.opponent_uses,
                })
            });
            csv_report(&m, rows)
        }
    };
    emit(a.output.out.as_deref(), &bytes, loaded.protected.as_deref())
}

fn read_vocab(path: &Path) -> Result<Vec<Term>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read vocabulary {}: {e}", path.display())))?;
    let mut seen = BTreeSet::new();
    let mut vocab = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        if !seen.insert(line) {
            return Err(CliError::Validation(format!(
                "vocabulary {} lists {line:?} twice",
                path.display()
            )));
        }
        vocab.push(Term::new_unchecked(line));
    }
    if vocab.is_empty() {
        return Err(CliError::Validation(format!("vocabulary {} is empty", path.display())));
    }
    Ok(vocab)
}

#[derive(Serialize)]
struct FeatureRow<'a> {
    debate: &'a str,
    values: &'a [f64],
    label: Option<Side>,
}

#[derive(Serialize)]
struct FeaturesReport<'a> {
    feature_set: FeatureSet,
    names: &'a [String],
    rows: Vec<FeatureRow<'a>>,
}

fn label_side(label: Option<bool>) -> Option<Side> {
    label.map(|l| if l { Side::For } else { Side::Against })
}

fn features(a: FeaturesArgs) -> Result<(), CliError> {
    let loaded = load_input(&a.input)?;
    let p = params(&a.terms)?;
    let format = a.output.format.unwrap_or(Format::Csv);
    let mut m = manifest("features", &loaded, &p, format).param("feature_set", a.feature_set);
    let debates = &loaded.corpus.debates;
    let vectors: Vec<FeatureVector> = match (a.feature_set, &a.vocab) {
        (FeatureSet::Bow, None) => {
            return Err(CliError::Validation(
                "the bag-of-words table needs an explicit --vocab file".into(),
            ))
        }
        (FeatureSet::Bow, Some(path)) => {
            let vocab = read_vocab(path)?;
            m = m.param("vocab", &vocab);
            debates
                .par_iter()
                .map(|d| bow_features(&BowCounts::from_debate(d, &p.stopwords), &vocab))
                .collect()
        }
        (fs, Some(_)) => {
            return Err(CliError::Validation(format!("--vocab only applies to bow, not {fs}")));
        }
        (fs, None) => pipeline::feature_vectors(debates, fs, &p).map_err(invalid)?,
    };
    let names: Vec<String> = match a.feature_set {
        FeatureSet::Bow => vectors.first().map(|v| v.names.clone()).unwrap_or_else(|| bow_names(&[])),
        fs => fs.names().expect("fixed columns"),
    };
    let bytes = match format {
        Format::Json => json_report(
            &m,
            &FeaturesReport {
                feature_set: a.feature_set,
                names: &names,
                rows: vectors
                    .iter()
                    .map(|v| FeatureRow {
                        debate: &v.debate_id,
                        values: &v.values,
                        label: label_side(v.label),
                    })
                    .collect(),
            },
        ),
        Format::Csv => {
            let mut header = vec!["debate".to_string()];
            header.extend(names.iter().cloned());
            header.push("label".to_string());
            let rows: Vec<Vec<String>> = vectors
                .iter()
                .map(|v| {
                    let mut r = vec![v.debate_id.clone()];
                    r.extend(v.values.iter().map(|x| x.to_string()));
                    r.push(label_side(v.label).map_or("tie".to_string(), |s| s.to_string()));
                    r
                })
                .collect();
            csv_table(&m, &header, &rows)
        }
    };
    emit(a.output.out.as_deref(), &bytes, loaded.protected.as_deref())
}

fn predict(a: PredictArgs) -> Result<(), CliError> {
    let loaded = load_corpus_dir(&a.corpus)?;
    let p = params(&a.terms)?;
    let format = a.output.format.unwrap_or(Format::Json);
    let grid = Grid::default_for(a.feature_set)
        .with_overrides(&a.grid)
        .map_err(invalid)?;
    let m = manifest("predict", &loaded, &p, format)
        .param("feature_set", a.feature_set)
        .param("grid", &grid)
        .param("seed", a.seed);
    let report = pipeline::predict(&loaded.corpus.debates, a.feature_set, &grid, a.seed, &p).map_err(invalid)?;
    let bytes = match format {
        Format::Json => json_report(&m, &report),
        Format::Csv => csv_report(&m, &report.rows),
    };
    emit(a.output.out.as_deref(), &bytes, loaded.protected.as_deref())
}

#[derive(Serialize)]
struct StatsReport<'a> {
    debates: usize,
    decided: usize,
    note: &'static str,
    comparisons: &'a [Comparison],
}

fn stats(a: AnalysisArgs) -> Result<(), CliError> {
    let loaded = load_input(&a.input)?;
    let p = params(&a.terms)?;
    let format = a.output.format.unwrap_or(Format::Csv);
    let m = manifest("stats", &loaded, &p, format);
    let flows = analyze(&loaded, &p)?;
    let debates = &loaded.corpus.debates;
    let comparisons = pipeline::corpus_comparisons(debates, &flows);
    let bytes = match format {
        Format::Json => json_report(
            &m,
            &StatsReport {
                debates: debates.len(),
                decided: pipeline::labeled(debates).len(),
                note: "paired Wilcoxon signed-rank tests; zero differences are dropped before ranking",
                comparisons: &comparisons,
            },
        ),
        Format::Csv => csv_report(&m, &comparisons),
    };
    emit(a.output.out.as_deref(), &bytes, loaded.protected.as_deref())
}
