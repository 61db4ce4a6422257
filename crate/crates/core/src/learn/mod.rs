//! Winner prediction: regularized logistic regression, univariate feature
//! selection, inner cross-validation and leave-one-out evaluation.

mod eval;
mod logistic;
mod select;

use thiserror::Error;

pub use eval::{
    choose_config, loo_evaluate, loo_split, stratified_folds, BowSource, Choice, Design, EvalReport,
    FeatureSource, FixedSource, Grid, PredictionRow, SplitOutcome, FOLD_ATTEMPTS, OBJECTIVE_DESCRIPTION,
};
pub use logistic::{
    fit, fit_prepared, fit_warm, solve, ModelConfig, Objective, Penalty, Prepared, RowSpace, Scaler, Solution,
    TrainedModel, MAX_ITER, TOLERANCE,
};
pub use select::{rank_features, select_features, t_statistic};

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("training data must contain both classes and at least two rows")]
    SingleClass,
    #[error("{rows} feature rows but {labels} labels")]
    Shape { rows: usize, labels: usize },
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("C must be positive and finite, got {0}")]
    InvalidC(f64),
    #[error("cannot select {m} of {features} features")]
    SelectOutOfRange { m: usize, features: usize },
    #[error("no stratified {folds}-fold split with both classes in every training fold after {attempts} attempts")]
    FoldsUnbalanced { folds: usize, attempts: usize },
    #[error("leave-one-out needs at least 4 labeled debates with both classes, got {n} ({positives} For wins)")]
    TooFewDebates { n: usize, positives: usize },
    #[error("debate {id} has no winner label (tie); remove ties before prediction")]
    Unlabeled { id: String },
    #[error("feature vector for {id} does not match the column names of the first vector")]
    InconsistentNames { id: String },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}
