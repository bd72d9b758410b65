//! How well predictions track actual quality, and how well generated
//! judgments agree with human ones.

mod agreement;
mod correlation;
mod sweep;

pub use agreement::{
    build_confusion, cohen_kappa, error_distances, ConfusionMatrix2x2, ConfusionOutcome,
};
pub use correlation::{
    kendall_tau_b, mean_tie_ranks, pearson, pearson_significance, smare, spearman, Alignment,
    CorrelationReport, PairedSeries,
};
pub use sweep::{depth_sweep, write_report_csv, SweepRow, REPORT_CSV_HEADER};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("need at least 2 queries, have {0}")]
    TooFewQueries(usize),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-finite value for `{0}`")]
    NonFinite(String),
    #[error("query `{0}` appears twice")]
    DuplicateQuery(String),
    #[error("correlation is undefined: {0}")]
    UndefinedCorrelation(&'static str),
    #[error("no judged pair has a human grade")]
    EmptyIntersection,
    #[error("expected agreement is 1; kappa is undefined")]
    DegenerateAgreement,
    #[error("invalid depth list: {0}")]
    InvalidDepths(String),
}
