//! IR measures computed from binary judgment vectors, and the per-query
//! prediction pipeline built on them.
//!
//! Discounting follows the binary DCG used throughout this crate: rank 1
//! contributes its label undiscounted and rank `i >= 2` contributes
//! `label / log2(i)`. The ideal DCG is approximated from the labels of the
//! judged top-n, reordered relevant-first, so only items predicted relevant
//! within the judged depth stand in for the full set of relevant items.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::judging::{judge_run, Judge, JudgeError, JudgingContext, JudgmentVector, RunJudgments};
use crate::trec_io::{JudgmentStore, QueryValues, Run};

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("query `{query_id}`: {have} judged positions, cutoff needs {need}")]
    DepthShortfall {
        query_id: String,
        have: usize,
        need: usize,
    },
    #[error("cutoff must be at least 1")]
    ZeroCutoff,
    #[error("invalid metric spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Rr,
    Ndcg,
    Precision,
}

impl MetricKind {
    fn name(self) -> &'static str {
        match self {
            MetricKind::Rr => "rr",
            MetricKind::Ndcg => "ndcg",
            MetricKind::Precision => "p",
        }
    }
}

/// A target measure at cutoff `k`, predicted from judgments to depth `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub cutoff: usize,
    pub depth: usize,
}

impl MetricSpec {
    pub fn new(kind: MetricKind, cutoff: usize, depth: usize) -> Result<Self, MetricError> {
        if cutoff == 0 {
            return Err(MetricError::ZeroCutoff);
        }
        if depth < cutoff {
            return Err(MetricError::InvalidSpec(format!(
                "judging depth {depth} is below cutoff {cutoff}"
            )));
        }
        Ok(Self {
            kind,
            cutoff,
            depth,
        })
    }

    /// Spec with the judging depth equal to the cutoff.
    pub fn at(kind: MetricKind, cutoff: usize) -> Result<Self, MetricError> {
        Self::new(kind, cutoff, cutoff)
    }

    pub fn with_depth(self, depth: usize) -> Result<Self, MetricError> {
        Self::new(self.kind, self.cutoff, depth)
    }

    /// Metric name without the depth, e.g. `ndcg@10`.
    pub fn measure_name(&self) -> String {
        format!("{}@{}", self.kind.name(), self.cutoff)
    }

    pub fn evaluate(&self, judgments: &JudgmentVector) -> Result<f64, MetricError> {
        let j = judgments.truncated(self.depth);
        match self.kind {
            MetricKind::Rr => rr_at_k(&j, self.cutoff),
            MetricKind::Ndcg => ndcg_at_k(&j, self.cutoff),
            MetricKind::Precision => precision_at_k(&j, self.cutoff),
        }
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.kind.name(), self.cutoff)?;
        if self.depth != self.cutoff {
            write!(f, "/n={}", self.depth)?;
        }
        Ok(())
    }
}

/// Parses `rr@10`, `ndcg@10`, `p@10` (alias `precision@10`); the depth
/// defaults to the cutoff and can be given as `ndcg@10/n=100`.
impl FromStr for MetricSpec {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad =
            || MetricError::InvalidSpec(format!("`{s}` (expected e.g. rr@10, ndcg@10, p@10)"));
        let (measure, depth) = match s.split_once("/n=") {
            Some((m, d)) => (m, Some(d.parse::<usize>().map_err(|_| bad())?)),
            None => (s, None),
        };
        let (name, cutoff) = measure.split_once('@').ok_or_else(bad)?;
        let kind = match name.to_ascii_lowercase().as_str() {
            "rr" | "mrr" => MetricKind::Rr,
            "ndcg" => MetricKind::Ndcg,
            "p" | "precision" => MetricKind::Precision,
            _ => return Err(bad()),
        };
        let cutoff: usize = cutoff.parse().map_err(|_| bad())?;
        MetricSpec::new(kind, cutoff, depth.unwrap_or(cutoff))
    }
}

fn check_cover(j: &JudgmentVector, k: usize) -> Result<(), MetricError> {
    if k == 0 {
        return Err(MetricError::ZeroCutoff);
    }
    let need = k.min(j.list_len());
    if j.labels().len() < need {
        return Err(MetricError::DepthShortfall {
            query_id: j.query_id().to_string(),
            have: j.labels().len(),
            need,
        });
    }
    Ok(())
}

/// Gain weight of 1-based rank `i`.
fn discount(i: usize) -> f64 {
    if i <= 1 {
        1.0
    } else {
        1.0 / (i as f64).log2()
    }
}

fn dcg_of(relevant: impl Iterator<Item = bool>, k: usize) -> f64 {
    relevant
        .take(k)
        .enumerate()
        .filter(|(_, r)| *r)
        .map(|(i, _)| discount(i + 1))
        .sum()
}

/// Reciprocal rank of the first relevant item within the top `k`, else 0.
pub fn rr_at_k(j: &JudgmentVector, k: usize) -> Result<f64, MetricError> {
    check_cover(j, k)?;
    Ok(j.relevant()
        .take(k)
        .position(|r| r)
        .map_or(0.0, |i| 1.0 / (i + 1) as f64))
}

pub fn dcg_at_k(j: &JudgmentVector, k: usize) -> Result<f64, MetricError> {
    check_cover(j, k)?;
    Ok(dcg_of(j.relevant(), k))
}

/// Ideal DCG over the judged top-n labels sorted relevant-first.
pub fn idcg_at_k(j: &JudgmentVector, k: usize) -> Result<f64, MetricError> {
    check_cover(j, k)?;
    let relevant = j.relevant().filter(|r| *r).count();
    Ok(dcg_of(std::iter::repeat_n(true, relevant), k))
}

/// DCG / approximated IDCG; 0 when nothing in the judged top-n is relevant.
pub fn ndcg_at_k(j: &JudgmentVector, k: usize) -> Result<f64, MetricError> {
    let ideal = idcg_at_k(j, k)?;
    if ideal == 0.0 {
        return Ok(0.0);
    }
    Ok(dcg_at_k(j, k)? / ideal)
}

/// Fraction of the top `k` judged relevant; missing positions count as 0.
pub fn precision_at_k(j: &JudgmentVector, k: usize) -> Result<f64, MetricError> {
    check_cover(j, k)?;
    Ok(j.relevant().take(k).filter(|r| *r).count() as f64 / k as f64)
}

/// Predictions for one metric plus what went wrong along the way.
#[derive(Debug, Default)]
pub struct PredictionOutcome {
    pub predictions: QueryValues,
    /// Per-item judge failures; affected queries have no prediction.
    pub failures: Vec<JudgeError>,
    pub cache_hits: usize,
    pub invocations: usize,
    pub fallbacks: usize,
}

/// Applies a metric to already-judged vectors.
pub fn predictions_from_judgments(
    judged: &RunJudgments,
    spec: &MetricSpec,
) -> Result<QueryValues, MetricError> {
    judged
        .vectors
        .iter()
        .map(|(qid, v)| Ok((qid.clone(), spec.evaluate(v)?)))
        .collect()
}

/// Judges every query to the deepest requested depth once, then derives
/// each metric from the same judgments.
pub fn predict_many<J: Judge + ?Sized>(
    run: &Run,
    ctx: &JudgingContext<'_>,
    judge: &J,
    store: &mut JudgmentStore,
    specs: &[MetricSpec],
) -> Result<Vec<PredictionOutcome>, PredictError> {
    let Some(depth) = specs.iter().map(|s| s.depth).max() else {
        return Ok(Vec::new());
    };
    let judged = judge_run(run, depth, judge, store, ctx)?;
    specs
        .iter()
        .map(|spec| {
            Ok(PredictionOutcome {
                predictions: predictions_from_judgments(&judged, spec)?,
                failures: judged.failures.iter().map(clone_failure).collect(),
                cache_hits: judged.cache_hits,
                invocations: judged.invocations,
                fallbacks: judged.fallbacks,
            })
        })
        .collect()
}

/// Judges each query to `spec.depth` and computes the metric at `spec.cutoff`.
pub fn predict_run<J: Judge + ?Sized>(
    run: &Run,
    ctx: &JudgingContext<'_>,
    judge: &J,
    store: &mut JudgmentStore,
    spec: &MetricSpec,
) -> Result<PredictionOutcome, PredictError> {
    Ok(
        predict_many(run, ctx, judge, store, std::slice::from_ref(spec))?
            .pop()
            .unwrap_or_default(),
    )
}

// JudgeError holds boxed sources and is not Clone; failure manifests only
// need the rendered message and identifiers.
fn clone_failure(e: &JudgeError) -> JudgeError {
    match e {
        JudgeError::Item {
            query_id,
            doc_id,
            position,
            source,
        } => JudgeError::Item {
            query_id: query_id.clone(),
            doc_id: doc_id.clone(),
            position: *position,
            source: Box::new(JudgeError::Config(source.to_string())),
        },
        other => JudgeError::Config(other.to_string()),
    }
}

#[derive(Debug, Error)]
pub enum PredictError {
    #[error(transparent)]
    Judge(#[from] JudgeError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Eval(#[from] crate::eval::EvalError),
}
