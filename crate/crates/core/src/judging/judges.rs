use crate::trec_io::{JudgeIdentity, JudgmentStore, Label, Qrels, ScoreTable, Source};

use super::{Judge, JudgeError, JudgeItem, Verdict};

/// Binarizes human qrels: relevant iff the grade exists and is at least
/// `min_grade`. Unjudged pairs count as irrelevant.
#[derive(Debug, Clone)]
pub struct OracleJudge<'a> {
    qrels: &'a Qrels,
    min_grade: u32,
}

impl<'a> OracleJudge<'a> {
    pub fn new(qrels: &'a Qrels, min_grade: u32) -> Self {
        Self { qrels, min_grade }
    }

    pub fn label(&self, query_id: &str, doc_id: &str) -> Label {
        Label::from(
            self.qrels
                .grade(query_id, doc_id)
                .is_some_and(|g| g >= self.min_grade),
        )
    }
}

impl Judge for OracleJudge<'_> {
    fn identity(&self) -> JudgeIdentity {
        JudgeIdentity::new(Source::Oracle, format!("min_grade={}", self.min_grade))
    }

    fn judge(&self, item: &JudgeItem<'_>) -> Result<Verdict, JudgeError> {
        Ok(Verdict::label(self.label(item.query_id, item.doc_id)))
    }
}

/// Relevant iff the pair's score meets or exceeds θ.
#[derive(Debug, Clone)]
pub struct ThresholdJudge<'a> {
    scores: &'a ScoreTable,
    theta: f64,
}

impl<'a> ThresholdJudge<'a> {
    pub fn new(scores: &'a ScoreTable, theta: f64) -> Self {
        Self { scores, theta }
    }

    pub fn label(&self, query_id: &str, doc_id: &str) -> Result<Label, JudgeError> {
        let score = self
            .scores
            .get(query_id, doc_id)
            .ok_or_else(|| JudgeError::MissingScore {
                query_id: query_id.to_string(),
                doc_id: doc_id.to_string(),
            })?;
        Ok(Label::from(score >= self.theta))
    }
}

impl Judge for ThresholdJudge<'_> {
    fn identity(&self) -> JudgeIdentity {
        JudgeIdentity::new(Source::Threshold, format!("theta={}", self.theta))
    }

    fn judge(&self, item: &JudgeItem<'_>) -> Result<Verdict, JudgeError> {
        self.label(item.query_id, item.doc_id).map(Verdict::label)
    }
}

/// Replays labels produced elsewhere (e.g. an offline batch job), read
/// from a judgment file. Pairs missing from the file are errors.
#[derive(Debug)]
pub struct FileJudge {
    labels: JudgmentStore,
    read_as: JudgeIdentity,
    name: String,
}

impl FileJudge {
    /// `read_as` selects which judge's records to replay; `name` tags the
    /// replayed records in the destination store.
    pub fn new(labels: JudgmentStore, read_as: JudgeIdentity, name: impl Into<String>) -> Self {
        Self {
            labels,
            read_as,
            name: name.into(),
        }
    }
}

impl Judge for FileJudge {
    fn identity(&self) -> JudgeIdentity {
        JudgeIdentity::new(Source::File, self.name.clone())
    }

    fn judge(&self, item: &JudgeItem<'_>) -> Result<Verdict, JudgeError> {
        let rec = self
            .labels
            .lookup(item.query_id, item.doc_id, &self.read_as)
            .ok_or_else(|| JudgeError::MissingJudgment {
                query_id: item.query_id.to_string(),
                doc_id: item.doc_id.to_string(),
            })?;
        Ok(Verdict {
            label: rec.label,
            raw_output: rec.raw_output.clone(),
            fallback: rec.fallback,
        })
    }
}
