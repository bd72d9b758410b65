//! Binary relevance judgments for the top of a ranked list.
//!
//! A [`Judge`] labels one (query, document) pair. [`judge_list`] and
//! [`judge_run`] drive a judge over ranked lists, consulting a
//! [`JudgmentStore`](crate::trec_io::JudgmentStore) first so each pair is
//! judged at most once per judge identity.

mod config;
mod judges;
mod list;
mod llm;
mod parse;
mod prompt;
mod qpp_llm;

pub use config::{JudgeConfig, JudgeKind, LlmConfig, RetryPolicy};
pub use judges::{FileJudge, OracleJudge, ThresholdJudge};
pub use list::{judge_list, judge_run, JudgingContext, JudgmentVector, RunJudgments};
pub use llm::{ApiStyle, Completer, CompletionError, HttpCompleter, LlmJudge};
pub use parse::{parse_relevance_output, parse_score_output, UnparseableOutput};
pub use prompt::{build_qpp_llm_prompt, build_relevance_prompt, Demonstration};
pub use qpp_llm::{qpp_llm_direct, QppLlmScore};

use thiserror::Error;

use crate::trec_io::{JudgeIdentity, Label, TrecError};

/// A pair to be judged. Texts are resolved by the caller only when the
/// judge asks for them through [`Judge::needs_text`].
#[derive(Debug, Clone, Copy)]
pub struct JudgeItem<'a> {
    pub query_id: &'a str,
    pub doc_id: &'a str,
    pub query_text: Option<&'a str>,
    pub doc_text: Option<&'a str>,
}

impl<'a> JudgeItem<'a> {
    pub fn ids(query_id: &'a str, doc_id: &'a str) -> Self {
        Self {
            query_id,
            doc_id,
            query_text: None,
            doc_text: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub label: Label,
    pub raw_output: Option<String>,
    /// The label was assigned by the fallback rule, not read from the judge.
    pub fallback: bool,
}

impl Verdict {
    pub fn label(label: Label) -> Self {
        Self {
            label,
            raw_output: None,
            fallback: false,
        }
    }
}

pub trait Judge: Send + Sync {
    /// Identity used as part of the cache key.
    fn identity(&self) -> JudgeIdentity;

    /// Whether query and document texts must be supplied.
    fn needs_text(&self) -> bool {
        false
    }

    fn judge(&self, item: &JudgeItem<'_>) -> Result<Verdict, JudgeError>;
}

impl<J: Judge + ?Sized> Judge for &J {
    fn identity(&self) -> JudgeIdentity {
        (**self).identity()
    }

    fn needs_text(&self) -> bool {
        (**self).needs_text()
    }

    fn judge(&self, item: &JudgeItem<'_>) -> Result<Verdict, JudgeError> {
        (**self).judge(item)
    }
}

impl<J: Judge + ?Sized> Judge for Box<J> {
    fn identity(&self) -> JudgeIdentity {
        (**self).identity()
    }

    fn needs_text(&self) -> bool {
        (**self).needs_text()
    }

    fn judge(&self, item: &JudgeItem<'_>) -> Result<Verdict, JudgeError> {
        (**self).judge(item)
    }
}

#[derive(Debug, Error)]
pub enum JudgeError {
    #[error("no score for query `{query_id}` and document `{doc_id}`")]
    MissingScore { query_id: String, doc_id: String },

    #[error("no stored judgment for query `{query_id}` and document `{doc_id}`")]
    MissingJudgment { query_id: String, doc_id: String },

    #[error("no text for {kind} `{id}`")]
    MissingText { kind: &'static str, id: String },

    #[error("empty {0} text")]
    EmptyInput(&'static str),

    #[error("transport failure for query `{query_id}` document `{doc_id}` after {attempts} attempt(s): {message}")]
    Transport {
        query_id: String,
        doc_id: String,
        attempts: u32,
        message: String,
    },

    #[error("endpoint rejected credentials (HTTP {status}); set QPP_API_KEY")]
    Authentication { status: u16 },

    #[error("endpoint returned HTTP {status}: {body}")]
    Endpoint { status: u16, body: String },

    #[error("endpoint returned an empty completion for query `{query_id}` document `{doc_id}`")]
    EmptyCompletion { query_id: String, doc_id: String },

    #[error(transparent)]
    Unparseable(#[from] UnparseableOutput),

    #[error("invalid judge configuration: {0}")]
    Config(String),

    #[error("judgment store: {0}")]
    Store(#[from] TrecError),

    #[error("query `{query_id}` position {position} (document `{doc_id}`): {source}")]
    Item {
        query_id: String,
        doc_id: String,
        position: usize,
        #[source]
        source: Box<JudgeError>,
    },

    #[error("judging depth must be at least 1")]
    ZeroDepth,
}
