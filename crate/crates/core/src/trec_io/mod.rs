//! Readers and writers for the on-disk formats: TREC runs and qrels,
//! query/document collections, judgment stores and per-query value tables.

mod collection;
mod judgments;
mod qrels;
mod run;
mod values;

pub use collection::{parse_collection, Collection, CollectionFormat, Document, Query};
pub use judgments::{
    read_judgments, JudgeIdentity, JudgmentKey, JudgmentRecord, JudgmentStore, Label, Source,
};
pub use qrels::{parse_qrels, write_qrels, Qrels};
pub use run::{
    parse_run, parse_run_with_limit, write_run, RankedEntry, RankedList, Run, ScoreTable,
    DEFAULT_MAX_LIST_LEN,
};
pub use values::{parse_values, write_values_json, write_values_tsv, QueryValues};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrecError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("duplicate entry for query `{query_id}` and document `{doc_id}` at line {line}")]
    DuplicatePair {
        query_id: String,
        doc_id: String,
        line: usize,
    },

    #[error("line {line}: negative grade {grade} for query `{query_id}` and document `{doc_id}`")]
    NegativeGrade {
        query_id: String,
        doc_id: String,
        grade: i64,
        line: usize,
    },

    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { id: String, line: usize },

    #[error("line {line}: missing field `{field}`")]
    MissingField { field: &'static str, line: usize },

    #[error("line {line}: invalid encoding: {message}")]
    Encoding { line: usize, message: String },

    #[error("judgment store at byte offset {offset}: {message}")]
    CorruptRecord { offset: u64, message: String },

    #[error("invalid label {0}; labels must be 0 or 1")]
    InvalidLabel(i64),

    #[error("duplicate judgment for `{0}`")]
    DuplicateJudgment(JudgmentKey),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = TrecError> = std::result::Result<T, E>;

/// Reads an input stream line by line, keeping 1-based line numbers and
/// reporting invalid UTF-8 as an encoding error tied to the line.
pub(crate) fn numbered_lines<R: std::io::BufRead>(
    mut reader: R,
) -> impl Iterator<Item = Result<(usize, String)>> {
    let mut line_no = 0usize;
    let mut buf = Vec::new();
    std::iter::from_fn(move || {
        buf.clear();
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) => None,
            Ok(_) => {
                line_no += 1;
                while matches!(buf.last(), Some(b'\n' | b'\r')) {
                    buf.pop();
                }
                Some(
                    String::from_utf8(std::mem::take(&mut buf))
                        .map(|s| (line_no, s))
                        .map_err(|e| TrecError::Encoding {
                            line: line_no,
                            message: e.to_string(),
                        }),
                )
            }
            Err(e) => Some(Err(e.into())),
        }
    })
}
