use crate::trec_io::{Document, Query};

use super::config::RetryPolicy;
use super::llm::{complete_with_retry, Attempted, Completer};
use super::parse::{parse_score_output, UnparseableOutput};
use super::prompt::{build_qpp_llm_prompt, Demonstration};
use super::JudgeError;

#[derive(Debug, Clone, PartialEq)]
pub struct QppLlmScore {
    pub value: f64,
    /// The model's number fell outside [0, 1] and was clamped.
    pub clamped: bool,
    pub raw_output: String,
}

/// Asks the model for a single list-quality score in [0, 1].
pub fn qpp_llm_direct<C: Completer + ?Sized>(
    completer: &C,
    retry: &RetryPolicy,
    query: &Query,
    top_k_passages: &[Document],
    demonstrations: &[Demonstration],
) -> Result<QppLlmScore, JudgeError> {
    let prompt = build_qpp_llm_prompt(query, top_k_passages, demonstrations)?;
    match complete_with_retry(completer, retry, &prompt, |t| parse_score_output(t).ok())? {
        Attempted::Parsed(v, raw) => {
            let value = v.clamp(0.0, 1.0);
            let clamped = value != v;
            if clamped {
                log::warn!(
                    "query {}: score {v} outside [0, 1], clamped to {value}",
                    query.id
                );
            }
            Ok(QppLlmScore {
                value,
                clamped,
                raw_output: raw,
            })
        }
        Attempted::Unparseable(raw) => Err(UnparseableOutput { raw }.into()),
        Attempted::Empty => Err(JudgeError::EmptyCompletion {
            query_id: query.id.clone(),
            doc_id: String::new(),
        }),
        Attempted::Transport { attempts, message } => Err(JudgeError::Transport {
            query_id: query.id.clone(),
            doc_id: String::new(),
            attempts,
            message,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::judging::CompletionError;
    use std::time::Duration;

    struct Fixed(&'static str);

    impl Completer for Fixed {
        fn complete(&self, _prompt: &str) -> Result<String, CompletionError> {
            Ok(self.0.to_string())
        }
    }

    fn run(reply: &'static str) -> Result<QppLlmScore, JudgeError> {
        let retry = RetryPolicy {
            max_attempts: 1,
            backoff_base: Duration::ZERO,
            backoff_factor: 2.0,
        };
        let q = Query {
            id: "q1".into(),
            text: "query".into(),
        };
        let docs = [Document {
            id: "d1".into(),
            text: "passage".into(),
        }];
        qpp_llm_direct(&Fixed(reply), &retry, &q, &docs, &[])
    }

    #[test]
    fn plain_number() {
        let s = run("0.75").unwrap();
        assert_eq!(s.value, 0.75);
        assert!(!s.clamped);
    }

    #[test]
    fn out_of_range_is_clamped_and_flagged() {
        let s = run("score: 1.2").unwrap();
        assert_eq!(s.value, 1.0);
        assert!(s.clamped);
    }

    #[test]
    fn no_number_is_error() {
        assert!(matches!(
            run("high relevance"),
            Err(JudgeError::Unparseable(_))
        ));
    }
}
