//! LLM judge over a JSON-over-HTTP completion endpoint.
//!
//! Two request shapes are supported. `completions` posts
//! `{"model", "prompt", "temperature": 0, "max_tokens"}` and reads
//! `choices[0].text`; `chat` posts a single user message and reads
//! `choices[0].message.content`. Servers answering with a top-level
//! `text`, `response` or `content` string are also understood.

use std::thread;
use std::time::Duration;

use serde_json::{json, Value};
use thiserror::Error;

use crate::trec_io::{Document, JudgeIdentity, Label, Query, Source};

use super::config::{LlmConfig, RetryPolicy};
use super::parse::parse_relevance_output;
use super::prompt::build_relevance_prompt;
use super::{Judge, JudgeError, JudgeItem, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApiStyle {
    #[default]
    Completions,
    Chat,
}

impl std::str::FromStr for ApiStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "completions" => Ok(ApiStyle::Completions),
            "chat" => Ok(ApiStyle::Chat),
            other => Err(format!(
                "unknown api style `{other}` (expected completions or chat)"
            )),
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum CompletionError {
    #[error("{0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("HTTP {status}: authentication failed")]
    Auth { status: u16 },
    #[error("unexpected response body: {0}")]
    Malformed(String),
}

impl CompletionError {
    /// Network errors, timeouts, 429 and 5xx are worth retrying.
    pub fn is_retryable(&self) -> bool {
        match self {
            CompletionError::Transport(_) => true,
            CompletionError::Status { status, .. } => *status == 429 || *status >= 500,
            CompletionError::Auth { .. } | CompletionError::Malformed(_) => false,
        }
    }
}

/// Turns a prompt into a completion. One call is one request; retries are
/// handled by the caller.
pub trait Completer: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, CompletionError>;
}

pub struct HttpCompleter {
    client: reqwest::blocking::Client,
    config: LlmConfig,
}

impl HttpCompleter {
    pub fn new(config: LlmConfig) -> Result<Self, JudgeError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(config.request_timeout)
            .build()
            .map_err(|e| JudgeError::Config(e.to_string()))?;
        Ok(Self { client, config })
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    pub fn request_body(&self, prompt: &str) -> Value {
        let c = &self.config;
        match c.api_style {
            ApiStyle::Completions => json!({
                "model": c.model_name,
                "prompt": prompt,
                "temperature": 0,
                "max_tokens": c.max_new_tokens,
            }),
            ApiStyle::Chat => json!({
                "model": c.model_name,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": 0,
                "max_tokens": c.max_new_tokens,
            }),
        }
    }
}

fn extract_completion(body: &Value) -> Option<String> {
    let choice = body.get("choices").and_then(|c| c.get(0));
    let candidates = [
        choice.and_then(|c| c.get("text")),
        choice
            .and_then(|c| c.get("message"))
            .and_then(|m| m.get("content")),
        body.get("text"),
        body.get("response"),
        body.get("content"),
    ];
    candidates
        .into_iter()
        .flatten()
        .find_map(|v| v.as_str().map(str::to_string))
}

impl Completer for HttpCompleter {
    fn complete(&self, prompt: &str) -> Result<String, CompletionError> {
        let mut req = self
            .client
            .post(&self.config.endpoint_url)
            .json(&self.request_body(prompt));
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            let kind = if e.is_timeout() {
                "timeout"
            } else {
                "request failed"
            };
            CompletionError::Transport(format!("{kind}: {e}"))
        })?;
        let status = resp.status().as_u16();
        if status == 401 || status == 403 {
            return Err(CompletionError::Auth { status });
        }
        let text = resp
            .text()
            .map_err(|e| CompletionError::Transport(format!("reading body: {e}")))?;
        if !(200..300).contains(&status) {
            return Err(CompletionError::Status { status, body: text });
        }
        let body: Value =
            serde_json::from_str(&text).map_err(|e| CompletionError::Malformed(e.to_string()))?;
        extract_completion(&body).ok_or(CompletionError::Malformed(text))
    }
}

pub(crate) enum Attempted<T> {
    Parsed(T, String),
    Unparseable(String),
    Empty,
    Transport { attempts: u32, message: String },
}

/// Calls the completer until `parse` accepts the output or attempts run out.
/// Non-retryable endpoint errors are returned immediately.
pub(crate) fn complete_with_retry<C: Completer + ?Sized, T>(
    completer: &C,
    retry: &RetryPolicy,
    prompt: &str,
    parse: impl Fn(&str) -> Option<T>,
) -> Result<Attempted<T>, JudgeError> {
    let mut last = Attempted::Empty;
    for attempt in 1..=retry.max_attempts.max(1) {
        let mut backoff = true;
        match completer.complete(prompt) {
            Ok(text) if text.trim().is_empty() => last = Attempted::Empty,
            Ok(text) => match parse(&text) {
                Some(v) => return Ok(Attempted::Parsed(v, text)),
                None => {
                    // same prompt, same decoding: no point waiting
                    backoff = false;
                    last = Attempted::Unparseable(text);
                }
            },
            Err(CompletionError::Auth { status }) => {
                return Err(JudgeError::Authentication { status })
            }
            Err(e) if !e.is_retryable() => {
                return Err(match e {
                    CompletionError::Status { status, body } => {
                        JudgeError::Endpoint { status, body }
                    }
                    other => JudgeError::Endpoint {
                        status: 200,
                        body: other.to_string(),
                    },
                })
            }
            Err(e) => {
                last = Attempted::Transport {
                    attempts: attempt,
                    message: e.to_string(),
                }
            }
        }
        if attempt < retry.max_attempts && backoff {
            sleep(retry.delay_after(attempt));
        }
    }
    Ok(last)
}

fn sleep(d: Duration) {
    if !d.is_zero() {
        thread::sleep(d);
    }
}

/// Judges a pair by prompting a model and reading "Relevant"/"Irrelevant".
/// Output that never parses within the retry budget is labelled
/// irrelevant and flagged as a fallback.
pub struct LlmJudge<C = HttpCompleter> {
    completer: C,
    model_name: String,
    retry: RetryPolicy,
}

impl LlmJudge<HttpCompleter> {
    pub fn from_config(config: LlmConfig) -> Result<Self, JudgeError> {
        let model_name = config.model_name.clone();
        let retry = config.retry.clone();
        Ok(Self {
            completer: HttpCompleter::new(config)?,
            model_name,
            retry,
        })
    }
}

impl<C: Completer> LlmJudge<C> {
    pub fn with_completer(completer: C, model_name: impl Into<String>, retry: RetryPolicy) -> Self {
        Self {
            completer,
            model_name: model_name.into(),
            retry,
        }
    }

    pub fn completer(&self) -> &C {
        &self.completer
    }

    /// Judges one query/passage pair.
    pub fn judge_pair(&self, query: &Query, passage: &Document) -> Result<Verdict, JudgeError> {
        let prompt = build_relevance_prompt(query, passage)?;
        let attempted = complete_with_retry(&self.completer, &self.retry, &prompt, |t| {
            parse_relevance_output(t).ok()
        })?;
        match attempted {
            Attempted::Parsed(label, raw) => Ok(Verdict {
                label,
                raw_output: Some(raw),
                fallback: false,
            }),
            Attempted::Unparseable(raw) => {
                log::warn!(
                    "query {} doc {}: unparseable output {raw:?}, labelled irrelevant",
                    query.id,
                    passage.id
                );
                Ok(Verdict {
                    label: Label::Irrelevant,
                    raw_output: Some(raw),
                    fallback: true,
                })
            }
            Attempted::Empty => Err(JudgeError::EmptyCompletion {
                query_id: query.id.clone(),
                doc_id: passage.id.clone(),
            }),
            Attempted::Transport { attempts, message } => Err(JudgeError::Transport {
                query_id: query.id.clone(),
                doc_id: passage.id.clone(),
                attempts,
                message,
            }),
        }
    }
}

impl<C: Completer> Judge for LlmJudge<C> {
    fn identity(&self) -> JudgeIdentity {
        JudgeIdentity::new(Source::Llm, self.model_name.clone())
    }

    fn needs_text(&self) -> bool {
        true
    }

    fn judge(&self, item: &JudgeItem<'_>) -> Result<Verdict, JudgeError> {
        let query = Query {
            id: item.query_id.to_string(),
            text: item
                .query_text
                .ok_or_else(|| JudgeError::MissingText {
                    kind: "query",
                    id: item.query_id.to_string(),
                })?
                .to_string(),
        };
        let passage = Document {
            id: item.doc_id.to_string(),
            text: item
                .doc_text
                .ok_or_else(|| JudgeError::MissingText {
                    kind: "document",
                    id: item.doc_id.to_string(),
                })?
                .to_string(),
        };
        self.judge_pair(&query, &passage)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    /// Replays a fixed list of responses, repeating the last one.
    struct Scripted {
        replies: Mutex<Vec<Result<String, CompletionError>>>,
        calls: AtomicUsize,
    }

    impl Scripted {
        fn new(replies: Vec<Result<&str, CompletionError>>) -> Self {
            Self {
                replies: Mutex::new(
                    replies
                        .into_iter()
                        .rev()
                        .map(|r| r.map(String::from))
                        .collect(),
                ),
                calls: AtomicUsize::new(0),
            }
        }
    }

    impl Completer for Scripted {
        fn complete(&self, _prompt: &str) -> Result<String, CompletionError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            let mut r = self.replies.lock().unwrap();
            if r.len() > 1 {
                r.pop().unwrap()
            } else {
                r.last().unwrap().clone()
            }
        }
    }

    fn fast_retry() -> RetryPolicy {
        RetryPolicy {
            max_attempts: 3,
            backoff_base: Duration::ZERO,
            backoff_factor: 2.0,
        }
    }

    fn judge_with(replies: Vec<Result<&str, CompletionError>>) -> LlmJudge<Scripted> {
        LlmJudge::with_completer(Scripted::new(replies), "test-model", fast_retry())
    }

    fn item<'a>() -> JudgeItem<'a> {
        JudgeItem {
            query_id: "q1",
            doc_id: "d1",
            query_text: Some("what is llm"),
            doc_text: Some("a passage"),
        }
    }

    #[test]
    fn relevant_reply() {
        let j = judge_with(vec![Ok("Relevant")]);
        let v = j.judge(&item()).unwrap();
        assert_eq!(v.label, Label::Relevant);
        assert_eq!(v.raw_output.as_deref(), Some("Relevant"));
        assert!(!v.fallback);
    }

    #[test]
    fn irrelevant_reply() {
        let v = judge_with(vec![Ok("Irrelevant")]).judge(&item()).unwrap();
        assert_eq!(v.label, Label::Irrelevant);
    }

    #[test]
    fn retries_transport_then_succeeds() {
        let j = judge_with(vec![
            Err(CompletionError::Transport("timeout".into())),
            Ok(" relevant"),
        ]);
        assert_eq!(j.judge(&item()).unwrap().label, Label::Relevant);
        assert_eq!(j.completer().calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn transport_failure_names_pair() {
        let j = judge_with(vec![Err(CompletionError::Transport("timeout".into()))]);
        match j.judge(&item()) {
            Err(JudgeError::Transport {
                query_id,
                doc_id,
                attempts,
                ..
            }) => {
                assert_eq!(
                    (query_id.as_str(), doc_id.as_str(), attempts),
                    ("q1", "d1", 3)
                );
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(j.completer().calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn unparseable_falls_back_to_irrelevant() {
        let j = judge_with(vec![Ok("maybe?")]);
        let v = j.judge(&item()).unwrap();
        assert_eq!(v.label, Label::Irrelevant);
        assert!(v.fallback);
        assert_eq!(v.raw_output.as_deref(), Some("maybe?"));
        assert_eq!(j.completer().calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn auth_failure_is_not_retried() {
        let j = judge_with(vec![Err(CompletionError::Auth { status: 401 })]);
        assert!(matches!(
            j.judge(&item()),
            Err(JudgeError::Authentication { status: 401 })
        ));
        assert_eq!(j.completer().calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn empty_completion_is_error() {
        let j = judge_with(vec![Ok("  ")]);
        assert!(matches!(
            j.judge(&item()),
            Err(JudgeError::EmptyCompletion { .. })
        ));
    }

    #[test]
    fn missing_text_is_error() {
        let j = judge_with(vec![Ok("Relevant")]);
        let bare = JudgeItem::ids("q1", "d1");
        assert!(matches!(
            j.judge(&bare),
            Err(JudgeError::MissingText { kind: "query", .. })
        ));
    }

    #[test]
    fn completion_extraction_shapes() {
        let c: Value = serde_json::from_str(r#"{"choices":[{"text":"Relevant"}]}"#).unwrap();
        assert_eq!(extract_completion(&c).as_deref(), Some("Relevant"));
        let chat: Value = serde_json::from_str(
            r#"{"choices":[{"message":{"role":"assistant","content":"Irrelevant"}}]}"#,
        )
        .unwrap();
        assert_eq!(extract_completion(&chat).as_deref(), Some("Irrelevant"));
        let plain: Value = serde_json::from_str(r#"{"response":"Relevant"}"#).unwrap();
        assert_eq!(extract_completion(&plain).as_deref(), Some("Relevant"));
        assert_eq!(extract_completion(&json!({"x": 1})), None);
    }

    #[test]
    fn request_body_is_deterministic() {
        let mut cfg = LlmConfig::new("http://localhost:9/v1/chat/completions", "m");
        cfg.api_style = ApiStyle::Chat;
        let c = HttpCompleter::new(cfg).unwrap();
        let body = c.request_body("hi");
        assert_eq!(body["temperature"], 0);
        assert_eq!(body["max_tokens"], 8);
        assert_eq!(body["messages"][0]["role"], "user");
        assert_eq!(body["messages"][0]["content"], "hi");
    }
}
