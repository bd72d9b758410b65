use std::time::Duration;

use super::llm::ApiStyle;
use super::JudgeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JudgeKind {
    Oracle,
    Threshold,
    Llm,
}

impl std::str::FromStr for JudgeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oracle" => Ok(JudgeKind::Oracle),
            "threshold" => Ok(JudgeKind::Threshold),
            "llm" => Ok(JudgeKind::Llm),
            other => Err(format!(
                "unknown judge `{other}` (expected oracle, threshold or llm)"
            )),
        }
    }
}

/// Exponential backoff between attempts: `base * factor^(attempt - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub backoff_base: Duration,
    pub backoff_factor: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            backoff_base: Duration::from_secs(1),
            backoff_factor: 2.0,
        }
    }
}

impl RetryPolicy {
    /// Pause after the given failed attempt (1-based).
    pub fn delay_after(&self, attempt: u32) -> Duration {
        let exp = attempt.saturating_sub(1) as i32;
        self.backoff_base.mul_f64(self.backoff_factor.powi(exp))
    }
}

/// Settings for the HTTP completion endpoint. Decoding is always greedy
/// (temperature 0).
#[derive(Debug, Clone)]
pub struct LlmConfig {
    pub endpoint_url: String,
    pub model_name: String,
    pub api_style: ApiStyle,
    pub max_new_tokens: u32,
    pub api_key: Option<String>,
    pub request_timeout: Duration,
    pub retry: RetryPolicy,
}

impl LlmConfig {
    pub fn new(endpoint_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            endpoint_url: endpoint_url.into(),
            model_name: model_name.into(),
            api_style: ApiStyle::Completions,
            max_new_tokens: 8,
            api_key: None,
            request_timeout: Duration::from_secs(60),
            retry: RetryPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<(), JudgeError> {
        if self.endpoint_url.is_empty() {
            return Err(JudgeError::Config("endpoint URL is required".into()));
        }
        if !(self.endpoint_url.starts_with("http://") || self.endpoint_url.starts_with("https://"))
        {
            return Err(JudgeError::Config(format!(
                "endpoint URL `{}` must start with http:// or https://",
                self.endpoint_url
            )));
        }
        if self.model_name.is_empty() {
            return Err(JudgeError::Config("model name is required".into()));
        }
        if self.max_new_tokens == 0 {
            return Err(JudgeError::Config(
                "max new tokens must be at least 1".into(),
            ));
        }
        if self.retry.max_attempts == 0 {
            return Err(JudgeError::Config("max attempts must be at least 1".into()));
        }
        if !(self.retry.backoff_factor.is_finite() && self.retry.backoff_factor >= 1.0) {
            return Err(JudgeError::Config("backoff factor must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct JudgeConfig {
    pub kind: JudgeKind,
    pub oracle_min_grade: u32,
    pub threshold: Option<f64>,
    pub llm: Option<LlmConfig>,
    pub max_in_flight: usize,
}

impl JudgeConfig {
    pub fn oracle(min_grade: u32) -> Self {
        Self {
            kind: JudgeKind::Oracle,
            oracle_min_grade: min_grade,
            threshold: None,
            llm: None,
            max_in_flight: 8,
        }
    }

    pub fn threshold(theta: f64) -> Self {
        Self {
            kind: JudgeKind::Threshold,
            threshold: Some(theta),
            ..Self::oracle(2)
        }
    }

    pub fn llm(config: LlmConfig) -> Self {
        Self {
            kind: JudgeKind::Llm,
            llm: Some(config),
            ..Self::oracle(2)
        }
    }

    pub fn validate(&self) -> Result<(), JudgeError> {
        if self.max_in_flight == 0 {
            return Err(JudgeError::Config(
                "max in flight must be at least 1".into(),
            ));
        }
        match self.kind {
            JudgeKind::Oracle => Ok(()),
            JudgeKind::Threshold => match self.threshold {
                Some(t) if !t.is_nan() => Ok(()),
                Some(_) => Err(JudgeError::Config("threshold must not be NaN".into())),
                None => Err(JudgeError::Config(
                    "threshold judge needs a threshold".into(),
                )),
            },
            JudgeKind::Llm => self
                .llm
                .as_ref()
                .ok_or_else(|| JudgeError::Config("llm judge needs endpoint settings".into()))?
                .validate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles_from_one_second() {
        let p = RetryPolicy::default();
        assert_eq!(p.delay_after(1), Duration::from_secs(1));
        assert_eq!(p.delay_after(2), Duration::from_secs(2));
        assert_eq!(p.delay_after(3), Duration::from_secs(4));
    }

    #[test]
    fn defaults() {
        let c = LlmConfig::new("http://localhost:1/v1/completions", "m");
        assert_eq!(c.max_new_tokens, 8);
        assert_eq!(c.retry.max_attempts, 3);
        assert_eq!(JudgeConfig::llm(c).max_in_flight, 8);
        assert_eq!(JudgeConfig::oracle(2).oracle_min_grade, 2);
    }

    #[test]
    fn validation() {
        assert!(JudgeConfig::threshold(1.0).validate().is_ok());
        let mut t = JudgeConfig::threshold(1.0);
        t.threshold = None;
        assert!(t.validate().is_err());
        let mut o = JudgeConfig::oracle(2);
        o.max_in_flight = 0;
        assert!(o.validate().is_err());
        assert!(JudgeConfig::llm(LlmConfig::new("localhost", "m"))
            .validate()
            .is_err());
        assert!(JudgeConfig::llm(LlmConfig::new("http://x", ""))
            .validate()
            .is_err());
    }
}
