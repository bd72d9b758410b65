use qpp_core::baselines::BaselineError;
use qpp_core::eval::EvalError;
use qpp_core::judging::JudgeError;
use qpp_core::metrics::{MetricError, PredictError};
use qpp_core::trec_io::TrecError;
use thiserror::Error;

/// Failure of a command; the variant fixes the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad options or configuration file.
    #[error("{0}")]
    Config(String),
    /// An input file is missing or does not parse.
    #[error("{0}")]
    Input(String),
    /// Judging, prediction or evaluation failed.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub(crate) fn missing(flag: &str) -> Self {
        let key = flag.replace('-', "_");
        CliError::Config(format!("missing --{flag} (or `{key}` in the config file)"))
    }
}

impl From<TrecError> for CliError {
    fn from(e: TrecError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<JudgeError> for CliError {
    fn from(e: JudgeError) -> Self {
        match e {
            JudgeError::Config(_) | JudgeError::ZeroDepth => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::DepthShortfall { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        match e {
            BaselineError::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::InvalidDepths(_) => CliError::Config(e.to_string()),
            EvalError::UndefinedCorrelation(_) => CliError::Runtime(format!(
                "{e}; one side is constant across queries (for example, every label came out 0), so no correlation can be reported"
            )),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<PredictError> for CliError {
    fn from(e: PredictError) -> Self {
        match e {
            PredictError::Judge(e) => e.into(),
            PredictError::Metric(e) => e.into(),
            PredictError::Eval(e) => e.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("writing output: {e}"))
    }
}
