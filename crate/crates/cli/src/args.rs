use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "qpp",
    version,
    about = "Query performance prediction from generated relevance judgments"
)]
pub struct Cli {
    /// TOML file with option values; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Log filter: error, warn, info, debug or trace.
    #[arg(long, global = true)]
    pub log_level: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Judge the top of every ranked list and append labels to a store.
    Judge(JudgeCmd),
    /// Predict IR measures from generated judgments.
    Predict(PredictCmd),
    /// Score-based and LLM direct-score predictors.
    Baseline(BaselineCmd),
    /// Correlate predicted with actual per-query values.
    Evaluate(EvaluateCmd),
    /// Correlation as a function of judging depth.
    Sweep(SweepCmd),
    /// Agreement between stored judgments and human qrels.
    Agreement(AgreementCmd),
    /// Correlation of threshold-judge predictions over a range of thresholds.
    ThresholdScan(ThresholdScanCmd),
    /// Pick baseline hyper-parameters on one query set by Pearson correlation.
    Tune(TuneCmd),
}

impl Command {
    /// Config-file section holding this command's options.
    pub fn section(&self) -> &'static str {
        match self {
            Command::Judge(_) => "judge",
            Command::Predict(_) => "predict",
            Command::Baseline(_) => "baseline",
            Command::Evaluate(_) => "evaluate",
            Command::Sweep(_) => "sweep",
            Command::Agreement(_) => "agreement",
            Command::ThresholdScan(_) => "threshold_scan",
            Command::Tune(_) => "tune",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct RunArgs {
    /// TREC run file.
    #[arg(long)]
    pub run: Option<PathBuf>,

    /// Entries kept per ranked list (default 1000).
    #[arg(long)]
    pub max_list_len: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct TextArgs {
    /// Query texts, TSV (`id<TAB>text`) or JSONL (`id`, `contents`).
    #[arg(long)]
    pub queries: Option<PathBuf>,

    /// Passage texts in the same formats.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmArgs {
    /// Completion endpoint URL.
    #[arg(long)]
    pub endpoint: Option<String>,

    #[arg(long)]
    pub model: Option<String>,

    /// `completions` or `chat`.
    #[arg(long)]
    pub api_style: Option<String>,

    #[arg(long)]
    pub max_new_tokens: Option<u32>,

    /// Per-request timeout in seconds.
    #[arg(long)]
    pub timeout_secs: Option<f64>,

    #[arg(long)]
    pub max_attempts: Option<u32>,

    /// Delay after the first failed attempt, doubled after each further one.
    #[arg(long)]
    pub backoff_secs: Option<f64>,

    /// Concurrent requests.
    #[arg(long)]
    pub max_in_flight: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct JudgeArgs {
    /// `oracle`, `threshold` or `llm`.
    #[arg(long = "judge", value_name = "KIND")]
    pub judge_kind: Option<String>,

    /// Human qrels, required by the oracle judge.
    #[arg(long)]
    pub qrels: Option<PathBuf>,

    /// Oracle judge: lowest grade counted as relevant (default 2).
    #[arg(long)]
    pub min_grade: Option<u32>,

    /// Threshold judge: relevant iff score >= theta.
    #[arg(long)]
    pub theta: Option<f64>,

    /// Threshold judge: run-format score table (defaults to the run).
    #[arg(long)]
    pub scores: Option<PathBuf>,

    /// JSONL judgment store, read as a cache and appended to.
    #[arg(long)]
    pub judgments: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub llm: LlmArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct JudgeCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: RunArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub texts: TextArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub judge: JudgeArgs,

    /// Items judged per ranked list.
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: RunArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub texts: TextArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub judge: JudgeArgs,

    /// Measure to predict, e.g. rr@10, ndcg@10, p@10; repeatable.
    #[arg(long = "metric")]
    pub metric: Vec<String>,

    /// Judging depth for every metric (default: each metric's cutoff).
    #[arg(long)]
    pub depth: Option<usize>,

    /// Directory for prediction files (default: current directory).
    #[arg(long)]
    pub output_dir: Option<PathBuf>,

    /// `tsv` or `json`.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: RunArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub texts: TextArgs,

    /// wig, nqc, sigma_max, n_sigma_x, smv or qpp_llm.
    #[arg(long)]
    pub method: Option<String>,

    /// Top-k cutoff (passages shown to the model for qpp_llm).
    #[arg(long)]
    pub k: Option<usize>,

    /// n_sigma_x: fraction of the top score (default 0.5).
    #[arg(long)]
    pub x: Option<f64>,

    /// `mean` (of each list) or a fixed number.
    #[arg(long)]
    pub corpus_score: Option<String>,

    /// n_sigma_x divisor: count, query_length or none.
    #[arg(long)]
    pub sigma_norm: Option<String>,

    /// qpp_llm: JSONL demonstrations with `query`, `passages`, `value`.
    #[arg(long)]
    pub demonstrations: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub llm: LlmArgs,

    /// Output file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// `tsv` or `json`.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluateCmd {
    /// Predicted values, `qid value` per line.
    #[arg(long)]
    pub predicted: Option<PathBuf>,

    /// Actual values, `qid value` or trec_eval `-q` output.
    #[arg(long)]
    pub actual: Option<PathBuf>,

    /// JSON report file.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: RunArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub texts: TextArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub judge: JudgeArgs,

    /// Measure and cutoff (default ndcg@10).
    #[arg(long)]
    pub metric: Option<String>,

    /// Ascending judging depths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub depths: Vec<usize>,

    #[arg(long)]
    pub actual: Option<PathBuf>,

    /// CSV file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct AgreementCmd {
    /// JSONL judgment store.
    #[arg(long)]
    pub judgments: Option<PathBuf>,

    #[arg(long)]
    pub qrels: Option<PathBuf>,

    /// Lowest human grade counted as relevant (default 2).
    #[arg(long)]
    pub min_grade: Option<u32>,

    /// Judge to compare, as `source:name`; needed when the store holds several.
    #[arg(long)]
    pub judge_name: Option<String>,

    /// Predicted per-query values for error distances.
    #[arg(long)]
    pub predicted: Option<PathBuf>,

    /// Actual per-query values for error distances.
    #[arg(long)]
    pub actual: Option<PathBuf>,

    /// Error distance file (default: stdout).
    #[arg(long)]
    pub distances: Option<PathBuf>,

    /// JSON report file.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdScanCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: RunArgs,

    /// Run-format score table (defaults to the run).
    #[arg(long)]
    pub scores: Option<PathBuf>,

    /// Qrels to derive actual values from, when --actual is absent.
    #[arg(long)]
    pub qrels: Option<PathBuf>,

    #[arg(long)]
    pub min_grade: Option<u32>,

    #[arg(long)]
    pub actual: Option<PathBuf>,

    /// Measure and cutoff (default ndcg@10).
    #[arg(long)]
    pub metric: Option<String>,

    #[arg(long, allow_negative_numbers = true)]
    pub theta_min: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub theta_max: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub step: Option<f64>,

    /// CSV file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneCmd {
    /// wig, nqc, sigma_max, n_sigma_x or smv.
    #[arg(long)]
    pub method: Option<String>,

    /// Run of the tuning set.
    #[arg(long)]
    pub run: Option<PathBuf>,

    /// Actual values of the tuning set.
    #[arg(long)]
    pub actual: Option<PathBuf>,

    #[arg(long)]
    pub max_list_len: Option<usize>,

    /// Query texts covering both sets, for methods using term counts.
    #[arg(long)]
    pub queries: Option<PathBuf>,

    /// Candidate cutoffs, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub k_grid: Vec<usize>,

    /// Candidate n_sigma_x fractions, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub x_grid: Vec<f64>,

    #[arg(long)]
    pub corpus_score: Option<String>,

    #[arg(long)]
    pub sigma_norm: Option<String>,

    /// Run of the paired set to predict with the chosen parameters.
    #[arg(long)]
    pub apply_run: Option<PathBuf>,

    /// Predictions on the paired set.
    #[arg(long)]
    pub predictions: Option<PathBuf>,

    /// JSON file with the chosen parameters and every candidate's score.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
