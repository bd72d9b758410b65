//! One function per subcommand. Each takes fully layered options and a
//! writer for data that has no output file; progress goes to the log.

mod baseline;
mod eval;
mod judging;

pub use baseline::{baseline, select, tune, Candidate, ScoredCandidate, TuneOutcome};
pub use eval::{agreement, evaluate, threshold_scan, AgreementReport, ThresholdRow};
pub use judging::{judge, predict, sweep, JudgeSummary};

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use qpp_core::judging::{
    Judge, JudgeConfig, JudgeKind, JudgingContext, LlmConfig, LlmJudge, OracleJudge, RetryPolicy,
    ThresholdJudge,
};
use qpp_core::trec_io::{
    parse_collection, parse_qrels, parse_run_with_limit, parse_values, write_values_json,
    write_values_tsv, Collection, CollectionFormat, JudgmentStore, Qrels, QueryValues, Run,
    ScoreTable, DEFAULT_MAX_LIST_LEN,
};

use crate::args::{JudgeArgs, LlmArgs, TextArgs};
use crate::error::CliError;

pub const API_KEY_VAR: &str = "QPP_API_KEY";

pub(crate) fn required<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
    value.clone().ok_or_else(|| CliError::missing(flag))
}

pub(crate) fn open(path: &Path, what: &str) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Input(format!("cannot read {what} {}: {e}", path.display())))
}

fn parse_with<T, R>(
    path: &Path,
    what: &str,
    f: impl FnOnce(BufReader<File>) -> Result<T, R>,
) -> Result<T, CliError>
where
    R: std::fmt::Display,
{
    f(open(path, what)?).map_err(|e| CliError::Input(format!("{what} {}: {e}", path.display())))
}

pub(crate) fn load_run(path: &Path, max_len: Option<usize>) -> Result<Run, CliError> {
    let max_len = max_len.unwrap_or(DEFAULT_MAX_LIST_LEN);
    if max_len == 0 {
        return Err(CliError::Config(
            "max list length must be at least 1".into(),
        ));
    }
    parse_with(path, "run", |r| parse_run_with_limit(r, max_len))
}

pub(crate) fn load_qrels(path: &Path) -> Result<Qrels, CliError> {
    parse_with(path, "qrels", parse_qrels)
}

pub(crate) fn load_values(path: &Path, what: &str) -> Result<QueryValues, CliError> {
    parse_with(path, what, parse_values)
}

pub(crate) fn load_collection(path: &Path, what: &str) -> Result<Collection, CliError> {
    let format = CollectionFormat::from_path(path);
    parse_with(path, what, |r| parse_collection(r, format))
}

pub(crate) fn load_scores(path: Option<&Path>, run: &Run) -> Result<ScoreTable, CliError> {
    match path {
        Some(p) => parse_with(p, "score table", ScoreTable::from_reader),
        None => Ok(ScoreTable::from(run)),
    }
}

pub(crate) fn read_jsonl<T: serde::de::DeserializeOwned>(
    path: &Path,
    what: &str,
) -> Result<Vec<T>, CliError> {
    let mut out = Vec::new();
    for (i, line) in open(path, what)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::Input(format!("{what} {}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| {
            CliError::Input(format!("{what} {} line {}: {e}", path.display(), i + 1))
        })?;
        out.push(item);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Tsv,
    Json,
}

impl OutputFormat {
    /// Explicit `--format`, else inferred from a `.json` extension.
    pub fn resolve(format: Option<&str>, path: Option<&Path>) -> Result<Self, CliError> {
        match format {
            Some("tsv") => Ok(OutputFormat::Tsv),
            Some("json") => Ok(OutputFormat::Json),
            Some(other) => Err(CliError::Config(format!(
                "unknown format `{other}` (expected tsv or json)"
            ))),
            None => Ok(
                match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
                    Some("json") => OutputFormat::Json,
                    _ => OutputFormat::Tsv,
                },
            ),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Tsv => "tsv",
            OutputFormat::Json => "json",
        }
    }
}

/// Runs `f` against the file at `path`, or against `fallback` when no path is given.
pub(crate) fn with_output<T>(
    path: Option<&Path>,
    fallback: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> std::io::Result<T>,
) -> Result<T, CliError> {
    match path {
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            let v = f(&mut w)?;
            w.flush()?;
            Ok(v)
        }
        None => {
            let v = f(fallback)?;
            fallback.flush()?;
            Ok(v)
        }
    }
}

pub(crate) fn write_values(
    values: &QueryValues,
    path: Option<&Path>,
    format: OutputFormat,
    fallback: &mut dyn Write,
) -> Result<(), CliError> {
    with_output(path, fallback, |w| match format {
        OutputFormat::Tsv => write_values_tsv(values, w),
        OutputFormat::Json => write_values_json(values, w),
    })
}

pub(crate) fn write_json<T: serde::Serialize>(
    value: &T,
    path: Option<&Path>,
    fallback: &mut dyn Write,
) -> Result<(), CliError> {
    with_output(path, fallback, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
        writeln!(w)
    })
}

fn seconds(v: f64, what: &str) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(v)
        .map_err(|_| CliError::Config(format!("{what} must be a non-negative number of seconds")))
}

pub(crate) fn llm_config(args: &LlmArgs) -> Result<LlmConfig, CliError> {
    let mut cfg = LlmConfig::new(
        required(&args.endpoint, "endpoint")?,
        required(&args.model, "model")?,
    );
    if let Some(style) = &args.api_style {
        cfg.api_style = style.parse().map_err(CliError::Config)?;
    }
    if let Some(n) = args.max_new_tokens {
        cfg.max_new_tokens = n;
    }
    if let Some(t) = args.timeout_secs {
        cfg.request_timeout = seconds(t, "timeout")?;
    }
    let defaults = RetryPolicy::default();
    cfg.retry = RetryPolicy {
        max_attempts: args.max_attempts.unwrap_or(defaults.max_attempts),
        backoff_base: match args.backoff_secs {
            Some(b) => seconds(b, "backoff")?,
            None => defaults.backoff_base,
        },
        ..defaults
    };
    cfg.api_key = std::env::var(API_KEY_VAR).ok().filter(|k| !k.is_empty());
    cfg.validate()?;
    Ok(cfg)
}

pub(crate) fn open_store(path: Option<&Path>) -> Result<JudgmentStore, CliError> {
    match path {
        Some(p) => JudgmentStore::open(p)
            .map_err(|e| CliError::Input(format!("judgment store {}: {e}", p.display()))),
        None => Ok(JudgmentStore::in_memory()),
    }
}

/// Everything a judge needs, loaded and validated before any judging starts.
pub(crate) struct JudgeSetup {
    pub config: JudgeConfig,
    qrels: Option<Qrels>,
    scores: Option<ScoreTable>,
    queries: Option<Collection>,
    corpus: Option<Collection>,
}

impl JudgeSetup {
    pub fn load(args: &JudgeArgs, texts: &TextArgs, run: &Run) -> Result<Self, CliError> {
        let kind: JudgeKind = required(&args.judge_kind, "judge")?
            .parse()
            .map_err(CliError::Config)?;
        let mut setup = JudgeSetup {
            config: match kind {
                JudgeKind::Oracle => JudgeConfig::oracle(args.min_grade.unwrap_or(2)),
                JudgeKind::Threshold => JudgeConfig::threshold(required(&args.theta, "theta")?),
                JudgeKind::Llm => JudgeConfig::llm(llm_config(&args.llm)?),
            },
            qrels: None,
            scores: None,
            queries: None,
            corpus: None,
        };
        if let Some(n) = args.llm.max_in_flight {
            setup.config.max_in_flight = n;
        }
        setup.config.validate()?;
        match kind {
            JudgeKind::Oracle => {
                let path = args
                    .qrels
                    .as_deref()
                    .ok_or_else(|| CliError::Config("the oracle judge needs --qrels".into()))?;
                setup.qrels = Some(load_qrels(path)?);
            }
            JudgeKind::Threshold => setup.scores = Some(load_scores(args.scores.as_deref(), run)?),
            JudgeKind::Llm => {
                let q = texts
                    .queries
                    .as_deref()
                    .ok_or_else(|| CliError::Config("the llm judge needs --queries".into()))?;
                let c = texts
                    .corpus
                    .as_deref()
                    .ok_or_else(|| CliError::Config("the llm judge needs --corpus".into()))?;
                setup.queries = Some(load_collection(q, "queries")?);
                setup.corpus = Some(load_collection(c, "corpus")?);
            }
        }
        Ok(setup)
    }

    pub fn judge(&self) -> Result<Box<dyn Judge + '_>, CliError> {
        Ok(match self.config.kind {
            JudgeKind::Oracle => Box::new(OracleJudge::new(
                self.qrels.as_ref().expect("loaded for oracle"),
                self.config.oracle_min_grade,
            )),
            JudgeKind::Threshold => Box::new(ThresholdJudge::new(
                self.scores.as_ref().expect("loaded for threshold"),
                self.config.threshold.expect("validated"),
            )),
            JudgeKind::Llm => Box::new(LlmJudge::from_config(
                self.config.llm.clone().expect("validated"),
            )?),
        })
    }

    pub fn context(&self) -> JudgingContext<'_> {
        JudgingContext {
            queries: self.queries.as_ref(),
            corpus: self.corpus.as_ref(),
            max_in_flight: self.config.max_in_flight,
        }
    }
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}
