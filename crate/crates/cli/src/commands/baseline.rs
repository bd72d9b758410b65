use std::io::Write;

use qpp_core::baselines::{
    predict_baseline, BaselineMethod, BaselineOutcome, BaselineSpec, CorpusScoreMode,
    SigmaNormalization,
};
use qpp_core::eval::{CorrelationReport, PairedSeries};
use qpp_core::judging::{qpp_llm_direct, Demonstration, HttpCompleter, JudgeError};
use qpp_core::trec_io::{Collection, Document, QueryValues, Run};
use serde::Serialize;

use crate::args::{BaselineCmd, TuneCmd};
use crate::error::CliError;

use super::{
    llm_config, load_collection, load_run, load_values, read_jsonl, required, write_json,
    write_values, OutputFormat,
};

fn corpus_score_mode(value: Option<&str>) -> Result<CorpusScoreMode, CliError> {
    match value {
        None | Some("mean") | Some("mean_of_list") => Ok(CorpusScoreMode::MeanOfList),
        Some(v) => v
            .parse::<f64>()
            .map(CorpusScoreMode::Provided)
            .map_err(|_| {
                CliError::Config(format!("corpus score `{v}` is neither `mean` nor a number"))
            }),
    }
}

fn uses_k(method: BaselineMethod) -> bool {
    matches!(
        method,
        BaselineMethod::Wig | BaselineMethod::Nqc | BaselineMethod::Smv
    )
}

fn is_qpp_llm(method: &str) -> bool {
    matches!(
        method.to_ascii_lowercase().replace('-', "_").as_str(),
        "qpp_llm"
    )
}

fn spec_from(
    method: BaselineMethod,
    k: Option<usize>,
    x: Option<f64>,
    corpus_score: Option<&str>,
    sigma_norm: Option<&str>,
) -> Result<BaselineSpec, CliError> {
    let k = match (uses_k(method), k) {
        (true, None) => return Err(CliError::missing("k")),
        (_, k) => k.unwrap_or(1),
    };
    let mut spec = BaselineSpec::new(method, k);
    if let Some(x) = x {
        spec.x = x;
    }
    spec.corpus_score = corpus_score_mode(corpus_score)?;
    if let Some(n) = sigma_norm {
        spec.sigma_norm = n.parse::<SigmaNormalization>()?;
    }
    spec.validate()?;
    Ok(spec)
}

fn load_queries_if(
    needed: bool,
    path: Option<&std::path::Path>,
) -> Result<Option<Collection>, CliError> {
    if !needed {
        return Ok(None);
    }
    let path = path.ok_or_else(|| {
        CliError::Config("this method needs --queries for query term counts".into())
    })?;
    Ok(Some(load_collection(path, "queries")?))
}

fn log_failures(outcome: &BaselineOutcome) -> Result<(), CliError> {
    if outcome.failures.is_empty() {
        return Ok(());
    }
    for (qid, e) in &outcome.failures {
        log::error!("query `{qid}`: {e}");
    }
    Err(CliError::Runtime(format!(
        "{} quer{} had no prediction",
        outcome.failures.len(),
        if outcome.failures.len() == 1 {
            "y"
        } else {
            "ies"
        }
    )))
}

pub fn baseline(cmd: &BaselineCmd, out: &mut dyn Write) -> Result<QueryValues, CliError> {
    let method = required(&cmd.method, "method")?;
    let format = OutputFormat::resolve(cmd.format.as_deref(), cmd.output.as_deref())?;
    let run = load_run(&required(&cmd.input.run, "run")?, cmd.input.max_list_len)?;
    let outcome = if is_qpp_llm(&method) {
        qpp_llm_baseline(cmd, &run)?
    } else {
        let spec = spec_from(
            method.parse()?,
            cmd.k,
            cmd.x,
            cmd.corpus_score.as_deref(),
            cmd.sigma_norm.as_deref(),
        )?;
        let queries = load_queries_if(spec.needs_query_length(), cmd.texts.queries.as_deref())?;
        predict_baseline(&run, &spec, queries.as_ref())?
    };
    write_values(&outcome.predictions, cmd.output.as_deref(), format, out)?;
    log_failures(&outcome)?;
    Ok(outcome.predictions)
}

fn qpp_llm_baseline(cmd: &BaselineCmd, run: &Run) -> Result<BaselineOutcome, CliError> {
    let k = required(&cmd.k, "k")?;
    if k == 0 {
        return Err(CliError::Config("k must be at least 1".into()));
    }
    let config = llm_config(&cmd.llm)?;
    let queries = load_collection(&required(&cmd.texts.queries, "queries")?, "queries")?;
    let corpus = load_collection(&required(&cmd.texts.corpus, "corpus")?, "corpus")?;
    let demos: Vec<Demonstration> = match &cmd.demonstrations {
        Some(p) => read_jsonl(p, "demonstrations")?,
        None => Vec::new(),
    };
    let retry = config.retry.clone();
    let completer = HttpCompleter::new(config)?;

    let mut outcome = BaselineOutcome::default();
    let mut failures = 0usize;
    for list in run.iter() {
        let qid = list.query_id();
        let Some(query) = queries.query(qid) else {
            log::error!("query `{qid}`: no text");
            failures += 1;
            continue;
        };
        let passages: Option<Vec<Document>> =
            list.doc_ids().take(k).map(|d| corpus.document(d)).collect();
        let Some(passages) = passages else {
            log::error!("query `{qid}`: a top-{k} passage has no text");
            failures += 1;
            continue;
        };
        match qpp_llm_direct(&completer, &retry, &query, &passages, &demos) {
            Ok(score) => {
                outcome.predictions.insert(qid.to_string(), score.value);
            }
            Err(e @ JudgeError::Authentication { .. }) => return Err(e.into()),
            Err(e) => {
                log::error!("query `{qid}`: {e}");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        return Err(CliError::Runtime(format!(
            "{failures} quer(ies) had no prediction"
        )));
    }
    Ok(outcome)
}

/// One grid point; fields a method does not use are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub k: Option<usize>,
    pub x: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoredCandidate {
    #[serde(flatten)]
    pub candidate: Candidate,
    /// `None` when the correlation is undefined.
    pub pearson: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TuneOutcome {
    pub method: String,
    pub chosen: Candidate,
    pub pearson: f64,
    pub candidates: Vec<ScoredCandidate>,
}

fn grid(method: BaselineMethod, ks: &[usize], xs: &[f64]) -> Result<Vec<Candidate>, CliError> {
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let mut xs = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let empty = |flag: &str| CliError::Config(format!("empty candidate grid: pass --{flag}"));
    Ok(match method {
        m if uses_k(m) => {
            if ks.is_empty() {
                return Err(empty("k-grid"));
            }
            ks.into_iter()
                .map(|k| Candidate {
                    k: Some(k),
                    x: None,
                })
                .collect()
        }
        BaselineMethod::NSigmaX => {
            if xs.is_empty() {
                return Err(empty("x-grid"));
            }
            xs.into_iter()
                .map(|x| Candidate {
                    k: None,
                    x: Some(x),
                })
                .collect()
        }
        _ => vec![Candidate { k: None, x: None }],
    })
}

/// Highest Pearson wins; candidates are visited in ascending (k, x) order
/// and only a strictly higher value displaces the incumbent, so ties go to
/// the smaller k, then the smaller x. Undefined correlations never win.
pub fn select(scored: &[ScoredCandidate]) -> Option<(Candidate, f64)> {
    let mut best: Option<(Candidate, f64)> = None;
    for s in scored {
        if let Some(p) = s.pearson {
            if best.is_none_or(|(_, b)| p > b) {
                best = Some((s.candidate, p));
            }
        }
    }
    best
}

pub fn tune(cmd: &TuneCmd, out: &mut dyn Write) -> Result<TuneOutcome, CliError> {
    let method_name = required(&cmd.method, "method")?;
    let method: BaselineMethod = method_name.parse()?;
    let candidates = grid(method, &cmd.k_grid, &cmd.x_grid)?;
    let run = load_run(&required(&cmd.run, "run")?, cmd.max_list_len)?;
    let actual = load_values(&required(&cmd.actual, "actual")?, "actual values")?;
    let apply = match &cmd.apply_run {
        Some(p) => Some((
            load_run(p, cmd.max_list_len)?,
            required(&cmd.predictions, "predictions")?,
        )),
        None => None,
    };
    let probe = spec_from(
        method,
        Some(1),
        None,
        cmd.corpus_score.as_deref(),
        cmd.sigma_norm.as_deref(),
    )?;
    let queries = load_queries_if(probe.needs_query_length(), cmd.queries.as_deref())?;
    let spec_for = |c: &Candidate| {
        let mut spec = probe.clone();
        spec.k = c.k.unwrap_or(1);
        if let Some(x) = c.x {
            spec.x = x;
        }
        spec.validate().map(|_| spec)
    };

    let mut scored = Vec::with_capacity(candidates.len());
    for c in &candidates {
        let spec = spec_for(c)?;
        let outcome = predict_baseline(&run, &spec, queries.as_ref())?;
        let pearson = PairedSeries::align(&outcome.predictions, &actual)
            .and_then(|a| CorrelationReport::compute(&a.series))
            .map(|r| r.pearson);
        if let Err(e) = &pearson {
            log::warn!("{method_name} {c:?}: {e}");
        }
        scored.push(ScoredCandidate {
            candidate: *c,
            pearson: pearson.ok(),
        });
    }
    let (chosen, pearson) = select(&scored).ok_or_else(|| {
        CliError::Runtime("no candidate produced a defined Pearson correlation".into())
    })?;
    let result = TuneOutcome {
        method: method_name,
        chosen,
        pearson,
        candidates: scored,
    };

    write_json(&result, cmd.output.as_deref(), out)?;
    if let Some((apply, path)) = apply {
        let outcome = predict_baseline(&apply, &spec_for(&chosen)?, queries.as_ref())?;
        let format = OutputFormat::resolve(None, Some(&path))?;
        write_values(&outcome.predictions, Some(&path), format, out)?;
        log_failures(&outcome)?;
    }
    Ok(result)
}
