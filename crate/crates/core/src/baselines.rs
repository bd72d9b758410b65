//! Unsupervised post-retrieval predictors that look only at retrieval
//! scores: WIG, NQC, σ_max, n(σ_x%) and SMV.
//!
//! Standard deviations are population (divide-by-N) throughout. The corpus
//! score `s_C` used as a normalizer is either supplied by the caller or
//! taken as the mean score of the full ranked list.
//!
//! The predictors take scores in rank order (best first), as produced by
//! [`RankedList::scores`].

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

use crate::trec_io::{Collection, QueryValues, RankedList, Run};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("ranked list is empty")]
    EmptyList,
    #[error("corpus score is zero")]
    ZeroCorpusScore,
    #[error("score {0} in the top-k is not positive; SMV needs positive scores")]
    NonPositiveScore(f64),
    #[error("top score {0} is not positive; n(sigma_x%) needs a positive top score")]
    NonPositiveTopScore(f64),
    #[error("query term count must be at least 1")]
    NoQueryTerms,
    #[error("no text for query `{0}`")]
    MissingQuery(String),
    #[error("invalid baseline configuration: {0}")]
    Config(String),
}

type Result<T, E = BaselineError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Wig,
    Nqc,
    SigmaMax,
    NSigmaX,
    Smv,
}

impl FromStr for BaselineMethod {
    type Err = BaselineError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "wig" => Ok(BaselineMethod::Wig),
            "nqc" => Ok(BaselineMethod::Nqc),
            "sigma_max" => Ok(BaselineMethod::SigmaMax),
            "n_sigma_x" => Ok(BaselineMethod::NSigmaX),
            "smv" => Ok(BaselineMethod::Smv),
            other => Err(BaselineError::Config(format!(
                "unknown method `{other}` (expected wig, nqc, sigma_max, n_sigma_x or smv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorpusScoreMode {
    Provided(f64),
    MeanOfList,
}

/// Divisor applied to the n(σ_x%) standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaNormalization {
    /// |D_x|, the number of items passing the cut.
    #[default]
    Count,
    QueryLength,
    None,
}

impl FromStr for SigmaNormalization {
    type Err = BaselineError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "count" => Ok(SigmaNormalization::Count),
            "query_length" | "query-length" => Ok(SigmaNormalization::QueryLength),
            "none" => Ok(SigmaNormalization::None),
            other => Err(BaselineError::Config(format!(
                "unknown normalization `{other}` (expected count, query_length or none)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSpec {
    pub method: BaselineMethod,
    pub k: usize,
    pub x: f64,
    pub corpus_score: CorpusScoreMode,
    pub sigma_norm: SigmaNormalization,
}

impl BaselineSpec {
    pub fn new(method: BaselineMethod, k: usize) -> Self {
        Self {
            method,
            k,
            x: 0.5,
            corpus_score: CorpusScoreMode::MeanOfList,
            sigma_norm: SigmaNormalization::Count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(BaselineError::Config("k must be at least 1".into()));
        }
        if !(self.x > 0.0 && self.x <= 1.0) {
            return Err(BaselineError::Config(format!(
                "x = {} is outside (0, 1]",
                self.x
            )));
        }
        if let CorpusScoreMode::Provided(v) = self.corpus_score {
            if !v.is_finite() {
                return Err(BaselineError::Config(
                    "provided corpus score is not finite".into(),
                ));
            }
        }
        Ok(())
    }

    /// Whether the method needs the query's term count.
    pub fn needs_query_length(&self) -> bool {
        self.method == BaselineMethod::Wig
            || (self.method == BaselineMethod::NSigmaX
                && self.sigma_norm == SigmaNormalization::QueryLength)
    }
}

fn top_k(scores: &[f64], k: usize) -> Result<&[f64]> {
    if scores.is_empty() {
        return Err(BaselineError::EmptyList);
    }
    Ok(&scores[..k.min(scores.len())])
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

pub fn corpus_score(scores: &[f64], mode: CorpusScoreMode) -> Result<f64> {
    if scores.is_empty() {
        return Err(BaselineError::EmptyList);
    }
    Ok(match mode {
        CorpusScoreMode::Provided(v) => v,
        CorpusScoreMode::MeanOfList => mean(scores),
    })
}

/// Mean gap between the top-k scores and the corpus score, divided by
/// `sqrt(|q|)`. Lists shorter than k use all their items.
pub fn wig(scores: &[f64], query_term_count: usize, k: usize, corpus: f64) -> Result<f64> {
    if query_term_count == 0 {
        return Err(BaselineError::NoQueryTerms);
    }
    let top = top_k(scores, k)?;
    let gap: f64 = top.iter().map(|s| s - corpus).sum::<f64>() / top.len() as f64;
    Ok(gap / (query_term_count as f64).sqrt())
}

/// Standard deviation of the top-k scores over the corpus score.
pub fn nqc(scores: &[f64], k: usize, corpus: f64) -> Result<f64> {
    if corpus == 0.0 {
        return Err(BaselineError::ZeroCorpusScore);
    }
    Ok(population_std(top_k(scores, k)?) / corpus)
}

/// Largest standard deviation among all score prefixes s_1..s_i.
pub fn sigma_max(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(BaselineError::EmptyList);
    }
    // Welford's running variance
    let (mut n, mut m, mut m2, mut best) = (0f64, 0f64, 0f64, 0f64);
    for &s in scores {
        n += 1.0;
        let d = s - m;
        m += d / n;
        m2 += d * (s - m);
        best = f64::max(best, (m2 / n).max(0.0).sqrt());
    }
    Ok(best)
}

/// Standard deviation over items scoring at least `x` times the top score,
/// divided according to `norm`.
pub fn n_sigma_x(
    scores: &[f64],
    x: f64,
    norm: SigmaNormalization,
    query_term_count: Option<usize>,
) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(BaselineError::Config(format!("x = {x} is outside (0, 1]")));
    }
    let top = *scores.first().ok_or(BaselineError::EmptyList)?;
    if top <= 0.0 {
        return Err(BaselineError::NonPositiveTopScore(top));
    }
    let cut = x * top;
    let kept: Vec<f64> = scores.iter().copied().take_while(|&s| s >= cut).collect();
    let std = population_std(&kept);
    Ok(match norm {
        SigmaNormalization::Count => std / kept.len() as f64,
        SigmaNormalization::QueryLength => match query_term_count {
            Some(n) if n > 0 => std / n as f64,
            _ => return Err(BaselineError::NoQueryTerms),
        },
        SigmaNormalization::None => std,
    })
}

/// `(1/k) Σ s_i |ln(s_i / μ)| / s_C` over the top-k, μ their mean.
pub fn smv(scores: &[f64], k: usize, corpus: f64) -> Result<f64> {
    if corpus == 0.0 {
        return Err(BaselineError::ZeroCorpusScore);
    }
    let top = top_k(scores, k)?;
    if let Some(&bad) = top.iter().find(|&&s| s <= 0.0) {
        return Err(BaselineError::NonPositiveScore(bad));
    }
    let mu = mean(top);
    let sum: f64 = top.iter().map(|s| s * (s / mu).ln().abs()).sum();
    Ok(sum / top.len() as f64 / corpus)
}

/// Whitespace token count of a query text.
pub fn query_term_count(text: &str) -> usize {
    text.split_whitespace().count()
}

fn predict_one(ranked: &RankedList, spec: &BaselineSpec, terms: Option<usize>) -> Result<f64> {
    let scores: Vec<f64> = ranked.scores().collect();
    let ranked = scores.as_slice();
    let s_c = || corpus_score(ranked, spec.corpus_score);
    match spec.method {
        BaselineMethod::Wig => wig(
            ranked,
            terms.ok_or(BaselineError::NoQueryTerms)?,
            spec.k,
            s_c()?,
        ),
        BaselineMethod::Nqc => nqc(ranked, spec.k, s_c()?),
        BaselineMethod::SigmaMax => sigma_max(ranked),
        BaselineMethod::NSigmaX => n_sigma_x(ranked, spec.x, spec.sigma_norm, terms),
        BaselineMethod::Smv => smv(ranked, spec.k, s_c()?),
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct BaselineOutcome {
    pub predictions: QueryValues,
    pub failures: BTreeMap<String, BaselineError>,
}

/// Applies one predictor to every query of a run. Configuration errors
/// fail the whole call; per-query errors are collected.
pub fn predict_baseline(
    run: &Run,
    spec: &BaselineSpec,
    queries: Option<&Collection>,
) -> Result<BaselineOutcome> {
    spec.validate()?;
    if spec.needs_query_length() && queries.is_none() {
        return Err(BaselineError::Config(
            "this method needs query texts for term counts".into(),
        ));
    }
    let mut out = BaselineOutcome::default();
    for list in run.iter() {
        let qid = list.query_id();
        let terms = if spec.needs_query_length() {
            match queries.and_then(|q| q.text(qid)) {
                Some(t) => Some(query_term_count(t)),
                None => {
                    out.failures.insert(
                        qid.to_string(),
                        BaselineError::MissingQuery(qid.to_string()),
                    );
                    continue;
                }
            }
        } else {
            None
        };
        match predict_one(list, spec, terms) {
            Ok(v) => {
                out.predictions.insert(qid.to_string(), v);
            }
            Err(e) => {
                out.failures.insert(qid.to_string(), e);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trec_io::RankedEntry;
    use approx::assert_abs_diff_eq;

    fn ranked(scores: &[f64]) -> RankedList {
        let entries = scores
            .iter()
            .enumerate()
            .map(|(i, &s)| RankedEntry::new(format!("d{i:03}"), s))
            .collect();
        RankedList::new("q", "t", entries).unwrap()
    }

    #[test]
    fn corpus_score_modes() {
        assert_eq!(
            corpus_score(&[4.0, 2.0], CorpusScoreMode::MeanOfList).unwrap(),
            3.0
        );
        assert_eq!(
            corpus_score(&[4.0], CorpusScoreMode::Provided(7.0)).unwrap(),
            7.0
        );
        assert_eq!(
            corpus_score(&[] as &[f64], CorpusScoreMode::MeanOfList),
            Err(BaselineError::EmptyList)
        );
    }

    #[test]
    fn wig_examples() {
        assert_abs_diff_eq!(wig(&[10.0, 8.0], 4, 2, 6.0).unwrap(), 1.5, epsilon = 1e-12);
        assert_eq!(wig(&[3.0, 3.0], 2, 2, 3.0).unwrap(), 0.0);
        assert_eq!(wig(&[7.0], 1, 1, 7.0).unwrap(), 0.0);
        // k beyond the list uses what is there
        assert_abs_diff_eq!(
            wig(&[10.0, 8.0], 4, 100, 6.0).unwrap(),
            1.5,
            epsilon = 1e-12
        );
        assert!(wig(&[] as &[f64], 1, 1, 0.0).is_err());
    }

    #[test]
    fn nqc_examples() {
        assert_abs_diff_eq!(nqc(&[4.0, 2.0], 2, 2.0).unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!(nqc(&[5.0, 5.0, 5.0], 3, 1.0).unwrap(), 0.0);
        assert_eq!(
            nqc(&[4.0, 2.0], 2, 0.0),
            Err(BaselineError::ZeroCorpusScore)
        );
    }

    #[test]
    fn sigma_max_examples() {
        assert_abs_diff_eq!(sigma_max(&[5.0, 1.0, 3.0]).unwrap(), 2.0, epsilon = 1e-12);
        assert_eq!(sigma_max(&[9.0]).unwrap(), 0.0);
        assert_eq!(sigma_max(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn n_sigma_x_examples() {
        let l: &[f64] = &[10.0, 6.0, 4.0];
        assert_abs_diff_eq!(
            n_sigma_x(l, 0.5, SigmaNormalization::Count, None).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_eq!(
            n_sigma_x(l, 1.0, SigmaNormalization::Count, None).unwrap(),
            0.0
        );
        assert_eq!(
            n_sigma_x(&[3.0, 3.0], 0.5, SigmaNormalization::Count, None).unwrap(),
            0.0
        );
        assert_abs_diff_eq!(
            n_sigma_x(l, 0.5, SigmaNormalization::None, None).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            n_sigma_x(l, 0.5, SigmaNormalization::QueryLength, Some(4)).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert!(n_sigma_x(l, 0.0, SigmaNormalization::Count, None).is_err());
    }

    #[test]
    fn smv_examples() {
        // reference value from a 40-digit mpmath evaluation
        assert_abs_diff_eq!(
            smv(&[4.0, 1.0], 2, 2.0).unwrap(),
            0.6990763122142743,
            epsilon = 1e-12
        );
        assert_eq!(smv(&[2.0, 2.0], 2, 1.0).unwrap(), 0.0);
        assert_eq!(
            smv(&[2.0, 0.0], 2, 1.0),
            Err(BaselineError::NonPositiveScore(0.0))
        );
    }

    #[test]
    fn predict_over_run() {
        let run: Run = std::iter::once(ranked(&[4.0, 2.0])).collect();
        let out = predict_baseline(&run, &BaselineSpec::new(BaselineMethod::Nqc, 2), None).unwrap();
        assert_eq!(out.predictions.len(), 1);
        assert_abs_diff_eq!(out.predictions["q"], 1.0 / 3.0, epsilon = 1e-12);

        let empty = predict_baseline(
            &Run::new(),
            &BaselineSpec::new(BaselineMethod::Nqc, 2),
            None,
        )
        .unwrap();
        assert!(empty.predictions.is_empty());

        let mut bad = BaselineSpec::new(BaselineMethod::NSigmaX, 2);
        bad.x = 1.5;
        assert!(matches!(
            predict_baseline(&run, &bad, None),
            Err(BaselineError::Config(_))
        ));
        bad.x = 0.0;
        assert!(predict_baseline(&run, &bad, None).is_err());
    }

    #[test]
    fn wig_needs_queries() {
        let run: Run = std::iter::once(ranked(&[4.0, 2.0])).collect();
        let mut spec = BaselineSpec::new(BaselineMethod::Wig, 2);
        spec.corpus_score = CorpusScoreMode::Provided(2.0);
        assert!(matches!(
            predict_baseline(&run, &spec, None),
            Err(BaselineError::Config(_))
        ));
        let mut queries = Collection::new();
        queries.insert("q", "two terms");
        let out = predict_baseline(&run, &spec, Some(&queries)).unwrap();
        assert_abs_diff_eq!(out.predictions["q"], 1.0 / 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn method_names() {
        assert_eq!(
            "sigma-max".parse::<BaselineMethod>().unwrap(),
            BaselineMethod::SigmaMax
        );
        assert_eq!(
            "n_sigma_x".parse::<BaselineMethod>().unwrap(),
            BaselineMethod::NSigmaX
        );
        assert!("clarity".parse::<BaselineMethod>().is_err());
    }
}
