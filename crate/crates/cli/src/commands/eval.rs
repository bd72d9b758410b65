use std::io::Write;

use qpp_core::eval::{
    build_confusion, cohen_kappa, error_distances, write_report_csv, ConfusionMatrix2x2,
    CorrelationReport, EvalError, PairedSeries,
};
use qpp_core::judging::{JudgingContext, OracleJudge, ThresholdJudge};
use qpp_core::metrics::{predict_run, MetricSpec};
use qpp_core::trec_io::{read_judgments, JudgmentStore, QueryValues};
use serde::Serialize;

use crate::args::{AgreementCmd, EvaluateCmd, ThresholdScanCmd};
use crate::error::CliError;

use super::{
    load_qrels, load_run, load_scores, load_values, open, required, with_output, write_json,
    write_values, OutputFormat,
};

fn correlate(
    predicted: &QueryValues,
    actual: &QueryValues,
) -> Result<CorrelationReport, EvalError> {
    let aligned = PairedSeries::align(predicted, actual)?;
    if aligned.missing_actual > 0 || aligned.missing_predicted > 0 {
        log::warn!(
            "dropped {} predicted queries without actual values and {} actual queries without predictions",
            aligned.missing_actual,
            aligned.missing_predicted
        );
    }
    CorrelationReport::compute(&aligned.series)
}

pub fn evaluate(cmd: &EvaluateCmd, out: &mut dyn Write) -> Result<CorrelationReport, CliError> {
    let predicted = load_values(&required(&cmd.predicted, "predicted")?, "predicted values")?;
    let actual = load_values(&required(&cmd.actual, "actual")?, "actual values")?;
    let report = correlate(&predicted, &actual)?;
    if let Some(path) = &cmd.output {
        write_json(&report, Some(path), out)?;
    }
    write_json(&report, None, out)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub judge: String,
    pub min_grade: u32,
    #[serde(flatten)]
    pub matrix: ConfusionMatrix2x2,
    /// Judged pairs without a human grade.
    pub excluded: usize,
    /// `None` when the marginals make κ undefined.
    pub kappa: Option<f64>,
}

pub fn agreement(cmd: &AgreementCmd, out: &mut dyn Write) -> Result<AgreementReport, CliError> {
    let store_path = required(&cmd.judgments, "judgments")?;
    let store: JudgmentStore = read_judgments(open(&store_path, "judgment store")?)
        .map_err(|e| CliError::Input(format!("judgment store {}: {e}", store_path.display())))?;
    let qrels = load_qrels(&required(&cmd.qrels, "qrels")?)?;
    let min_grade = cmd.min_grade.unwrap_or(2);
    let distances = match (&cmd.predicted, &cmd.actual) {
        (Some(p), Some(a)) => Some((
            load_values(p, "predicted values")?,
            load_values(a, "actual values")?,
        )),
        (None, None) => None,
        _ => {
            return Err(CliError::Config(
                "error distances need both --predicted and --actual".into(),
            ))
        }
    };

    let identities = store.identities();
    let identity = match &cmd.judge_name {
        Some(name) => identities
            .iter()
            .find(|id| id.to_string() == *name)
            .cloned()
            .ok_or_else(|| CliError::Config(format!("the store has no judgments from `{name}`")))?,
        None => match identities.as_slice() {
            [only] => only.clone(),
            [] => return Err(CliError::Input("the judgment store is empty".into())),
            many => {
                let names: Vec<String> = many.iter().map(ToString::to_string).collect();
                return Err(CliError::Config(format!(
                    "the store holds several judges ({}); choose one with --judge-name",
                    names.join(", ")
                )));
            }
        },
    };
    let records = store.iter().filter(|r| r.identity() == identity);
    let confusion = build_confusion(records, &qrels, min_grade)?;
    let kappa = cohen_kappa(&confusion.matrix);
    let report = AgreementReport {
        judge: identity.to_string(),
        min_grade,
        matrix: confusion.matrix,
        excluded: confusion.excluded,
        kappa: kappa.as_ref().ok().copied(),
    };
    write_json(&report, cmd.output.as_deref(), out)?;
    if let Some((predicted, actual)) = distances {
        let d = error_distances(&predicted, &actual);
        write_values(&d, cmd.distances.as_deref(), OutputFormat::Tsv, out)?;
    }
    kappa?;
    Ok(report)
}

fn theta_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(min.is_finite() && max.is_finite()) {
        return Err(CliError::Config("threshold range must be finite".into()));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Config(format!(
            "step must be positive, got {step}"
        )));
    }
    if min > max {
        return Err(CliError::Config(format!(
            "theta-min {min} exceeds theta-max {max}"
        )));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    // rounding keeps labels such as 1.5 instead of 1.5000000000000002
    Ok((0..=n)
        .map(|i| ((min + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

#[derive(Debug, Clone)]
pub struct ThresholdRow {
    pub theta: f64,
    pub predictions: QueryValues,
    pub report: Result<CorrelationReport, EvalError>,
}

pub fn threshold_scan(
    cmd: &ThresholdScanCmd,
    out: &mut dyn Write,
) -> Result<Vec<ThresholdRow>, CliError> {
    let spec: MetricSpec = cmd.metric.as_deref().unwrap_or("ndcg@10").parse()?;
    let thetas = theta_grid(
        required(&cmd.theta_min, "theta-min")?,
        required(&cmd.theta_max, "theta-max")?,
        required(&cmd.step, "step")?,
    )?;
    let run = load_run(&required(&cmd.input.run, "run")?, cmd.input.max_list_len)?;
    let scores = load_scores(cmd.scores.as_deref(), &run)?;
    let ctx = JudgingContext::default();
    let actual = match (&cmd.actual, &cmd.qrels) {
        (Some(path), _) => load_values(path, "actual values")?,
        (None, Some(path)) => {
            let qrels = load_qrels(path)?;
            let judge = OracleJudge::new(&qrels, cmd.min_grade.unwrap_or(2));
            predict_run(&run, &ctx, &judge, &mut JudgmentStore::in_memory(), &spec)?.predictions
        }
        (None, None) => {
            return Err(CliError::Config(
                "threshold-scan needs --actual or --qrels".into(),
            ))
        }
    };

    let mut rows = Vec::with_capacity(thetas.len());
    for theta in thetas {
        let judge = ThresholdJudge::new(&scores, theta);
        let outcome = predict_run(&run, &ctx, &judge, &mut JudgmentStore::in_memory(), &spec)?;
        for f in &outcome.failures {
            log::error!("theta {theta}: {f}");
        }
        let report = correlate(&outcome.predictions, &actual);
        if let Err(e) = &report {
            log::warn!("theta {theta}: {e}");
        }
        rows.push(ThresholdRow {
            theta,
            predictions: outcome.predictions,
            report,
        });
    }
    with_output(cmd.output.as_deref(), out, |w| {
        write_report_csv(
            w,
            "theta",
            rows.iter()
                .map(|r| (r.theta.to_string(), &r.report, r.predictions.len())),
        )
    })?;
    Ok(rows)
}
