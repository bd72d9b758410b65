use std::io::Write;

use crate::judging::{judge_run, Judge, JudgingContext};
use crate::metrics::{predictions_from_judgments, MetricKind, MetricSpec, PredictError};
use crate::trec_io::{JudgmentStore, QueryValues, Run};

use super::{CorrelationReport, EvalError, PairedSeries};

/// Columns after the key column in report CSVs.
pub const REPORT_CSV_HEADER: &str = "pearson,kendall,spearman,smare,p_value,n";

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub depth: usize,
    /// Judge calls made while reaching this depth.
    pub invocations: usize,
    pub predictions: QueryValues,
    pub report: Result<CorrelationReport, EvalError>,
}

/// Predicts `kind@k` at each judging depth and correlates with `actual`.
/// Depths are visited in ascending order through one store, so each step
/// only judges the items beyond the previous depth.
#[allow(clippy::too_many_arguments)]
pub fn depth_sweep<J: Judge + ?Sized>(
    run: &Run,
    ctx: &JudgingContext<'_>,
    judge: &J,
    store: &mut JudgmentStore,
    kind: MetricKind,
    k: usize,
    depths: &[usize],
    actual: &QueryValues,
) -> Result<Vec<SweepRow>, PredictError> {
    if depths.is_empty() {
        return Err(EvalError::InvalidDepths("no depths given".into()).into());
    }
    if depths.windows(2).any(|w| w[0] > w[1]) {
        return Err(EvalError::InvalidDepths("depths must be ascending".into()).into());
    }
    let mut rows = Vec::with_capacity(depths.len());
    for &depth in depths {
        let spec = MetricSpec::new(kind, k, depth)?;
        let judged = judge_run(run, depth, judge, store, ctx)?;
        for f in &judged.failures {
            log::warn!("depth {depth}: {f}");
        }
        let predictions = predictions_from_judgments(&judged, &spec)?;
        let report = PairedSeries::align(&predictions, actual)
            .and_then(|a| CorrelationReport::compute(&a.series));
        rows.push(SweepRow {
            depth,
            invocations: judged.invocations,
            predictions,
            report,
        });
    }
    Ok(rows)
}

/// Writes `key,pearson,kendall,spearman,smare,p_value,n` rows. Undefined
/// reports leave the statistic cells empty.
pub fn write_report_csv<'a, W: Write>(
    mut out: W,
    key_name: &str,
    rows: impl IntoIterator<Item = (String, &'a Result<CorrelationReport, EvalError>, usize)>,
) -> std::io::Result<()> {
    writeln!(out, "{key_name},{REPORT_CSV_HEADER}")?;
    for (key, report, n) in rows {
        match report {
            Ok(r) => writeln!(
                out,
                "{key},{},{},{},{},{},{}",
                r.pearson,
                r.kendall_tau_b,
                r.spearman,
                r.smare,
                r.pearson_p_value.map(|p| p.to_string()).unwrap_or_default(),
                r.n_queries
            )?,
            Err(_) => writeln!(out, "{key},,,,,,{n}")?,
        }
    }
    Ok(())
}
