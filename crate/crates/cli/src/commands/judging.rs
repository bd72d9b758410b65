use std::io::Write;
use std::path::PathBuf;

use qpp_core::eval::{depth_sweep, write_report_csv, SweepRow};
use qpp_core::judging::{judge_run, JudgeError};
use qpp_core::metrics::{predict_many, MetricSpec};
use qpp_core::trec_io::QueryValues;

use crate::args::{JudgeCmd, PredictCmd, SweepCmd};
use crate::error::CliError;

use super::{
    ensure_dir, load_run, load_values, open_store, required, with_output, write_values, JudgeSetup,
    OutputFormat,
};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JudgeSummary {
    pub queries: usize,
    pub cache_hits: usize,
    pub invocations: usize,
    pub fallbacks: usize,
    pub failures: usize,
}

fn report_failures(failures: &[JudgeError]) -> Result<(), CliError> {
    if failures.is_empty() {
        return Ok(());
    }
    for f in failures {
        log::error!("{f}");
    }
    Err(CliError::Runtime(format!(
        "{} item(s) could not be judged; judged items are kept in the store, rerun to retry the rest",
        failures.len()
    )))
}

pub fn judge(cmd: &JudgeCmd, out: &mut dyn Write) -> Result<JudgeSummary, CliError> {
    let depth = required(&cmd.depth, "depth")?;
    let store_path = required(&cmd.judge.judgments, "judgments")?;
    let run = load_run(&required(&cmd.input.run, "run")?, cmd.input.max_list_len)?;
    let setup = JudgeSetup::load(&cmd.judge, &cmd.texts, &run)?;
    let mut store = open_store(Some(&store_path))?;
    let judge = setup.judge()?;

    let judged = judge_run(&run, depth, &judge, &mut store, &setup.context())?;
    let summary = JudgeSummary {
        queries: run.len(),
        cache_hits: judged.cache_hits,
        invocations: judged.invocations,
        fallbacks: judged.fallbacks,
        failures: judged.failures.len(),
    };
    writeln!(
        out,
        "{} queries to depth {depth} with {}: {} cached, {} judge calls ({} fallback), {} failed",
        summary.queries,
        judge.identity(),
        summary.cache_hits,
        summary.invocations,
        summary.fallbacks,
        summary.failures
    )?;
    report_failures(&judged.failures)?;
    Ok(summary)
}

fn file_name(spec: &MetricSpec, format: OutputFormat) -> String {
    format!(
        "{}-n{}.{}",
        spec.measure_name(),
        spec.depth,
        format.extension()
    )
}

/// Writes one prediction file per metric; all metrics share one judging pass.
pub fn predict(cmd: &PredictCmd, out: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    if cmd.metric.is_empty() {
        return Err(CliError::missing("metric"));
    }
    let specs = cmd
        .metric
        .iter()
        .map(|m| {
            let spec: MetricSpec = m.parse()?;
            match cmd.depth {
                Some(d) => spec.with_depth(d),
                None => Ok(spec),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let format = OutputFormat::resolve(cmd.format.as_deref(), None)?;
    let run = load_run(&required(&cmd.input.run, "run")?, cmd.input.max_list_len)?;
    let setup = JudgeSetup::load(&cmd.judge, &cmd.texts, &run)?;
    let mut store = open_store(cmd.judge.judgments.as_deref())?;
    let dir = ensure_dir(cmd.output_dir.as_deref().unwrap_or_else(|| ".".as_ref()))?;
    let judge = setup.judge()?;

    let outcomes = predict_many(&run, &setup.context(), &judge, &mut store, &specs)?;
    let mut paths = Vec::with_capacity(specs.len());
    for (spec, outcome) in specs.iter().zip(&outcomes) {
        let path = dir.join(file_name(spec, format));
        write_values(&outcome.predictions, Some(&path), format, out)?;
        writeln!(
            out,
            "{spec}: {} predictions -> {}",
            outcome.predictions.len(),
            path.display()
        )?;
        paths.push(path);
    }
    if let Some(first) = outcomes.first() {
        writeln!(
            out,
            "judging: {} cached, {} judge calls, {} fallback, {} failed",
            first.cache_hits,
            first.invocations,
            first.fallbacks,
            first.failures.len()
        )?;
        report_failures(&first.failures)?;
    }
    Ok(paths)
}

pub fn sweep(cmd: &SweepCmd, out: &mut dyn Write) -> Result<Vec<SweepRow>, CliError> {
    let spec: MetricSpec = cmd.metric.as_deref().unwrap_or("ndcg@10").parse()?;
    if cmd.depths.is_empty() {
        return Err(CliError::missing("depths"));
    }
    for &d in &cmd.depths {
        spec.with_depth(d)?;
    }
    let actual: QueryValues = load_values(&required(&cmd.actual, "actual")?, "actual values")?;
    let run = load_run(&required(&cmd.input.run, "run")?, cmd.input.max_list_len)?;
    let setup = JudgeSetup::load(&cmd.judge, &cmd.texts, &run)?;
    let mut store = open_store(cmd.judge.judgments.as_deref())?;
    let judge = setup.judge()?;

    let rows = depth_sweep(
        &run,
        &setup.context(),
        &judge,
        &mut store,
        spec.kind,
        spec.cutoff,
        &cmd.depths,
        &actual,
    )?;
    for row in &rows {
        match &row.report {
            Ok(r) => log::info!(
                "depth {}: {} new judgments, pearson {:.4}",
                row.depth,
                row.invocations,
                r.pearson
            ),
            Err(e) => log::warn!("depth {}: {e}", row.depth),
        }
    }
    with_output(cmd.output.as_deref(), out, |w| {
        write_report_csv(
            w,
            "depth",
            rows.iter()
                .map(|r| (r.depth.to_string(), &r.report, r.predictions.len())),
        )
    })?;
    Ok(rows)
}
