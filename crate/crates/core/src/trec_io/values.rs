use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::{numbered_lines, Result, TrecError};

/// One real value per query: predictions, actual metric values, baselines.
pub type QueryValues = BTreeMap<String, f64>;

/// Reads a per-query value table.
///
/// Accepts `qid<TAB>value` lines and the three-column per-query output of
/// trec_eval (`measure qid value`), where the aggregate `all` row is skipped.
pub fn parse_values<R: BufRead>(reader: R) -> Result<QueryValues> {
    let mut out = QueryValues::new();
    for item in numbered_lines(reader) {
        let (line_no, line) = item?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let (qid, value) = match fields.as_slice() {
            [qid, value] => (*qid, *value),
            [_, "all", _] => continue,
            [_, qid, value] => (*qid, *value),
            _ => {
                return Err(TrecError::Malformed {
                    line: line_no,
                    message: format!("expected `qid value`, found {} fields", fields.len()),
                })
            }
        };
        let value: f64 = value.parse().map_err(|_| TrecError::Malformed {
            line: line_no,
            message: format!("value `{value}` is not a number"),
        })?;
        if !value.is_finite() {
            return Err(TrecError::Malformed {
                line: line_no,
                message: "value is not finite".into(),
            });
        }
        if out.insert(qid.to_string(), value).is_some() {
            return Err(TrecError::DuplicateId {
                id: qid.to_string(),
                line: line_no,
            });
        }
    }
    Ok(out)
}

/// `qid<TAB>value`, sorted by qid.
pub fn write_values_tsv<W: Write>(values: &QueryValues, mut out: W) -> std::io::Result<()> {
    for (qid, v) in values {
        writeln!(out, "{qid}\t{v}")?;
    }
    Ok(())
}

/// JSON object keyed by qid (sorted).
pub fn write_values_json<W: Write>(values: &QueryValues, mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, values).map_err(std::io::Error::other)?;
    writeln!(out)
}
