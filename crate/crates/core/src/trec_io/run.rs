use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use super::{numbered_lines, Result, TrecError};

/// Longest ranked list kept per query unless the caller asks otherwise.
pub const DEFAULT_MAX_LIST_LEN: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub doc_id: String,
    pub score: f64,
}

impl RankedEntry {
    pub fn new(doc_id: impl Into<String>, score: f64) -> Self {
        Self {
            doc_id: doc_id.into(),
            score,
        }
    }

    /// Rank order: higher score first, equal scores by doc id descending.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| other.doc_id.cmp(&self.doc_id))
    }
}

/// One query's retrieval result, always held in rank order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    query_id: String,
    run_tag: String,
    entries: Vec<RankedEntry>,
}

impl RankedList {
    /// Builds a list from entries in any order. Duplicate doc ids are
    /// rejected; this constructor does not enforce a length limit.
    pub fn new(
        query_id: impl Into<String>,
        run_tag: impl Into<String>,
        mut entries: Vec<RankedEntry>,
    ) -> Result<Self> {
        let query_id = query_id.into();
        entries.sort_by(RankedEntry::rank_cmp);
        let mut seen = std::collections::HashSet::with_capacity(entries.len());
        for e in &entries {
            if !seen.insert(e.doc_id.as_str()) {
                return Err(TrecError::DuplicatePair {
                    query_id,
                    doc_id: e.doc_id.clone(),
                    line: 0,
                });
            }
        }
        Ok(Self {
            query_id,
            run_tag: run_tag.into(),
            entries,
        })
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn run_tag(&self) -> &str {
        &self.run_tag
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.score)
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(|e| e.doc_id.as_str())
    }

    fn truncate(&mut self, len: usize) -> bool {
        let cut = self.entries.len() > len;
        self.entries.truncate(len);
        cut
    }
}

/// A parsed run: every query's ranked list, keyed by query id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run {
    lists: BTreeMap<String, RankedList>,
}

impl Run {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a list, replacing any previous list for the same query.
    pub fn insert(&mut self, list: RankedList) {
        self.lists.insert(list.query_id.clone(), list);
    }

    pub fn get(&self, query_id: &str) -> Option<&RankedList> {
        self.lists.get(query_id)
    }

    /// Lists in query id order.
    pub fn iter(&self) -> impl Iterator<Item = &RankedList> + '_ {
        self.lists.values()
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.lists.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }
}

impl FromIterator<RankedList> for Run {
    fn from_iter<T: IntoIterator<Item = RankedList>>(iter: T) -> Self {
        let mut run = Run::new();
        for list in iter {
            run.insert(list);
        }
        run
    }
}

/// Parses a run, keeping at most [`DEFAULT_MAX_LIST_LEN`] entries per query.
pub fn parse_run<R: BufRead>(reader: R) -> Result<Run> {
    parse_run_with_limit(reader, DEFAULT_MAX_LIST_LEN)
}

/// Parses a six-column TREC run. The rank column must be an integer but is
/// otherwise ignored; entries are re-sorted by score. Lists longer than
/// `max_len` are truncated with a warning.
pub fn parse_run_with_limit<R: BufRead>(reader: R, max_len: usize) -> Result<Run> {
    struct Pending {
        tag: String,
        entries: Vec<RankedEntry>,
        seen: HashMap<String, usize>,
    }

    let mut pending: BTreeMap<String, Pending> = BTreeMap::new();
    for item in numbered_lines(reader) {
        let (line_no, line) = item?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(TrecError::Malformed {
                line: line_no,
                message: format!("expected 6 fields, found {}", fields.len()),
            });
        }
        let (qid, docid, rank, score, tag) =
            (fields[0], fields[2], fields[3], fields[4], fields[5]);
        rank.parse::<i64>().map_err(|_| TrecError::Malformed {
            line: line_no,
            message: format!("rank `{rank}` is not an integer"),
        })?;
        let score: f64 = score.parse().map_err(|_| TrecError::Malformed {
            line: line_no,
            message: format!("score `{score}` is not a number"),
        })?;
        if !score.is_finite() {
            return Err(TrecError::Malformed {
                line: line_no,
                message: format!("score `{}` is not finite", fields[4]),
            });
        }
        let slot = pending.entry(qid.to_string()).or_insert_with(|| Pending {
            tag: tag.to_string(),
            entries: Vec::new(),
            seen: HashMap::new(),
        });
        if slot.seen.insert(docid.to_string(), line_no).is_some() {
            return Err(TrecError::DuplicatePair {
                query_id: qid.to_string(),
                doc_id: docid.to_string(),
                line: line_no,
            });
        }
        slot.entries.push(RankedEntry::new(docid, score));
    }

    let mut run = Run::new();
    for (qid, p) in pending {
        let mut entries = p.entries;
        entries.sort_by(RankedEntry::rank_cmp);
        let mut list = RankedList {
            query_id: qid,
            run_tag: p.tag,
            entries,
        };
        let original = list.len();
        if list.truncate(max_len) {
            log::warn!(
                "query {}: truncated ranked list from {} to {} entries",
                list.query_id,
                original,
                max_len
            );
        }
        run.insert(list);
    }
    Ok(run)
}

/// Writes a run in rank order with 1-based ranks.
pub fn write_run<W: Write>(run: &Run, mut out: W) -> std::io::Result<()> {
    for list in run.iter() {
        for (i, e) in list.entries.iter().enumerate() {
            writeln!(
                out,
                "{} Q0 {} {} {} {}",
                list.query_id,
                e.doc_id,
                i + 1,
                e.score,
                list.run_tag
            )?;
        }
    }
    Ok(())
}

/// Real-valued scores per (query, document), e.g. from a re-ranker. Loaded
/// from a run file whose score column is reused.
#[derive(Debug, Clone, Default)]
pub struct ScoreTable {
    scores: HashMap<String, HashMap<String, f64>>,
}

impl ScoreTable {
    pub fn get(&self, query_id: &str, doc_id: &str) -> Option<f64> {
        self.scores.get(query_id)?.get(doc_id).copied()
    }

    pub fn insert(&mut self, query_id: &str, doc_id: &str, score: f64) {
        self.scores
            .entry(query_id.to_string())
            .or_default()
            .insert(doc_id.to_string(), score);
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        Ok(Self::from(&parse_run_with_limit(reader, usize::MAX)?))
    }
}

impl From<&Run> for ScoreTable {
    fn from(run: &Run) -> Self {
        let mut table = ScoreTable::default();
        for list in run.iter() {
            for e in list.entries() {
                table.insert(list.query_id(), &e.doc_id, e.score);
            }
        }
        table
    }
}
