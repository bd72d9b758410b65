//! Append-only JSONL store of binary relevance judgments.
//!
//! Each line is one record with the keys `qid`, `docid`, `label`, `source`
//! and `raw_output`. Two optional keys extend that layout: `judge` names the
//! concrete judge (model name, threshold, grade cut-off) so that different
//! judges of the same source never share cache entries, and `fallback` marks
//! labels that were assigned because the judge output could not be parsed.

use std::collections::HashMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Result, TrecError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub enum Label {
    Irrelevant,
    Relevant,
}

impl Label {
    pub fn is_relevant(self) -> bool {
        self == Label::Relevant
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Label::Irrelevant => 0,
            Label::Relevant => 1,
        }
    }
}

impl From<bool> for Label {
    fn from(relevant: bool) -> Self {
        if relevant {
            Label::Relevant
        } else {
            Label::Irrelevant
        }
    }
}

impl From<Label> for u8 {
    fn from(label: Label) -> u8 {
        label.as_u8()
    }
}

impl TryFrom<i64> for Label {
    type Error = TrecError;

    fn try_from(value: i64) -> Result<Self> {
        match value {
            0 => Ok(Label::Irrelevant),
            1 => Ok(Label::Relevant),
            other => Err(TrecError::InvalidLabel(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Oracle,
    Threshold,
    Llm,
    File,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Oracle => "oracle",
            Source::Threshold => "threshold",
            Source::Llm => "llm",
            Source::File => "file",
        })
    }
}

/// Which judge produced a label: its source plus a name that separates
/// judges of the same source (model name, θ, grade cut-off).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JudgeIdentity {
    pub source: Source,
    pub name: String,
}

impl JudgeIdentity {
    pub fn new(source: Source, name: impl Into<String>) -> Self {
        Self {
            source,
            name: name.into(),
        }
    }
}

impl fmt::Display for JudgeIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.name.is_empty() {
            write!(f, "{}", self.source)
        } else {
            write!(f, "{}:{}", self.source, self.name)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JudgmentKey {
    pub query_id: String,
    pub doc_id: String,
    pub judge: JudgeIdentity,
}

impl fmt::Display for JudgmentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} [{}]", self.query_id, self.doc_id, self.judge)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentRecord {
    #[serde(rename = "qid")]
    pub query_id: String,
    #[serde(rename = "docid")]
    pub doc_id: String,
    pub label: Label,
    pub source: Source,
    pub raw_output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
}

impl JudgmentRecord {
    pub fn new(
        query_id: impl Into<String>,
        doc_id: impl Into<String>,
        label: Label,
        judge: &JudgeIdentity,
    ) -> Self {
        Self {
            query_id: query_id.into(),
            doc_id: doc_id.into(),
            label,
            source: judge.source,
            raw_output: None,
            judge: (!judge.name.is_empty()).then(|| judge.name.clone()),
            fallback: false,
        }
    }

    pub fn identity(&self) -> JudgeIdentity {
        JudgeIdentity::new(self.source, self.judge.clone().unwrap_or_default())
    }

    pub fn key(&self) -> JudgmentKey {
        JudgmentKey {
            query_id: self.query_id.clone(),
            doc_id: self.doc_id.clone(),
            judge: self.identity(),
        }
    }
}

/// Judgment cache with optional file persistence. Reads take `&self`,
/// appends take `&mut self`, so sharing behind a `RwLock` gives concurrent
/// readers and a single writer.
#[derive(Debug, Default)]
pub struct JudgmentStore {
    records: Vec<JudgmentRecord>,
    index: HashMap<JudgmentKey, usize>,
    writer: Option<BufWriter<File>>,
}

impl JudgmentStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) a JSONL store; existing records are loaded
    /// and new ones are appended to the same file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut store = if path.exists() {
            read_judgments(BufReader::new(File::open(path)?))?
        } else {
            Self::in_memory()
        };
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        store.writer = Some(BufWriter::new(file));
        Ok(store)
    }

    pub fn get(&self, key: &JudgmentKey) -> Option<&JudgmentRecord> {
        self.index.get(key).map(|&i| &self.records[i])
    }

    pub fn lookup(
        &self,
        query_id: &str,
        doc_id: &str,
        judge: &JudgeIdentity,
    ) -> Option<&JudgmentRecord> {
        self.get(&JudgmentKey {
            query_id: query_id.to_string(),
            doc_id: doc_id.to_string(),
            judge: judge.clone(),
        })
    }

    /// Appends a record, persisting it when the store is file-backed.
    /// A record whose key is already present is rejected.
    pub fn append(&mut self, record: JudgmentRecord) -> Result<()> {
        let key = record.key();
        if self.index.contains_key(&key) {
            return Err(TrecError::DuplicateJudgment(key));
        }
        if let Some(w) = self.writer.as_mut() {
            let line = serde_json::to_string(&record).map_err(std::io::Error::other)?;
            writeln!(w, "{line}")?;
            w.flush()?;
        }
        self.index.insert(key, self.records.len());
        self.records.push(record);
        Ok(())
    }

    /// Records in append order.
    pub fn iter(&self) -> impl Iterator<Item = &JudgmentRecord> + '_ {
        self.records.iter()
    }

    /// Distinct judges present, in first-appearance order.
    pub fn identities(&self) -> Vec<JudgeIdentity> {
        let mut out: Vec<JudgeIdentity> = Vec::new();
        for r in &self.records {
            let id = r.identity();
            if !out.contains(&id) {
                out.push(id);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            let line = serde_json::to_string(r).map_err(std::io::Error::other)?;
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Loads a JSONL judgment stream into an in-memory store. Errors carry the
/// byte offset of the offending line.
pub fn read_judgments<R: BufRead>(mut reader: R) -> Result<JudgmentStore> {
    let mut store = JudgmentStore::in_memory();
    let mut offset = 0u64;
    let mut buf = String::new();
    loop {
        buf.clear();
        let n = reader
            .read_line(&mut buf)
            .map_err(|e| TrecError::CorruptRecord {
                offset,
                message: e.to_string(),
            })?;
        if n == 0 {
            break;
        }
        let line = buf.trim();
        if !line.is_empty() {
            let record: JudgmentRecord =
                serde_json::from_str(line).map_err(|e| TrecError::CorruptRecord {
                    offset,
                    message: e.to_string(),
                })?;
            store.append(record).map_err(|e| TrecError::CorruptRecord {
                offset,
                message: e.to_string(),
            })?;
        }
        offset += n as u64;
    }
    Ok(store)
}
