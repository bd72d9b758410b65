use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use super::{numbered_lines, Result, TrecError};

/// Human graded relevance, (query, document) → non-negative grade.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qrels {
    grades: HashMap<String, HashMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn grade(&self, query_id: &str, doc_id: &str) -> Option<u32> {
        self.grades.get(query_id)?.get(doc_id).copied()
    }

    /// Returns false (and leaves the map untouched) if the pair already has a grade.
    pub fn insert(&mut self, query_id: &str, doc_id: &str, grade: u32) -> bool {
        let per_query = self.grades.entry(query_id.to_string()).or_default();
        if per_query.contains_key(doc_id) {
            return false;
        }
        per_query.insert(doc_id.to_string(), grade);
        true
    }

    pub fn contains_query(&self, query_id: &str) -> bool {
        self.grades.contains_key(query_id)
    }

    /// All graded documents of a query.
    pub fn query(&self, query_id: &str) -> impl Iterator<Item = (&str, u32)> + '_ {
        self.grades
            .get(query_id)
            .into_iter()
            .flat_map(|m| m.iter().map(|(d, g)| (d.as_str(), *g)))
    }

    pub fn len(&self) -> usize {
        self.grades.values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every (query, doc, grade) triple, sorted by query then doc.
    pub fn sorted(&self) -> Vec<(&str, &str, u32)> {
        let mut out: BTreeMap<(&str, &str), u32> = BTreeMap::new();
        for (q, docs) in &self.grades {
            for (d, g) in docs {
                out.insert((q, d), *g);
            }
        }
        out.into_iter().map(|((q, d), g)| (q, d, g)).collect()
    }
}

/// Parses four-column TREC qrels: `qid iteration docid grade`.
pub fn parse_qrels<R: BufRead>(reader: R) -> Result<Qrels> {
    let mut qrels = Qrels::new();
    for item in numbered_lines(reader) {
        let (line_no, line) = item?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(TrecError::Malformed {
                line: line_no,
                message: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let (qid, docid) = (fields[0], fields[2]);
        let grade: i64 = fields[3].parse().map_err(|_| TrecError::Malformed {
            line: line_no,
            message: format!("grade `{}` is not an integer", fields[3]),
        })?;
        if grade < 0 {
            return Err(TrecError::NegativeGrade {
                query_id: qid.to_string(),
                doc_id: docid.to_string(),
                grade,
                line: line_no,
            });
        }
        let grade = u32::try_from(grade).map_err(|_| TrecError::Malformed {
            line: line_no,
            message: format!("grade {grade} out of range"),
        })?;
        if !qrels.insert(qid, docid, grade) {
            return Err(TrecError::DuplicatePair {
                query_id: qid.to_string(),
                doc_id: docid.to_string(),
                line: line_no,
            });
        }
    }
    Ok(qrels)
}

pub fn write_qrels<W: Write>(qrels: &Qrels, mut out: W) -> std::io::Result<()> {
    for (q, d, g) in qrels.sorted() {
        writeln!(out, "{q} 0 {d} {g}")?;
    }
    Ok(())
}
