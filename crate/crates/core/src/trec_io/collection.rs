use std::collections::HashMap;
use std::io::BufRead;
use std::str::FromStr;

use serde::Deserialize;

use super::{numbered_lines, Result, TrecError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectionFormat {
    /// `id<TAB>text` per line.
    Tsv,
    /// One JSON object per line with `id` and `contents`.
    Jsonl,
}

impl CollectionFormat {
    /// Guesses the format from a file name, defaulting to TSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "json") => CollectionFormat::Jsonl,
            _ => CollectionFormat::Tsv,
        }
    }
}

impl FromStr for CollectionFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(CollectionFormat::Tsv),
            "jsonl" => Ok(CollectionFormat::Jsonl),
            other => Err(format!(
                "unknown collection format `{other}` (expected tsv or jsonl)"
            )),
        }
    }
}

/// Random-access id → text store. Used for both query sets and corpora.
#[derive(Debug, Clone, Default)]
pub struct Collection {
    texts: HashMap<String, String>,
}

impl Collection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(&self, id: &str) -> Option<&str> {
        self.texts.get(id).map(String::as_str)
    }

    pub fn query(&self, id: &str) -> Option<Query> {
        self.text(id).map(|t| Query {
            id: id.to_string(),
            text: t.to_string(),
        })
    }

    pub fn document(&self, id: &str) -> Option<Document> {
        self.text(id).map(|t| Document {
            id: id.to_string(),
            text: t.to_string(),
        })
    }

    /// Returns false if the id is already present.
    pub fn insert(&mut self, id: impl Into<String>, text: impl Into<String>) -> bool {
        use std::collections::hash_map::Entry;
        match self.texts.entry(id.into()) {
            Entry::Occupied(_) => false,
            Entry::Vacant(v) => {
                v.insert(text.into());
                true
            }
        }
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }
}

#[derive(Deserialize)]
struct JsonRecord {
    id: Option<serde_json::Value>,
    contents: Option<String>,
}

pub fn parse_collection<R: BufRead>(reader: R, format: CollectionFormat) -> Result<Collection> {
    let mut collection = Collection::new();
    for item in numbered_lines(reader) {
        let (line_no, line) = item?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = match format {
            CollectionFormat::Tsv => {
                let (id, text) = line.split_once('\t').ok_or(TrecError::MissingField {
                    field: "text",
                    line: line_no,
                })?;
                (id.to_string(), text.to_string())
            }
            CollectionFormat::Jsonl => {
                let rec: JsonRecord =
                    serde_json::from_str(&line).map_err(|e| TrecError::Malformed {
                        line: line_no,
                        message: e.to_string(),
                    })?;
                let id = match rec.id {
                    Some(serde_json::Value::String(s)) => s,
                    // MS MARCO style files sometimes carry numeric ids.
                    Some(serde_json::Value::Number(n)) => n.to_string(),
                    Some(_) => {
                        return Err(TrecError::Malformed {
                            line: line_no,
                            message: "`id` must be a string or number".into(),
                        })
                    }
                    None => {
                        return Err(TrecError::MissingField {
                            field: "id",
                            line: line_no,
                        })
                    }
                };
                let text = rec.contents.ok_or(TrecError::MissingField {
                    field: "contents",
                    line: line_no,
                })?;
                (id, text)
            }
        };
        if id.is_empty() {
            return Err(TrecError::MissingField {
                field: "id",
                line: line_no,
            });
        }
        if !collection.insert(id.clone(), text) {
            return Err(TrecError::DuplicateId { id, line: line_no });
        }
    }
    Ok(collection)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_record() {
        let c = parse_collection("d1\thello world".as_bytes(), CollectionFormat::Tsv).unwrap();
        assert_eq!(c.text("d1"), Some("hello world"));
    }

    #[test]
    fn tsv_keeps_later_tabs_in_text() {
        let c = parse_collection("d1\ta\tb".as_bytes(), CollectionFormat::Tsv).unwrap();
        assert_eq!(c.text("d1"), Some("a\tb"));
    }

    #[test]
    fn jsonl_record() {
        let c = parse_collection(
            r#"{"id":"d1","contents":"hello"}"#.as_bytes(),
            CollectionFormat::Jsonl,
        )
        .unwrap();
        assert_eq!(c.document("d1").unwrap().text, "hello");
    }

    #[test]
    fn jsonl_missing_contents() {
        let err =
            parse_collection(r#"{"id":"d1"}"#.as_bytes(), CollectionFormat::Jsonl).unwrap_err();
        assert!(matches!(
            err,
            TrecError::MissingField {
                field: "contents",
                line: 1
            }
        ));
    }

    #[test]
    fn duplicate_id() {
        let err = parse_collection("d1\ta\nd1\tb".as_bytes(), CollectionFormat::Tsv).unwrap_err();
        assert!(matches!(err, TrecError::DuplicateId { line: 2, .. }));
    }

    #[test]
    fn invalid_utf8() {
        let bytes: &[u8] = b"d1\tok\nd2\t\xff\xfe\n";
        let err = parse_collection(bytes, CollectionFormat::Tsv).unwrap_err();
        assert!(matches!(err, TrecError::Encoding { line: 2, .. }));
    }

    #[test]
    fn tsv_missing_tab() {
        assert!(parse_collection("d1 hello".as_bytes(), CollectionFormat::Tsv).is_err());
    }
}
