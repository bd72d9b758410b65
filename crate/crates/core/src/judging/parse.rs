use thiserror::Error;

use crate::trec_io::Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("could not parse model output {raw:?}")]
pub struct UnparseableOutput {
    pub raw: String,
}

/// Reads a binary label from a model completion.
///
/// The text is lowercased and trimmed, and leading punctuation is dropped.
/// "irrelevant" is checked before "relevant" since the latter is a suffix
/// of the former.
pub fn parse_relevance_output(completion: &str) -> Result<Label, UnparseableOutput> {
    let lowered = completion.trim().to_lowercase();
    let text = lowered.trim_start_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace());
    if text.starts_with("irrelevant") {
        Ok(Label::Irrelevant)
    } else if text.starts_with("relevant") {
        Ok(Label::Relevant)
    } else {
        Err(UnparseableOutput {
            raw: completion.to_string(),
        })
    }
}

/// First real number appearing in the text (`-1`, `0.75`, `.5`, `1e-3`).
pub fn parse_score_output(completion: &str) -> Result<f64, UnparseableOutput> {
    let bytes = completion.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let starts_number = bytes[i].is_ascii_digit()
            || (bytes[i] == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit));
        if starts_number {
            let start = if i > 0 && matches!(bytes[i - 1], b'-' | b'+') {
                i - 1
            } else {
                i
            };
            let mut end = i;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            if end < bytes.len() && bytes[end] == b'.' {
                end += 1;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
            }
            // optional exponent, only if digits follow
            if end < bytes.len() && matches!(bytes[end], b'e' | b'E') {
                let mut j = end + 1;
                if j < bytes.len() && matches!(bytes[j], b'-' | b'+') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    end = j;
                }
            }
            let token = completion[start..end].trim_end_matches('.');
            if let Ok(v) = token.parse::<f64>() {
                if v.is_finite() {
                    return Ok(v);
                }
            }
            i = end.max(i + 1);
        } else {
            i += 1;
        }
    }
    Err(UnparseableOutput {
        raw: completion.to_string(),
    })
}
