use crate::trec_io::{Document, Query};

use super::JudgeError;

const RELEVANCE_INSTRUCTION: &str = "Instruction: Please assess the relevance of the provided passage to the following question. Please output \"Relevant\" or \"Irrelevant\".";

const QPP_LLM_INSTRUCTION: &str = "Instruction: Evaluate the relevance of the ranked list of passages to the given query by providing a numerical score between 0 and 1. A score of \"1\" indicates that the ranked passages are highly relevant to the query, while a score of \"0\" means no relevance between the passages and the query.";

/// Pointwise relevance prompt. Texts are inserted verbatim, newlines included.
pub fn build_relevance_prompt(query: &Query, passage: &Document) -> Result<String, JudgeError> {
    if query.text.is_empty() {
        return Err(JudgeError::EmptyInput("query"));
    }
    if passage.text.is_empty() {
        return Err(JudgeError::EmptyInput("passage"));
    }
    Ok(format!(
        "{RELEVANCE_INSTRUCTION}\nQuestion: {}\nPassage: {}\nOutput: Relevant/Irrelevant",
        query.text, passage.text
    ))
}

/// A worked example for the direct-score prompt: a query, its top passages
/// and the quality value the model should learn to output.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Demonstration {
    pub query: String,
    pub passages: Vec<String>,
    pub value: f64,
}

fn push_block(out: &mut String, query: &str, passages: &[&str]) {
    out.push_str("Query: ");
    out.push_str(query);
    out.push('\n');
    for (i, p) in passages.iter().enumerate() {
        out.push_str(&format!("Passage {}: {}\n", i + 1, p));
    }
    out.push_str("Output:");
}

/// List-level prompt asking for a single score in [0, 1]. Demonstrations
/// follow the instruction, each ending with its known value.
pub fn build_qpp_llm_prompt(
    query: &Query,
    passages: &[Document],
    demonstrations: &[Demonstration],
) -> Result<String, JudgeError> {
    if query.text.is_empty() {
        return Err(JudgeError::EmptyInput("query"));
    }
    if passages.is_empty() {
        return Err(JudgeError::EmptyInput("passage list"));
    }
    let mut out = String::from(QPP_LLM_INSTRUCTION);
    out.push('\n');
    for demo in demonstrations {
        let texts: Vec<&str> = demo.passages.iter().map(String::as_str).collect();
        push_block(&mut out, &demo.query, &texts);
        out.push_str(&format!(" {}\n", demo.value));
    }
    let texts: Vec<&str> = passages.iter().map(|d| d.text.as_str()).collect();
    push_block(&mut out, &query.text, &texts);
    Ok(out)
}
