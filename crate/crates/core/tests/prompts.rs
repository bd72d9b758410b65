use qpp_core::judging::{build_qpp_llm_prompt, build_relevance_prompt, Demonstration};
use qpp_core::trec_io::{Document, Query};

const RELEVANCE_GOLDEN: &str = include_str!("golden/relevance_prompt.txt");
const QPP_LLM_GOLDEN: &str = include_str!("golden/qpp_llm_prompt.txt");

fn query() -> Query {
    Query {
        id: "1".into(),
        text: "what is llm".into(),
    }
}

fn doc(id: &str, text: &str) -> Document {
    Document {
        id: id.into(),
        text: text.into(),
    }
}

#[test]
fn relevance_prompt_matches_golden() {
    let passage = doc(
        "d1",
        "A large language model (LLM) is a language model trained on vast amounts of text.",
    );
    assert_eq!(
        build_relevance_prompt(&query(), &passage).unwrap(),
        RELEVANCE_GOLDEN
    );
}

#[test]
fn qpp_llm_prompt_matches_golden() {
    let demo = Demonstration {
        query: "how tall is mount everest".into(),
        passages: vec![
            "Mount Everest is 8,849 metres high.".into(),
            "Everest lies on the border of Nepal and China.".into(),
        ],
        value: 0.5,
    };
    let passages = [
        doc(
            "d1",
            "A large language model (LLM) is a language model trained on vast amounts of text.",
        ),
        doc("d2", "Llamas are domesticated South American camelids."),
    ];
    assert_eq!(
        build_qpp_llm_prompt(&query(), &passages, &[demo]).unwrap(),
        QPP_LLM_GOLDEN
    );
}

#[test]
fn empty_inputs_rejected() {
    let empty = Query {
        id: "1".into(),
        text: String::new(),
    };
    assert!(build_relevance_prompt(&empty, &doc("d", "x")).is_err());
    assert!(build_relevance_prompt(&query(), &doc("d", "")).is_err());
    assert!(build_qpp_llm_prompt(&query(), &[], &[]).is_err());
}
