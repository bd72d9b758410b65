use serde::Serialize;

use crate::trec_io::{JudgmentRecord, Qrels, QueryValues};

use super::EvalError;

/// Generated judgments (predicted) against human labels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix2x2 {
    /// Predicted relevant, human relevant.
    pub tp: u64,
    /// Predicted relevant, human irrelevant.
    pub fp: u64,
    /// Predicted irrelevant, human relevant.
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// Predicted irrelevant, human irrelevant.
    pub tn: u64,
}

impl ConfusionMatrix2x2 {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn add(&mut self, predicted: bool, human: bool) {
        match (predicted, human) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionOutcome {
    pub matrix: ConfusionMatrix2x2,
    /// Judged pairs with no human grade, left out of the matrix.
    pub excluded: usize,
}

/// Counts agreement over judged pairs that also have a human grade; the
/// human side is relevant iff grade >= `min_grade`.
pub fn build_confusion<'a>(
    judgments: impl IntoIterator<Item = &'a JudgmentRecord>,
    qrels: &Qrels,
    min_grade: u32,
) -> Result<ConfusionOutcome, EvalError> {
    let mut matrix = ConfusionMatrix2x2::default();
    let mut excluded = 0;
    for rec in judgments {
        match qrels.grade(&rec.query_id, &rec.doc_id) {
            Some(g) => matrix.add(rec.label.is_relevant(), g >= min_grade),
            None => excluded += 1,
        }
    }
    if matrix.total() == 0 {
        return Err(EvalError::EmptyIntersection);
    }
    Ok(ConfusionOutcome { matrix, excluded })
}

/// Cohen's κ = (p_o − p_e) / (1 − p_e).
pub fn cohen_kappa(m: &ConfusionMatrix2x2) -> Result<f64, EvalError> {
    let total = m.total();
    if total == 0 {
        return Err(EvalError::EmptyIntersection);
    }
    let n = total as f64;
    let observed = (m.tp + m.tn) as f64 / n;
    let pred_pos = (m.tp + m.fp) as f64 / n;
    let human_pos = (m.tp + m.fn_) as f64 / n;
    let expected = pred_pos * human_pos + (1.0 - pred_pos) * (1.0 - human_pos);
    if (1.0 - expected).abs() < f64::EPSILON {
        return Err(EvalError::DegenerateAgreement);
    }
    Ok((observed - expected) / (1.0 - expected))
}

/// Predicted minus actual for every query present in both tables.
pub fn error_distances(predicted: &QueryValues, actual: &QueryValues) -> QueryValues {
    predicted
        .iter()
        .filter_map(|(q, p)| actual.get(q).map(|a| (q.clone(), p - a)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trec_io::{parse_qrels, JudgeIdentity, Label, Source};
    use approx::assert_abs_diff_eq;

    fn rec(d: &str, label: Label) -> JudgmentRecord {
        JudgmentRecord::new("q", d, label, &JudgeIdentity::new(Source::Llm, "m"))
    }

    #[test]
    fn confusion_cells() {
        let qrels = parse_qrels("q 0 a 3\nq 0 b 0".as_bytes()).unwrap();
        let tp = build_confusion([&rec("a", Label::Relevant)], &qrels, 2).unwrap();
        assert_eq!(tp.matrix, ConfusionMatrix2x2::new(1, 0, 0, 0));
        let fp = build_confusion([&rec("b", Label::Relevant)], &qrels, 2).unwrap();
        assert_eq!(fp.matrix, ConfusionMatrix2x2::new(0, 1, 0, 0));
        assert!(matches!(
            build_confusion([&rec("zz", Label::Relevant)], &qrels, 2),
            Err(EvalError::EmptyIntersection)
        ));
        let mixed = build_confusion(
            [&rec("a", Label::Irrelevant), &rec("zz", Label::Relevant)],
            &qrels,
            2,
        )
        .unwrap();
        assert_eq!((mixed.matrix.fn_, mixed.excluded), (1, 1));
    }

    #[test]
    fn kappa_perfect_and_independent() {
        assert_eq!(
            cohen_kappa(&ConfusionMatrix2x2::new(5, 0, 0, 7)).unwrap(),
            1.0
        );
        // outer product of marginals (pred 40/60, human 30/70)
        let m = ConfusionMatrix2x2::new(12, 28, 18, 42);
        assert_abs_diff_eq!(cohen_kappa(&m).unwrap(), 0.0, epsilon = 1e-12);
        assert!(matches!(
            cohen_kappa(&ConfusionMatrix2x2::new(0, 0, 0, 9)),
            Err(EvalError::DegenerateAgreement)
        ));
        assert!(cohen_kappa(&ConfusionMatrix2x2::default()).is_err());
    }

    #[test]
    fn kappa_at_most_one() {
        for tp in 0..6 {
            for fp in 0..6 {
                for fn_ in 0..6 {
                    for tn in 0..6 {
                        if let Ok(k) = cohen_kappa(&ConfusionMatrix2x2::new(tp, fp, fn_, tn)) {
                            assert!(k <= 1.0 + 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn distances() {
        let p: QueryValues = [("a".into(), 1.0), ("b".into(), 0.5)].into();
        let a: QueryValues = [("a".into(), 0.5)].into();
        assert_eq!(error_distances(&p, &a), [("a".to_string(), 0.5)].into());
    }
}
