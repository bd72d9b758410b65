use std::cmp::Ordering;
use std::collections::HashSet;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::trec_io::QueryValues;

use super::EvalError;

/// Per-query predicted and actual values, aligned by query id.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries {
    ids: Vec<String>,
    predicted: Vec<f64>,
    actual: Vec<f64>,
}

/// Result of intersecting two per-query tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub series: PairedSeries,
    pub missing_actual: usize,
    pub missing_predicted: usize,
}

impl PairedSeries {
    pub fn new(rows: Vec<(String, f64, f64)>) -> Result<Self, EvalError> {
        if rows.len() < 2 {
            return Err(EvalError::TooFewQueries(rows.len()));
        }
        let mut seen = HashSet::with_capacity(rows.len());
        let mut s = PairedSeries {
            ids: Vec::with_capacity(rows.len()),
            predicted: Vec::with_capacity(rows.len()),
            actual: Vec::with_capacity(rows.len()),
        };
        for (id, p, a) in rows {
            if !p.is_finite() || !a.is_finite() {
                return Err(EvalError::NonFinite(id));
            }
            if !seen.insert(id.clone()) {
                return Err(EvalError::DuplicateQuery(id));
            }
            s.ids.push(id);
            s.predicted.push(p);
            s.actual.push(a);
        }
        Ok(s)
    }

    /// Pairs the queries present in both tables, in query id order.
    pub fn align(predicted: &QueryValues, actual: &QueryValues) -> Result<Alignment, EvalError> {
        let rows: Vec<(String, f64, f64)> = predicted
            .iter()
            .filter_map(|(q, p)| actual.get(q).map(|a| (q.clone(), *p, *a)))
            .collect();
        let common = rows.len();
        let series = PairedSeries::new(rows)?;
        Ok(Alignment {
            series,
            missing_actual: predicted.len() - common,
            missing_predicted: actual.len() - common,
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn predicted(&self) -> &[f64] {
        &self.predicted
    }

    pub fn actual(&self) -> &[f64] {
        &self.actual
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(EvalError::TooFewQueries(x.len()));
    }
    Ok(())
}

fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.partial_cmp(b).expect("finite values")
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(EvalError::UndefinedCorrelation("first series is constant"));
    }
    if syy == 0.0 {
        return Err(EvalError::UndefinedCorrelation("second series is constant"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Number of pairs within runs of equal values in a sorted sequence.
fn tied_pairs<T>(sorted: &[T], eq: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if eq(&w[0], &w[1]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Merge sort counting inversions.
fn sort_counting_swaps(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps =
        sort_counting_swaps(&mut v[..mid], buf) + sort_counting_swaps(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Kendall's τ-b (tie-corrected), O(n log n).
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    check_pair(x, y)?;
    let n = x.len() as u64;
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| cmp_f64(&a.0, &b.0).then_with(|| cmp_f64(&a.1, &b.1)));

    let n0 = n * (n - 1) / 2;
    let ties_x = tied_pairs(&pairs, |a, b| a.0 == b.0);
    let ties_xy = tied_pairs(&pairs, |a, b| a.0 == b.0 && a.1 == b.1);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = Vec::with_capacity(ys.len());
    let swaps = sort_counting_swaps(&mut ys, &mut buf);
    let ties_y = tied_pairs(&ys, |a, b| a == b);

    if n0 == ties_x {
        return Err(EvalError::UndefinedCorrelation("first series is all tied"));
    }
    if n0 == ties_y {
        return Err(EvalError::UndefinedCorrelation("second series is all tied"));
    }
    // concordant - discordant
    let s = n0 as f64 - ties_x as f64 - ties_y as f64 + ties_xy as f64 - 2.0 * swaps as f64;
    let denom = ((n0 - ties_x) as f64).sqrt() * ((n0 - ties_y) as f64).sqrt();
    Ok((s / denom).clamp(-1.0, 1.0))
}

/// 1-based ranks in ascending order; tied values share their mean rank.
pub fn mean_tie_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| cmp_f64(&values[a], &values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let r = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = r;
        }
        i = j;
    }
    ranks
}

/// Pearson correlation of mean-tie ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    check_pair(x, y)?;
    pearson(&mean_tie_ranks(x), &mean_tie_ranks(y))
}

/// Scaled mean absolute ranking error: mean of |rank_pred − rank_actual| / n.
pub fn smare(predicted: &[f64], actual: &[f64]) -> Result<f64, EvalError> {
    check_pair(predicted, actual)?;
    let n = predicted.len() as f64;
    let rp = mean_tie_ranks(predicted);
    let ra = mean_tie_ranks(actual);
    Ok(rp
        .iter()
        .zip(&ra)
        .map(|(a, b)| (a - b).abs() / n)
        .sum::<f64>()
        / n)
}

/// Two-tailed p-value of a Pearson correlation under the t-test with
/// n − 2 degrees of freedom.
pub fn pearson_significance(r: f64, n: usize) -> Result<f64, EvalError> {
    if n < 3 {
        return Err(EvalError::TooFewQueries(n));
    }
    if !r.is_finite() || r.abs() > 1.0 {
        return Err(EvalError::NonFinite(format!("r = {r}")));
    }
    if r.abs() == 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    Ok((2.0 * dist.sf(t.abs())).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub pearson: f64,
    pub kendall_tau_b: f64,
    pub spearman: f64,
    pub smare: f64,
    /// Absent with fewer than three queries.
    pub pearson_p_value: Option<f64>,
    pub n_queries: usize,
}

impl CorrelationReport {
    pub fn compute(series: &PairedSeries) -> Result<Self, EvalError> {
        let (p, a) = (series.predicted(), series.actual());
        let pearson = pearson(p, a)?;
        Ok(Self {
            pearson,
            kendall_tau_b: kendall_tau_b(p, a)?,
            spearman: spearman(p, a)?,
            smare: smare(p, a)?,
            pearson_p_value: pearson_significance(pearson, series.len()).ok(),
            n_queries: series.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn pearson_examples() {
        assert_abs_diff_eq!(
            pearson(&[1., 2., 3.], &[2., 4., 6.]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pearson(&[1., 2., 3.], &[-1., -2., -3.]).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pearson(&[1., 2., 3.], &[1., 3., 2.]).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert!(matches!(
            pearson(&[1., 1., 1.], &[1., 2., 3.]),
            Err(EvalError::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn kendall_examples() {
        assert_eq!(kendall_tau_b(&[1., 2., 3.], &[1., 2., 3.]).unwrap(), 1.0);
        assert_eq!(kendall_tau_b(&[1., 2., 3.], &[3., 2., 1.]).unwrap(), -1.0);
        assert_abs_diff_eq!(
            kendall_tau_b(&[1., 2., 3., 4.], &[1., 3., 2., 4.]).unwrap(),
            4.0 / 6.0,
            epsilon = 1e-12
        );
        assert!(kendall_tau_b(&[2., 2.], &[1., 2.]).is_err());
        assert!(kendall_tau_b(&[1., 2.], &[5., 5.]).is_err());
    }

    #[test]
    fn kendall_treats_signed_zero_as_tie() {
        let a = kendall_tau_b(&[0.0, -0.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        let b = kendall_tau_b(&[0.0, 0.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spearman_examples() {
        assert_abs_diff_eq!(
            spearman(&[1., 2., 3.], &[10., 20., 30.]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            spearman(&[1., 2., 3.], &[3., 2., 1.]).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            spearman(&[1., 2., 3., 4.], &[1., 3., 2., 4.]).unwrap(),
            0.8,
            epsilon = 1e-12
        );
    }

    #[test]
    fn smare_examples() {
        assert_eq!(smare(&[1., 2., 3.], &[1., 2., 3.]).unwrap(), 0.0);
        // predicted ranks [2,1,3] against actual [1,2,3]
        assert_abs_diff_eq!(
            smare(&[2., 1., 3.], &[1., 2., 3.]).unwrap(),
            2.0 / 9.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(smare(&[1., 2.], &[2., 1.]).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn mean_ties() {
        assert_eq!(mean_tie_ranks(&[3., 1., 3., 2.]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn significance() {
        assert_abs_diff_eq!(pearson_significance(0.0, 10).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(pearson_significance(1.0, 10).unwrap(), 0.0);
        assert!(pearson_significance(0.999_999, 10).unwrap() < 1e-10);
        // scipy.stats.t.sf reference
        assert_abs_diff_eq!(
            pearson_significance(0.5, 30).unwrap(),
            0.004899933667068092,
            epsilon = 1e-9
        );
        assert!(pearson_significance(0.5, 2).is_err());
    }

    #[test]
    fn series_alignment_drops_unmatched() {
        let p: QueryValues = [("a".into(), 1.0), ("b".into(), 2.0), ("c".into(), 3.0)].into();
        let a: QueryValues = [("b".into(), 1.0), ("c".into(), 2.0), ("d".into(), 0.0)].into();
        let al = PairedSeries::align(&p, &a).unwrap();
        assert_eq!(al.series.ids(), ["b", "c"]);
        assert_eq!((al.missing_actual, al.missing_predicted), (1, 1));
        let disjoint: QueryValues = [("z".into(), 1.0)].into();
        assert!(matches!(
            PairedSeries::align(&p, &disjoint),
            Err(EvalError::TooFewQueries(0))
        ));
    }

    #[test]
    fn series_rejects_duplicates() {
        let rows = vec![("a".into(), 1.0, 1.0), ("a".into(), 2.0, 2.0)];
        assert!(matches!(
            PairedSeries::new(rows),
            Err(EvalError::DuplicateQuery(_))
        ));
    }

    fn series() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..20).prop_flat_map(|n| {
            (
                prop::collection::vec((0i32..8).prop_map(f64::from), n),
                prop::collection::vec((0i32..8).prop_map(f64::from), n),
            )
        })
    }

    proptest! {
        #[test]
        fn symmetric((x, y) in series()) {
            if let (Ok(a), Ok(b)) = (pearson(&x, &y), pearson(&y, &x)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            if let (Ok(a), Ok(b)) = (kendall_tau_b(&x, &y), kendall_tau_b(&y, &x)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            if let (Ok(a), Ok(b)) = (spearman(&x, &y), spearman(&y, &x)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn monotone_transform_invariance((x, y) in series()) {
            let fx: Vec<f64> = x.iter().map(|v| (v * 0.7).exp() + 3.0).collect();
            if let Ok(a) = kendall_tau_b(&x, &y) {
                prop_assert!((a - kendall_tau_b(&fx, &y).unwrap()).abs() < 1e-12);
            }
            if let Ok(a) = spearman(&x, &y) {
                prop_assert!((a - spearman(&fx, &y).unwrap()).abs() < 1e-12);
            }
            let affine: Vec<f64> = x.iter().map(|v| 2.5 * v - 4.0).collect();
            if let Ok(a) = pearson(&x, &y) {
                prop_assert!((a - pearson(&affine, &y).unwrap()).abs() < 1e-9);
            }
        }

        #[test]
        fn smare_of_self_is_zero((x, _) in series()) {
            prop_assert_eq!(smare(&x, &x).unwrap(), 0.0);
        }
    }
}
