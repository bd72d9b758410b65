//! Kendall tau-b against quadratic pair counting.

use proptest::prelude::*;
use qpp_core::eval::{kendall_tau_b, pearson, spearman};

fn pair_count_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let (mut concordant, mut discordant, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tie_x += 1;
            } else if dy == 0.0 {
                tie_y += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let n1 = (concordant + discordant + tie_x) as f64;
    let n2 = (concordant + discordant + tie_y) as f64;
    (concordant - discordant) as f64 / (n1 * n2).sqrt()
}

fn tied_series() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..=50).prop_flat_map(|n| {
        (
            proptest::collection::vec((0u8..6).prop_map(f64::from), n),
            proptest::collection::vec((0u8..6).prop_map(f64::from), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_pair_counting((x, y) in tied_series()) {
        let expected = pair_count_tau_b(&x, &y);
        match kendall_tau_b(&x, &y) {
            Ok(t) => prop_assert!((t - expected).abs() <= 1e-12, "{t} vs {expected}"),
            Err(_) => prop_assert!(!expected.is_finite()),
        }
    }
}

proptest! {
    #[test]
    fn rank_correlations_unchanged_by_monotone_transform(
        x in proptest::collection::vec(-100.0f64..100.0, 3..30),
        y in proptest::collection::vec(-100.0f64..100.0, 30),
    ) {
        let y = &y[..x.len()];
        let fx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        if let (Ok(a), Ok(b)) = (kendall_tau_b(&x, y), kendall_tau_b(&fx, y)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        if let (Ok(a), Ok(b)) = (spearman(&x, y), spearman(&fx, y)) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn pearson_unchanged_by_affine_transform(
        x in proptest::collection::vec(-100.0f64..100.0, 3..30),
        y in proptest::collection::vec(-100.0f64..100.0, 30),
        a in 0.1f64..10.0,
        b in -50.0f64..50.0,
    ) {
        let y = &y[..x.len()];
        let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        if let (Ok(r1), Ok(r2)) = (pearson(&x, y), pearson(&ax, y)) {
            prop_assert!((r1 - r2).abs() <= 1e-9);
        }
    }
}
