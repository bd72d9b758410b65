use proptest::prelude::*;
use qpp_core::baselines::{nqc, sigma_max, smv, wig};

fn scores() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.1f64..100.0, 2..60).prop_map(|mut v| {
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn wig_shift_invariant(s in scores(), c in -50.0f64..50.0, shift in -50.0f64..50.0) {
        let k = s.len().min(10);
        let shifted: Vec<f64> = s.iter().map(|v| v + shift).collect();
        let a = wig(&s, 3, k, c).unwrap();
        let b = wig(&shifted, 3, k, c + shift).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn wig_scale_equivariant(s in scores(), c in -50.0f64..50.0, scale in 0.01f64..100.0) {
        let k = s.len().min(10);
        let scaled: Vec<f64> = s.iter().map(|v| v * scale).collect();
        let a = wig(&s, 3, k, c).unwrap();
        let b = wig(&scaled, 3, k, c * scale).unwrap();
        prop_assert!((a * scale - b).abs() <= 1e-9 * b.abs().max(1.0));
    }

    #[test]
    fn nqc_spread_shift_invariant(s in scores(), c in 1.0f64..50.0, shift in -50.0f64..50.0) {
        let k = s.len().min(10);
        let shifted: Vec<f64> = s.iter().map(|v| v + shift).collect();
        let a = nqc(&s, k, c).unwrap();
        let b = nqc(&shifted, k, c).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn nqc_scale_invariant(s in scores(), c in 1.0f64..50.0, scale in 0.01f64..100.0) {
        let k = s.len().min(10);
        let scaled: Vec<f64> = s.iter().map(|v| v * scale).collect();
        let a = nqc(&s, k, c).unwrap();
        let b = nqc(&scaled, k, c * scale).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn smv_scale_invariant(s in scores(), c in 1.0f64..50.0, scale in 0.01f64..100.0) {
        let k = s.len().min(10);
        let scaled: Vec<f64> = s.iter().map(|v| v * scale).collect();
        let a = smv(&s, k, c).unwrap();
        let b = smv(&scaled, k, c * scale).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn sigma_max_shift_invariant(s in scores(), shift in -50.0f64..50.0) {
        let shifted: Vec<f64> = s.iter().map(|v| v + shift).collect();
        let a = sigma_max(&s).unwrap();
        let b = sigma_max(&shifted).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }
}
