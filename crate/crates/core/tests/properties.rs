use proptest::prelude::*;

use sckg_core::analytics::{ccdf, fit_slope, CcdfPoint};
use sckg_core::credibility::extract_domain;
use sckg_core::resolve::{jaro, jaro_winkler};

proptest! {
    #[test]
    fn ccdf_is_nonincreasing_and_normalized(degrees in prop::collection::vec(0usize..500, 1..300)) {
        let pts = ccdf(&degrees).unwrap();
        prop_assert_eq!(pts[0].p, 1.0);
        for w in pts.windows(2) {
            prop_assert!(w[0].k < w[1].k);
            prop_assert!(w[0].p > w[1].p);
        }
        for pt in &pts {
            let at_least = degrees.iter().filter(|&&d| d >= pt.k).count();
            prop_assert!((pt.p - at_least as f64 / degrees.len() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_power_law_recovers_exponent(beta in -4.0f64..-0.5, c in 0.01f64..1.0) {
        let pts: Vec<CcdfPoint> = (10..=200).map(|k| CcdfPoint { k, p: c * (k as f64).powf(beta) }).collect();
        let fit = fit_slope(&pts, 10, 200).unwrap();
        prop_assert!((fit.beta - beta).abs() < 1e-9);
        prop_assert!((fit.intercept - c.log10()).abs() < 1e-9);
    }

    #[test]
    fn jaro_winkler_bounds_and_symmetry(a in "\\PC{0,12}", b in "\\PC{0,12}") {
        let ab = jaro_winkler(&a, &b);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((jaro(&a, &b) - jaro(&b, &a)).abs() < 1e-12);
        prop_assert!(ab >= jaro(&a, &b) - 1e-12);
        prop_assert_eq!(jaro_winkler(&a, &a), 1.0);
    }

    #[test]
    fn domain_ignores_scheme_path_and_case(label in "[a-z][a-z0-9]{0,10}", sub in "[a-z]{1,5}", path in "[a-z0-9/]{0,20}") {
        let plain = extract_domain(&format!("https://{sub}.{label}.com.cn/{path}")).unwrap();
        prop_assert_eq!(&plain, &format!("{label}.com.cn"));
        let upper = extract_domain(&format!("HTTP://{}.{}.COM.CN/", sub.to_uppercase(), label.to_uppercase())).unwrap();
        prop_assert_eq!(upper, plain);
    }
}
