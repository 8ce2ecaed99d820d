//! Library results against independent reference computations.

use improbe::likelihood::{build_im_with, contour_mc, CalibrationConfig, GridConfig};
use improbe::marginal::marginal_contour_with;
use improbe::models::data::{clinical_trial, law_school};
use improbe::test_based::construction_agreement_check_with;
use improbe::*;
use statrs::distribution::{Binomial, Discrete};

/// Enumeration contour written directly from the pmf.
fn binomial_contour(n: u64, y: u64, theta: f64) -> f64 {
    let d = Binomial::new(theta, n).unwrap();
    let ll = |k: u64, t: f64| d_ln(k, n, t);
    let rel = |k: u64| ll(k, theta) - ll(k, k as f64 / n as f64);
    let obs = rel(y);
    (0..=n).filter(|&k| rel(k) <= obs + 1e-12).map(|k| d.pmf(k)).sum::<f64>().min(1.0)
}

fn d_ln(k: u64, n: u64, t: f64) -> f64 {
    let (k, n) = (k as f64, n as f64);
    let a = if k > 0.0 { k * t.ln() } else { 0.0 };
    let b = if n - k > 0.0 { (n - k) * (1.0 - t).ln() } else { 0.0 };
    a + b
}

#[test]
fn binomial_enumeration_matches_reference() {
    for (n, y) in [(20, 8), (20, 0), (20, 20), (7, 3), (35, 12)] {
        let m = BinomialModel::new(n).unwrap();
        for k in 1..40 {
            let t = k as f64 / 40.0;
            let got = contour_exact(&m, &BinomialData { successes: y }, &t).unwrap();
            let want = binomial_contour(n, y, t);
            assert!((got - want).abs() < 1e-12, "n={n} y={y} t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn published_binomial_values() {
    let m = BinomialModel::new(20).unwrap();
    let d = BinomialData { successes: 8 };
    let r = relative_likelihood(&m, &d, &0.2).unwrap();
    assert!((r - 0.5f64.powi(8) * (0.8f64 / 0.6).powi(12)).abs() < 1e-14);
    assert_eq!(contour_exact(&m, &d, &0.4).unwrap(), 1.0);
    let im = build_im(&m, &d, &CalibrationConfig::default()).unwrap();
    let c = im.confidence_set(0.05).unwrap();
    let c = c.as_intervals().unwrap();
    assert!(c.contains(0.4) && !c.contains(0.2));
}

#[test]
fn normal_monte_carlo_within_three_se() {
    let m = NormalMeanModel::new(1.0).unwrap();
    let cfg = CalibrationConfig::default().with_samples(100_000);
    let d = NormalData { ybar: 152.0 };
    let mc = contour_mc(&m, &d, &150.0, &cfg).unwrap();
    let exact = libm::erfc(2.0 / std::f64::consts::SQRT_2);
    assert!((mc.estimate - exact).abs() <= 3.0 * mc.std_error, "{mc:?} vs {exact}");
    assert_eq!(contour_mc(&m, &d, &152.0, &cfg).unwrap().estimate, 1.0);
}

#[test]
fn monte_carlo_is_deterministic() {
    let m = BinomialModel::new(20).unwrap();
    let d = BinomialData { successes: 8 };
    let cfg = CalibrationConfig::default().with_samples(2000).with_seed(Seed(11));
    let a = contour_mc(&m, &d, &0.3, &cfg).unwrap();
    let b = contour_mc(&m, &d, &0.3, &cfg).unwrap();
    assert_eq!(a, b);
    let other = contour_mc(&m, &d, &0.3, &cfg.with_seed(Seed(12))).unwrap();
    assert_ne!(a.estimate, other.estimate);
}

#[test]
fn construction_agreement() {
    let grid = GridConfig { points: 201, ..GridConfig::default() };
    let cfg = CalibrationConfig::default();
    let normal = NormalMeanModel::new(1.0).unwrap();
    let r = construction_agreement_check_with(&normal, &NormalData { ybar: 152.0 }, &cfg, &grid).unwrap();
    assert!(r.max_abs_difference <= 1e-12, "{r:?}");
    let b = BinomialModel::<f64>::new(20).unwrap();
    let r = construction_agreement_check_with(&b, &BinomialData { successes: 8 }, &cfg, &grid).unwrap();
    assert!(r.max_abs_difference <= 1e-12, "{r:?}");
    let data = law_school::<f64>();
    let cm = BivariateCorrelationModel::new(data.len()).unwrap();
    let small = CalibrationConfig::default().with_samples(500);
    let r = construction_agreement_check_with(&cm, &data, &small, &GridConfig { points: 41, ..grid }).unwrap();
    assert_eq!(r.max_abs_difference, 0.0);
}

#[test]
fn correlation_fixture() {
    let data = law_school::<f64>();
    assert!((data.sample_correlation() - 0.776).abs() < 1e-3);
    let m = BivariateCorrelationModel::new(15).unwrap();
    let mle = m.mle(&data).unwrap();
    // Stationary point of the log-likelihood found by scanning.
    let ll = |r: f64| m.log_likelihood(&data, &r).unwrap();
    let best = (0..=200_000).map(|k| -0.999 + 1.998 * k as f64 / 200_000.0).fold(0.0, |a, r| if ll(r) > ll(a) { r } else { a });
    assert!((mle - best).abs() < 2e-5, "{mle} vs {best}");
    assert!(matches!(m.check_param(&1.0), Err(Error::Divergent(_))));
}

/// Product-binomial enumeration written independently of the library.
fn table_contour(t0: f64, t1: f64) -> f64 {
    let (n, s) = (25u64, [14u64, 8u64]);
    let rel = |k: u64, t: f64| d_ln(k, n, t) - d_ln(k, n, k as f64 / n as f64);
    let pmf = |k: u64, t: f64| Binomial::new(t, n).unwrap().pmf(k);
    let obs = rel(s[0], t0) + rel(s[1], t1);
    let mut inside = 0.0;
    for a in 0..=n {
        for b in 0..=n {
            if rel(a, t0) + rel(b, t1) <= obs + 1e-12 {
                inside += pmf(a, t0) * pmf(b, t1);
            }
        }
    }
    inside.min(1.0)
}

#[test]
fn marginal_against_brute_force() {
    let data = clinical_trial();
    let model = TwoByTwoModel::for_table(&data).unwrap();
    let im = build_im_with(&model, &data, &CalibrationConfig::default(), &GridConfig { points: 2001, lattice_points: 101 })
        .unwrap();
    for phi in [-0.2, 0.0, 0.1, 0.24, 0.45] {
        let got = marginal_contour_with(&im, &Feature::Difference, phi, 2001).unwrap().value;
        // Dense search along the segment {θ0 - θ1 = φ}.
        let lo = 0.0f64.max(-phi);
        let hi = 1.0f64.min(1.0 - phi);
        let brute = (0..=4000)
            .map(|k| lo + (hi - lo) * k as f64 / 4000.0)
            .map(|t| table_contour(t + phi, t))
            .fold(0.0, f64::max);
        assert!(got >= brute - 1e-12 && got - brute < 5e-3, "phi={phi}: {got} vs {brute}");
    }
    let v = marginal_contour_with(&im, &Feature::RelativeRisk, 1.0, 2001).unwrap().value;
    let d = marginal_contour_with(&im, &Feature::Difference, 0.0, 2001).unwrap().value;
    assert!((v - d).abs() < 1e-9, "both are the sup over the diagonal");
}

#[test]
fn custom_feature_uses_band() {
    let data = clinical_trial();
    let model = TwoByTwoModel::for_table(&data).unwrap();
    let im = build_im_with(&model, &data, &CalibrationConfig::default(), &GridConfig { points: 2001, lattice_points: 51 })
        .unwrap();
    let diff = Feature::Custom {
        name: "diff".into(),
        map: std::sync::Arc::new(|t: [f64; 2]| t[0] - t[1]),
        range: Interval::closed(-1.0, 1.0),
        band: 0.01,
    };
    let a = marginal_contour_with(&im, &diff, 0.0, 2001).unwrap().value;
    let b = marginal_contour_with(&im, &Feature::Difference, 0.0, 2001).unwrap().value;
    assert!((a - b).abs() < 0.02, "{a} vs {b}");
}
