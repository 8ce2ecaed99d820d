use improbe::likelihood::GridConfig;
use improbe::validity::{audit_error_rates, audit_uniform_validity_with, threshold};
use improbe::*;
use statrs::distribution::{Binomial, Discrete};

fn normal() -> NormalMeanModel64 {
    NormalMeanModel::new(1.0).unwrap()
}

#[test]
fn binomial_rate_matches_enumeration() {
    let m = BinomialModel::<f64>::new(20).unwrap();
    let n = 10_000;
    let r = audit_strong_validity(&m, &[0.3], n, &[0.05], Seed(21)).unwrap();
    let d = Binomial::new(0.3, 20).unwrap();
    let truth: f64 = (0..=20)
        .filter(|&y| contour_exact(&m, &BinomialData { successes: y }, &0.3).unwrap() <= 0.05)
        .map(|y| d.pmf(y))
        .sum();
    let rate = r.cells[0].rate;
    assert!(truth <= 0.05);
    assert!((rate - truth).abs() <= 4.0 * (truth * (1.0 - truth) / n as f64).sqrt(), "{rate} vs {truth}");
    assert!(r.all_pass());
}

#[test]
fn normal_rate_is_nominal() {
    let n = 20_000;
    let alphas = [0.05, 0.25, 0.5];
    let r = audit_strong_validity(&normal(), &[150.0], n, &alphas, Seed(4)).unwrap();
    for c in &r.cells {
        assert!((c.rate - c.alpha).abs() <= 4.0 * c.se, "{c:?}");
    }
}

#[test]
fn reports_are_reproducible() {
    let a = audit_strong_validity(&normal(), &[0.0, 1.0], 1000, &[0.1], Seed(7)).unwrap();
    let b = audit_strong_validity(&normal(), &[0.0, 1.0], 1000, &[0.1], Seed(7)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn fixed_family_policy() {
    let policy = ProbingPolicy::one_sided_family(150.0, 0.1, 20);
    let grid = GridConfig { points: 401, ..GridConfig::default() };
    let r = audit_uniform_validity_with(&normal(), &[150.0], 2000, &[0.05, 0.1], &policy, Seed(2), &grid).unwrap();
    assert!(r.all_pass(), "{}", r.summary());
    for c in &r.cells {
        assert_eq!(c.extra("violations"), Some(0.0));
        assert!(c.extra("false_support_rate").unwrap() <= threshold(c.alpha, 2000));
    }
}

#[test]
fn random_interval_policy_never_exceeds_strong_indicator() {
    let policy = ProbingPolicy::RandomIntervals { count: 10, range: Interval::closed(0.0, 1.0) };
    let m = BinomialModel::<f64>::new(20).unwrap();
    let grid = GridConfig { points: 401, ..GridConfig::default() };
    let r = audit_uniform_validity_with(&m, &[0.3, 0.6], 1000, &[0.05, 0.25], &policy, Seed(3), &grid).unwrap();
    assert!(r.cells.iter().all(|c| c.extra("violations") == Some(0.0)), "{}", r.summary());
}

#[test]
fn policy_outside_space_rejected() {
    let policy = ProbingPolicy::FixedFamily(vec![IntervalSet::from_intervals([Interval::closed(-1.0, 2.0)])]);
    let m = BinomialModel::<f64>::new(20).unwrap();
    let err = audit_uniform_validity(&m, &[0.3], 1000, &[0.05], &policy, Seed(0)).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
}

#[test]
fn uniform_audit_needs_exact_evaluator() {
    let m = BivariateCorrelationModel::new(15).unwrap();
    let err = audit_uniform_validity(&m, &[0.3], 1000, &[0.05], &ProbingPolicy::FullSpace, Seed(0)).unwrap_err();
    assert!(matches!(err, Error::Capability(_)));
}

#[test]
fn error_rates_controlled() {
    let grid = GridConfig { points: 401, ..GridConfig::default() };
    let alphas = [0.05, 0.1];
    let r = audit_error_rates(&normal(), &[150.0], 2000, &alphas, Seed(5), &grid).unwrap();
    assert!(r.all_pass(), "{}", r.summary());
    let b = BinomialModel::<f64>::new(20).unwrap();
    let r = audit_error_rates(&b, &[0.3, 0.5], 2000, &alphas, Seed(5), &grid).unwrap();
    assert!(r.all_pass(), "{}", r.summary());
}
