use improbe::possibility::contour::linspace;
use improbe::severity::{write_probe_csv, ProbePoint};
use improbe::test_based::construction_agreement_check;
use improbe::*;

fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn normal() -> NormalMeanModel64 {
    NormalMeanModel::new(1.0).unwrap()
}

#[test]
fn test_im_identities() {
    let m = normal();
    let im = test_im(&OneSidedPValueFunction::normal(m, 152.0, Direction::Left)).unwrap();
    assert!((im.necessity_greater(151.0).unwrap() - phi(1.0)).abs() < 1e-12);
    for t in linspace(140.0, 165.0, 251) {
        assert_eq!(im.necessity_at_most(t).unwrap(), 0.0);
        assert_eq!(im.possibility_greater(t).unwrap(), 1.0);
        assert!((im.possibility_at_most(t).unwrap() - pval_left(&m, 152.0, t)).abs() < 1e-15);
        assert!((pval_left(&m, 152.0, t) + pval_right(&m, 152.0, t) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn severity_examples() {
    let m = normal();
    assert!((severity_case1(&m, 152.0, 151.0) - phi(1.0)).abs() < 1e-12);
    assert_eq!(severity_case1(&m, 152.0, 152.0), 0.5);
    assert!((severity_case2(&m, 151.0, 152.0) - phi(1.0)).abs() < 1e-12);
    assert_eq!(severity_case2(&m, 151.0, 151.0), 0.5);
    let im = test_im(&OneSidedPValueFunction::normal(m, 151.0, Direction::Left)).unwrap();
    for t in linspace(145.0, 157.0, 121) {
        assert!((severity_case2(&m, 151.0, t) - im.possibility_at_most(t).unwrap()).abs() < 1e-15);
    }
}

#[test]
fn case_two_holistic_column() {
    let m = normal();
    let grid = linspace(146.0, 156.0, 101);
    let cmp = compare_probing(&m, 151.0, 150.0, 0.05, &grid).unwrap();
    assert_eq!(cmp.case, Case::NotReject);
    for r in &cmp.rows {
        let want = if r.theta > 151.0 { 1.0 - contour_exact(&m, &NormalData { ybar: 151.0 }, &r.theta).unwrap() } else { 0.0 };
        assert!((r.holistic_necessity - want).abs() < 1e-12, "{r:?}");
        assert_eq!(r.test_im_necessity, 0.0);
    }
    let boundary = compare_probing(&m, 150.0, 150.0, 0.05, &grid).unwrap();
    assert_eq!(boundary.case, Case::NotReject);
    let mut out = Vec::new();
    cmp.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("theta,severity,test_im_necessity,holistic_necessity,case\n146,"));
    assert!(text.lines().nth(1).unwrap().ends_with(",case2"));
}

#[test]
fn holistic_probes() {
    let m = normal();
    let im = build_im(&m, &NormalData { ybar: 152.0 }, &CalibrationConfig::default()).unwrap();
    let grid = linspace(146.0, 158.0, 121);
    let gt = holistic_probe(&im, Probe::Greater, &grid).unwrap();
    for p in &gt {
        assert!(p.necessity <= p.possibility);
        if p.theta > 152.0 {
            assert_eq!(p.necessity, 0.0);
        } else {
            assert!((p.necessity - (1.0 - contour_exact(&m, &NormalData { ybar: 152.0 }, &p.theta).unwrap())).abs() < 1e-12);
        }
    }
    let b = BinomialModel::new(20).unwrap();
    let im = build_im(&b, &BinomialData { successes: 8 }, &CalibrationConfig::default()).unwrap();
    let pts: Vec<ProbePoint<f64>> = holistic_probe(&im, Probe::Greater, &[0.3, 0.4, 0.45, 0.6]).unwrap();
    assert!(pts[0].necessity > 0.5, "{pts:?}");
    assert_eq!(pts[1].necessity, 0.0);
    assert_eq!(pts[2].necessity, 0.0);
    let mut out = Vec::new();
    write_probe_csv(&pts, &mut out).unwrap();
    assert!(String::from_utf8(out).unwrap().starts_with("theta,possibility,necessity\n"));
}

#[test]
fn constructions_agree_on_default_grid() {
    let b = BinomialModel::<f64>::new(20).unwrap();
    let r = construction_agreement_check(&b, &BinomialData { successes: 8 }).unwrap();
    assert_eq!(r.points, 2001);
    assert!(r.max_abs_difference <= 1e-12, "{r:?}");
}
