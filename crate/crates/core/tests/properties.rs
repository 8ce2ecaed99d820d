use improbe::likelihood::{CalibrationConfig, GridConfig};
use improbe::*;
use proptest::prelude::*;

fn grid() -> GridConfig {
    GridConfig { points: 301, ..GridConfig::default() }
}

fn interval(lo: f64, width: f64, lc: bool, hc: bool) -> Interval64 {
    Interval::new(lo, lc, lo + width, hc)
}

fn check_pair(im: &ImPair64, h: IntervalSet64) -> Result<(), TestCaseError> {
    let hs = HypothesisSet::from(h.clone());
    let p = im.possibility(&hs).unwrap();
    let n = im.necessity(&hs).unwrap();
    let pc = im.possibility(&im.complement(&hs).unwrap()).unwrap();
    prop_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&n));
    prop_assert!(n <= p + 1e-12, "ordering {h}: {n} > {p}");
    prop_assert_eq!(n, 1.0 - pc);
    prop_assert!(p.max(pc) >= 1.0 - 1e-9, "one of H, H^c holds the peak");
    if p < 1.0 - 1e-9 {
        prop_assert!(n <= 1e-9);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_measures(ybar in -50.0f64..50.0, lo in -60.0f64..60.0, w in 0.0f64..20.0, lc: bool, hc: bool,
                       lo2 in -60.0f64..60.0, w2 in 0.0f64..20.0) {
        let m = NormalMeanModel::new(1.5).unwrap();
        let im = build_im_with(&m, &NormalData { ybar }, &CalibrationConfig::default(), &grid()).unwrap();
        let (a, b) = (interval(lo, w, lc, hc), interval(lo2, w2, true, true));
        check_pair(&im, IntervalSet::from_intervals([a]))?;
        check_pair(&im, IntervalSet::from_intervals([a, b]))?;
        let pa = im.possibility(&a.into()).unwrap();
        let pb = im.possibility(&b.into()).unwrap();
        let pu = im.possibility(&IntervalSet::from_intervals([a, b]).into()).unwrap();
        prop_assert!((pu - pa.max(pb)).abs() < 1e-9);
    }

    #[test]
    fn binomial_measures(n in 1u64..60, frac in 0.0f64..=1.0, lo in 0.0f64..1.0, w in 0.0f64..0.5, lc: bool, hc: bool) {
        let y = (frac * n as f64).round() as u64;
        let m = BinomialModel::new(n).unwrap();
        let im = build_im_with(&m, &BinomialData { successes: y }, &CalibrationConfig::default(), &grid()).unwrap();
        let h = IntervalSet::from_intervals([interval(lo, w.min(1.0 - lo), lc, hc)]);
        check_pair(&im, h)?;
    }

    #[test]
    fn confidence_sets_nest(ybar in -5.0f64..5.0, a1 in 0.0f64..1.0, a2 in 0.0f64..1.0) {
        let m = NormalMeanModel::new(1.0).unwrap();
        let im = build_im_with(&m, &NormalData { ybar }, &CalibrationConfig::default(), &grid()).unwrap();
        let big = im.confidence_set(a1.min(a2)).unwrap();
        let small = im.confidence_set(a1.max(a2)).unwrap();
        prop_assert!(small.as_intervals().unwrap().is_subset_of(big.as_intervals().unwrap()));
        if a1.max(a2) < 1.0 {
            prop_assert!(small.as_intervals().unwrap().contains(ybar));
        }
    }
}

#[test]
fn binomial_contour_peaks_at_one_for_every_outcome() {
    let m = BinomialModel::new(20).unwrap();
    for y in 0..=20u64 {
        let im = build_im(&m, &BinomialData { successes: y }, &CalibrationConfig::default()).unwrap();
        let c = im.scalar().unwrap();
        assert_eq!(c.max_value(), 1.0);
        assert_eq!(c.value_at(y as f64 / 20.0), Some(1.0));
        assert_eq!(im.possibility(&im.full_space()).unwrap(), 1.0);
        assert_eq!(im.necessity(&HypothesisSet::from(IntervalSet::empty())).unwrap(), 0.0);
    }
}

#[test]
fn monte_carlo_set_queries_need_grid_points() {
    let data = improbe::models::data::law_school::<f64>();
    let m = BivariateCorrelationModel::new(data.len()).unwrap();
    let im = build_im_with(&m, &data, &CalibrationConfig::default().with_samples(200), &GridConfig { points: 21, ..grid() })
        .unwrap();
    let c = im.scalar().unwrap();
    let (a, b) = (c.grid()[3], c.grid()[4]);
    let gap = HypothesisSet::interval(Interval::open(a, b));
    assert!(matches!(im.possibility(&gap), Err(Error::Unresolved(_))));
    assert_eq!(im.possibility(&HypothesisSet::interval(Interval::point(c.mle()))).unwrap(), 1.0);
}
