//! Test-based construction: the contour is the p-value function of a
//! family of tests, `π_y(θ) = inf{α : δ_α^θ(y) = 1}`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::likelihood::{
    build_im_with, relative_likelihood, CalibrationConfig, ExactCalibration, GridConfig, NullSample, TIE_TOLERANCE,
};
use crate::models::{BinomialModel, BivariateCorrelationModel, Model, NormalMeanModel, TwoByTwoModel};
use crate::possibility::contour::{default_grid, DEFAULT_GRID_POINTS};
use crate::possibility::{Contour, HypothesisSet, ImPair, Interval, ScalarEval};
use crate::real::Real;
use crate::special::{norm_cdf, norm_quantile, norm_sf};

/// Slack allowed when checking that a p-value function reaches 1.
pub const CONSONANCE_SLACK: f64 = 1e-9;

/// Which one-sided null the p-value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Null `Θ ≤ θ`; large `ȳ - θ` is evidence against it.
    Left,
    /// Null `Θ ≥ θ`.
    Right,
}

/// `pval^≤_y(θ) = 1 - Φ((ȳ - θ)/sd)`.
pub fn pval_left<T: Real>(model: &NormalMeanModel<T>, ybar: T, theta: T) -> T {
    norm_sf(model.z(ybar, theta))
}

/// `pval^≥_y(θ) = Φ((ȳ - θ)/sd)`.
pub fn pval_right<T: Real>(model: &NormalMeanModel<T>, ybar: T, theta: T) -> T {
    norm_cdf(model.z(ybar, theta))
}

/// A p-value function `θ ↦ pval(θ)` for one-sided nulls, with the location
/// and scale used to lay out its grid.
#[derive(Clone)]
pub struct OneSidedPValueFunction<T> {
    direction: Direction,
    center: T,
    scale: T,
    eval: ScalarEval<T>,
}

impl<T: Real> std::fmt::Debug for OneSidedPValueFunction<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OneSidedPValueFunction")
            .field("direction", &self.direction)
            .field("center", &self.center)
            .field("scale", &self.scale)
            .finish()
    }
}

impl<T: Real> OneSidedPValueFunction<T> {
    /// The family generated from one z-test by location shifts.
    pub fn normal(model: NormalMeanModel<T>, ybar: T, direction: Direction) -> Self {
        let eval: ScalarEval<T> = match direction {
            Direction::Left => Arc::new(move |t| pval_left(&model, ybar, t)),
            Direction::Right => Arc::new(move |t| pval_right(&model, ybar, t)),
        };
        Self {
            direction,
            center: ybar,
            scale: model.sd(),
            eval,
        }
    }

    pub fn from_fn(direction: Direction, center: T, scale: T, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            direction,
            center,
            scale,
            eval: Arc::new(f),
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn eval(&self, theta: T) -> T {
        (self.eval)(theta)
    }
}

/// IM whose contour is the p-value function.
///
/// Rejects functions that are not monotone in the declared direction on the
/// grid, or whose supremum (including the limit at infinity) falls short of 1.
pub fn test_im<T: Real>(pv: &OneSidedPValueFunction<T>) -> Result<ImPair<T>> {
    test_im_with(pv, DEFAULT_GRID_POINTS)
}

pub fn test_im_with<T: Real>(pv: &OneSidedPValueFunction<T>, points: usize) -> Result<ImPair<T>> {
    let space = Interval::real_line();
    let grid = default_grid(&space, pv.center, pv.scale, points);
    let contour = Contour::from_exact(grid, pv.center, space, pv.eval.clone())
        .map_err(|e| Error::NotConsonant(e.to_string()))?;
    let v = contour.values();
    let monotone = match pv.direction {
        Direction::Left => v.windows(2).all(|w| w[0] <= w[1]),
        Direction::Right => v.windows(2).all(|w| w[0] >= w[1]),
    };
    if !monotone {
        return Err(Error::NotConsonant(format!("{:?} p-value function is not monotone", pv.direction)));
    }
    let limit = match pv.direction {
        Direction::Left => pv.eval(T::infinity()),
        Direction::Right => pv.eval(T::neg_infinity()),
    };
    let sup = contour.max_value().max(if limit.is_nan() { T::zero() } else { limit });
    if sup < T::one() - T::lit(CONSONANCE_SLACK) {
        return Err(Error::NotConsonant(format!("supremum {sup} does not reach 1")));
    }
    Ok(contour.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Reject,
    NotReject,
}

/// Reject `H` iff `Π̄(H) ≤ α`.
pub fn test_decision<T: Real>(im: &ImPair<T>, h: &HypothesisSet<T>, alpha: T) -> Result<Decision> {
    if alpha.is_nan() || alpha < T::zero() || alpha > T::one() {
        return Err(Error::Config(format!("alpha {alpha} outside [0,1]")));
    }
    Ok(if im.possibility(h)? <= alpha {
        Decision::Reject
    } else {
        Decision::NotReject
    })
}

/// Sampling law of `R(Y, θ)` under `P_θ`, which fixes the critical values
/// `c_α(θ)` of the likelihood-ratio test of `{θ}`.
#[derive(Debug, Clone, PartialEq)]
pub enum RatioLaw<T> {
    /// Finitely many levels with probabilities, ascending in level.
    Discrete(Vec<(T, T)>),
    /// Equal-weight simulated levels, ascending.
    Empirical(Vec<T>),
    /// `R = exp(-Z²/2)` with `Z` standard normal.
    Gaussian,
}

impl<T: Real> RatioLaw<T> {
    /// `(level, P(R ≤ level))` with levels closer than the tie tolerance merged.
    fn cumulative(&self) -> Vec<(T, T)> {
        let tol = T::lit(TIE_TOLERANCE);
        let mut out: Vec<(T, T)> = Vec::new();
        let push = |level: T, mass: T, out: &mut Vec<(T, T)>| match out.last_mut() {
            Some(last) if level - last.0 <= tol => {
                last.0 = level;
                last.1 = last.1 + mass;
            }
            _ => out.push((level, mass)),
        };
        match self {
            RatioLaw::Discrete(levels) => {
                for &(l, p) in levels {
                    push(l, p, &mut out);
                }
                let total = out.iter().map(|x| x.1).sum::<T>();
                let mut acc = T::zero();
                for x in out.iter_mut() {
                    acc = acc + x.1;
                    x.1 = acc / total;
                }
            }
            RatioLaw::Empirical(levels) => {
                let mut counts: Vec<(T, usize)> = Vec::new();
                for &l in levels {
                    match counts.last_mut() {
                        Some(last) if l - last.0 <= tol => {
                            last.0 = l;
                            last.1 += 1;
                        }
                        _ => counts.push((l, 1)),
                    }
                }
                let m = T::count(levels.len());
                let mut acc = 0usize;
                for (l, c) in counts {
                    acc += c;
                    out.push((l, T::count(acc) / m));
                }
            }
            RatioLaw::Gaussian => {}
        }
        out
    }

    /// Attained significance `inf{α : δ_α(y) = 1}` of the test rejecting
    /// `{θ}` when `R(y,θ)` falls below the critical value `c_α(θ)`.
    pub fn attained_level(&self, r_obs: T) -> T {
        match self {
            RatioLaw::Gaussian => {
                // R ≤ exp(-q²/2) compared as √(-2 ln R) ≥ q, which keeps
                // precision when R is close to 1.
                let z = (-T::lit(2.0) * r_obs.ln()).max(T::zero()).sqrt();
                let rejects = |alpha: T| -> bool { z >= norm_quantile(T::one() - alpha / T::lit(2.0)) };
                let (mut lo, mut hi) = (T::zero(), T::one());
                if rejects(lo) {
                    return lo;
                }
                for _ in 0..200 {
                    let mid = lo + (hi - lo) / T::lit(2.0);
                    if mid == lo || mid == hi {
                        break;
                    }
                    if rejects(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
            _ => {
                let tol = T::lit(TIE_TOLERANCE);
                // With c_α = sup{c : P(R ≤ c) ≤ α} and rejection for R < c_α,
                // the smallest rejecting size is the mass at or below r_obs.
                self.cumulative()
                    .into_iter()
                    .take_while(|(level, _)| *level <= r_obs + tol)
                    .last()
                    .map(|(_, size)| size.unit_clamp())
                    .unwrap_or(T::zero())
            }
        }
    }
}

/// Models providing the law of `R(Y, θ)` for likelihood-ratio tests of
/// singleton hypotheses.
pub trait LrTestFamily<T: Real>: Model<T> {
    fn ratio_law(&self, theta: &Self::Param, cfg: &CalibrationConfig) -> Result<RatioLaw<T>>;
}

impl<T: Real> LrTestFamily<T> for NormalMeanModel<T> {
    fn ratio_law(&self, theta: &T, _cfg: &CalibrationConfig) -> Result<RatioLaw<T>> {
        self.check_param(theta)?;
        Ok(RatioLaw::Gaussian)
    }
}

impl<T: Real> LrTestFamily<T> for BinomialModel<T> {
    fn ratio_law(&self, theta: &T, _cfg: &CalibrationConfig) -> Result<RatioLaw<T>> {
        self.check_param(theta)?;
        let mut levels: Vec<(T, T)> = (0..=self.n_trials())
            .map(|k| (self.log_relative(k, *theta).exp(), self.log_pmf(k, *theta).exp()))
            .filter(|(_, p)| *p > T::zero())
            .collect();
        levels.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(RatioLaw::Discrete(levels))
    }
}

impl<T: Real> LrTestFamily<T> for TwoByTwoModel<T> {
    fn ratio_law(&self, theta: &[T; 2], _cfg: &CalibrationConfig) -> Result<RatioLaw<T>> {
        self.check_param(theta)?;
        let [n0, n1] = self.row_totals();
        let mut levels = Vec::with_capacity(((n0 + 1) * (n1 + 1)) as usize);
        for a in 0..=n0 {
            let (ra, pa) = (self.row_log_relative(0, a, theta[0]), self.row_log_pmf(0, a, theta[0]));
            for b in 0..=n1 {
                let p = (pa + self.row_log_pmf(1, b, theta[1])).exp();
                if p > T::zero() {
                    levels.push(((ra + self.row_log_relative(1, b, theta[1])).exp(), p));
                }
            }
        }
        levels.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(RatioLaw::Discrete(levels))
    }
}

impl<T: Real> LrTestFamily<T> for BivariateCorrelationModel {
    /// Simulated law, drawn with the same substreams the Monte Carlo
    /// contour uses.
    fn ratio_law(&self, theta: &T, cfg: &CalibrationConfig) -> Result<RatioLaw<T>> {
        Ok(RatioLaw::Empirical(NullSample::draw(self, theta, 0, cfg)?.ratios().to_vec()))
    }
}

/// Contour of the test-based IM for singleton likelihood-ratio tests.
pub fn lr_test_contour<T: Real, M: LrTestFamily<T>>(
    model: &M,
    data: &M::Data,
    theta: &M::Param,
    cfg: &CalibrationConfig,
) -> Result<T> {
    let r_obs = relative_likelihood(model, data, theta)?;
    Ok(model.ratio_law(theta, cfg)?.attained_level(r_obs))
}

/// Discrepancy between the likelihood-based contour and the one built from
/// the likelihood-ratio test family.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport<T> {
    pub points: usize,
    pub max_abs_difference: T,
    pub worst_theta: T,
}

pub fn construction_agreement_check<T: Real, M>(model: &M, data: &M::Data) -> Result<AgreementReport<T>>
where
    M: LrTestFamily<T> + ExactCalibration<T, Param = T>,
{
    construction_agreement_check_with(model, data, &CalibrationConfig::default(), &GridConfig::default())
}

pub fn construction_agreement_check_with<T: Real, M>(
    model: &M,
    data: &M::Data,
    cfg: &CalibrationConfig,
    grid: &GridConfig,
) -> Result<AgreementReport<T>>
where
    M: LrTestFamily<T> + ExactCalibration<T, Param = T>,
{
    let im = build_im_with(model, data, cfg, grid)?;
    let contour = im.scalar().expect("scalar parameter gives a scalar contour");
    // With common random numbers every grid point shares substreams, which
    // is what the test route draws.
    let mut worst = (T::zero(), contour.mle());
    for (&t, &v) in contour.grid().iter().zip(contour.values()) {
        let test_value = lr_test_contour(model, data, &t, cfg)?;
        let d = (test_value - v).abs();
        if d > worst.0 {
            worst = (d, t);
        }
    }
    Ok(AgreementReport {
        points: contour.grid().len(),
        max_abs_difference: worst.0,
        worst_theta: worst.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal() -> NormalMeanModel<f64> {
        NormalMeanModel::new(1.0).unwrap()
    }

    #[test]
    fn p_value_examples() {
        let m = normal();
        assert_eq!(pval_left(&m, 152.0, 152.0), 0.5);
        assert_eq!(pval_right(&m, 152.0, 152.0), 0.5);
        assert!((pval_left(&m, 152.0, 150.0) - 0.022_750_131_948_179_2).abs() < 1e-15);
        assert!((pval_left(&m, 151.0, 150.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!((pval_right(&m, 151.0, 152.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
    }

    #[test]
    fn non_monotone_p_value_rejected() {
        let pv = OneSidedPValueFunction::from_fn(Direction::Left, 0.0, 1.0, |t: f64| (t.sin() + 1.0) / 2.0);
        assert!(matches!(test_im(&pv), Err(Error::NotConsonant(_))));
        let short = OneSidedPValueFunction::from_fn(Direction::Left, 0.0, 1.0, |t: f64| 0.5 * norm_cdf(t));
        assert!(matches!(test_im(&short), Err(Error::NotConsonant(_))));
    }

    #[test]
    fn decisions() {
        let m = normal();
        let im = test_im(&OneSidedPValueFunction::normal(m, 152.0, Direction::Left)).unwrap();
        let h0 = HypothesisSet::at_most(150.0);
        assert_eq!(test_decision(&im, &h0, 0.05).unwrap(), Decision::Reject);
        let im = test_im(&OneSidedPValueFunction::normal(m, 151.0, Direction::Left)).unwrap();
        assert_eq!(test_decision(&im, &h0, 0.05).unwrap(), Decision::NotReject);
        assert_eq!(test_decision(&im, &im.full_space(), 0.99).unwrap(), Decision::NotReject);
        assert!(test_decision(&im, &h0, 1.5).is_err());
    }

    #[test]
    fn discrete_attained_level_merges_ties() {
        let law = RatioLaw::<f64>::Discrete(vec![(0.1, 0.25), (0.5, 0.25), (0.5 + 1e-16, 0.25), (1.0, 0.25)]);
        assert!((law.attained_level(0.5) - 0.75).abs() < 1e-15);
        assert_eq!(law.attained_level(0.05), 0.0);
        assert_eq!(law.attained_level(1.0), 1.0);
        let emp = RatioLaw::Empirical(vec![0.1, 0.2, 0.2, 0.9]);
        assert_eq!(emp.attained_level(0.2), 0.75);
    }
}
