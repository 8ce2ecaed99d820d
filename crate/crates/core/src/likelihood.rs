//! Likelihood-based construction: relative likelihood calibrated into a
//! possibility contour, `π_y(θ) = P_θ{R(Y,θ) ≤ R(y,θ)}`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{
    BinomialData, BinomialModel, BivariateCorrelationModel, Model, NormalData, NormalMeanModel, ParamPoint,
    TableCounts, TwoByTwoModel,
};
use crate::possibility::contour::{default_grid, insert_point, DEFAULT_GRID_POINTS};
use crate::possibility::{Contour, ImPair, LatticeContour, PairEval, ScalarEval};
use crate::real::Real;
use crate::rng::{domain, Seed};
use crate::special::erfc;

/// Slack in `R(Y,θ) ≤ R(y,θ)` so that the realized data always counts itself.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Default points per axis of two-dimensional lattices.
pub const DEFAULT_LATTICE_POINTS: usize = 201;

/// Monte Carlo settings for evaluating the contour probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CalibrationConfig {
    pub mc_samples: usize,
    pub seed: Seed,
    /// One substream per replicate shared by every θ (transformed per θ).
    /// When off, substreams are additionally keyed by grid index.
    pub common_random_numbers: bool,
    /// Calibrate by simulation even when an exact evaluator exists.
    pub force_monte_carlo: bool,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            mc_samples: 10_000,
            seed: Seed(0),
            common_random_numbers: true,
            force_monte_carlo: false,
        }
    }
}

impl CalibrationConfig {
    pub fn with_samples(mut self, m: usize) -> Self {
        self.mc_samples = m;
        self
    }

    pub fn monte_carlo(mut self) -> Self {
        self.force_monte_carlo = true;
        self
    }

    pub fn with_seed(mut self, seed: impl Into<Seed>) -> Self {
        self.seed = seed.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc_samples < 100 {
            return Err(Error::Config(format!("mc_samples must be at least 100, got {}", self.mc_samples)));
        }
        Ok(())
    }

    fn stream(&self, grid_index: u64, replicate: u64) -> rand_chacha::ChaCha8Rng {
        if self.common_random_numbers {
            self.seed.substream(&[domain::CALIBRATION, replicate])
        } else {
            self.seed.substream(&[domain::CALIBRATION, grid_index, replicate])
        }
    }
}

/// Grid resolution used by [`build_im_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridConfig {
    /// Points on a scalar parameter grid.
    pub points: usize,
    /// Points per axis on a two-dimensional lattice.
    pub lattice_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            points: DEFAULT_GRID_POINTS,
            lattice_points: DEFAULT_LATTICE_POINTS,
        }
    }
}

/// `R(y, θ) = L_y(θ) / L_y(θ̂_y)`, clamped into `[0, 1]`.
pub fn relative_likelihood<T: Real, M: Model<T>>(model: &M, data: &M::Data, theta: &M::Param) -> Result<T> {
    let top = model.mle(data)?;
    relative_to(model, data, theta, &top)
}

fn relative_to<T: Real, M: Model<T>>(model: &M, data: &M::Data, theta: &M::Param, mle: &M::Param) -> Result<T> {
    let at = model.log_likelihood(data, theta)?;
    if at == T::neg_infinity() {
        return Ok(T::zero());
    }
    let top = model.log_likelihood(data, mle)?;
    Ok((at - top).exp().unit_clamp())
}

/// Models whose contour can be computed without simulation.
pub trait ExactCalibration<T: Real>: Model<T> {
    fn supports_exact(&self) -> bool {
        false
    }

    /// `π_y(θ)` by closed form or enumeration. Infinite coordinates of an
    /// unbounded parameter evaluate the limit.
    fn contour_exact(&self, _data: &Self::Data, _theta: &Self::Param) -> Result<T> {
        Err(Error::Capability(format!(
            "{} model has no exact contour evaluator; use Monte Carlo",
            self.name()
        )))
    }
}

impl<T: Real> ExactCalibration<T> for NormalMeanModel<T> {
    fn supports_exact(&self) -> bool {
        true
    }

    /// `1 - |2Φ(|ȳ - θ|/sd) - 1|`, evaluated as `erfc(|z|/√2)`.
    fn contour_exact(&self, data: &NormalData<T>, theta: &T) -> Result<T> {
        if theta.is_nan() {
            return Err(Error::OutsideParameterSpace { value: "NaN".into(), space: "(-inf,inf)".into() });
        }
        self.check_data(data)?;
        let z = self.z(data.ybar, *theta).abs();
        Ok(erfc(z / T::SQRT_2()).unit_clamp())
    }
}

// Dividing by the enumerated total removes pmf rounding, so the contour is
// exactly 1 when no outcome is excluded.
fn normalized_mass<T: Real>(inside: T, outside: T) -> T {
    if outside == T::zero() {
        return T::one();
    }
    (inside / (inside + outside)).unit_clamp()
}

impl<T: Real> ExactCalibration<T> for BinomialModel<T> {
    fn supports_exact(&self) -> bool {
        true
    }

    /// `Σ_{y'} Binom(y'; n, θ) · 1{R(y',θ) ≤ R(y,θ)}`.
    fn contour_exact(&self, data: &BinomialData, theta: &T) -> Result<T> {
        self.check_param(theta)?;
        self.check_data(data)?;
        let tol = T::lit(TIE_TOLERANCE);
        let threshold = self.log_relative(data.successes, *theta).exp() + tol;
        let (mut inside, mut outside) = (T::zero(), T::zero());
        for k in 0..=self.n_trials() {
            let p = self.log_pmf(k, *theta).exp();
            if self.log_relative(k, *theta).exp() <= threshold {
                inside = inside + p;
            } else {
                outside = outside + p;
            }
        }
        Ok(normalized_mass(inside, outside))
    }
}

impl<T: Real> ExactCalibration<T> for TwoByTwoModel<T> {
    fn supports_exact(&self) -> bool {
        true
    }

    /// Enumeration over all `(y0', y1')` with the product-binomial relative likelihood.
    fn contour_exact(&self, data: &TableCounts, theta: &[T; 2]) -> Result<T> {
        self.check_param(theta)?;
        self.check_data(data)?;
        let [n0, n1] = self.row_totals();
        let row = |r: usize, n: u64| -> Vec<(T, T)> {
            (0..=n)
                .map(|k| (self.row_log_relative(r, k, theta[r]).exp(), self.row_log_pmf(r, k, theta[r]).exp()))
                .collect()
        };
        let a = row(0, n0);
        let b = row(1, n1);
        let s = data.successes();
        let threshold = a[s[0] as usize].0 * b[s[1] as usize].0 + T::lit(TIE_TOLERANCE);
        let (mut inside, mut outside) = (T::zero(), T::zero());
        for &(ra, pa) in &a {
            if pa == T::zero() {
                continue;
            }
            for &(rb, pb) in &b {
                if ra * rb <= threshold {
                    inside = inside + pa * pb;
                } else {
                    outside = outside + pa * pb;
                }
            }
        }
        Ok(normalized_mass(inside, outside))
    }
}

impl<T: Real> ExactCalibration<T> for BivariateCorrelationModel {}

/// Exact contour evaluation through the capability trait.
pub fn contour_exact<T: Real, M: ExactCalibration<T>>(model: &M, data: &M::Data, theta: &M::Param) -> Result<T> {
    model.contour_exact(data, theta)
}

/// Monte Carlo estimate of the contour with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<T> {
    pub estimate: T,
    pub std_error: T,
}

/// Sorted simulated relative likelihoods `R(Y_m, θ)`, `Y_m ~ P_θ`.
///
/// Under common random numbers the sample depends only on `(θ, cfg)`, not
/// on the observed data, so one draw serves every dataset at that θ.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSample<T> {
    ratios: Vec<T>,
}

impl<T: Real> NullSample<T> {
    pub fn draw<M: Model<T>>(model: &M, theta: &M::Param, grid_index: u64, cfg: &CalibrationConfig) -> Result<Self> {
        cfg.validate()?;
        model.check_param(theta)?;
        let mut ratios = (0..cfg.mc_samples)
            .into_par_iter()
            .map(|m| {
                let mut rng = cfg.stream(grid_index, m as u64);
                let y = model.sample_with(theta, &mut rng);
                let hat = model.mle(&y)?;
                relative_to(model, &y, theta, &hat)
            })
            .collect::<Result<Vec<T>>>()?;
        ratios.sort_by(|a, b| a.partial_cmp(b).expect("ratios are not NaN"));
        Ok(Self { ratios })
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn ratios(&self) -> &[T] {
        &self.ratios
    }

    /// Number of simulated ratios at most `r` (with tie slack).
    pub fn count_at_most(&self, r: T) -> usize {
        let cut = r + T::lit(TIE_TOLERANCE);
        self.ratios.partition_point(|&x| x <= cut)
    }

    /// `(1/M) Σ 1{R(Y_m,θ) ≤ r}` and its standard error.
    pub fn estimate(&self, r: T) -> McEstimate<T> {
        let m = T::count(self.ratios.len());
        let p = T::count(self.count_at_most(r)) / m;
        McEstimate {
            estimate: p,
            std_error: (p * (T::one() - p) / m).sqrt(),
        }
    }
}

/// `π_y(θ)` by Monte Carlo, deterministic given `cfg`.
pub fn contour_mc<T: Real, M: Model<T>>(
    model: &M,
    data: &M::Data,
    theta: &M::Param,
    cfg: &CalibrationConfig,
) -> Result<McEstimate<T>> {
    contour_mc_indexed(model, data, theta, 0, cfg)
}

pub(crate) fn contour_mc_indexed<T: Real, M: Model<T>>(
    model: &M,
    data: &M::Data,
    theta: &M::Param,
    grid_index: u64,
    cfg: &CalibrationConfig,
) -> Result<McEstimate<T>> {
    let r_obs = relative_likelihood(model, data, theta)?;
    Ok(NullSample::draw(model, theta, grid_index, cfg)?.estimate(r_obs))
}

/// Parameter types that know how to lay out a default grid and assemble an IM.
pub trait GridParam<T: Real>: ParamPoint<T> {
    fn assemble<M>(model: &M, data: &M::Data, cfg: &CalibrationConfig, grid: &GridConfig) -> Result<ImPair<T>>
    where
        M: ExactCalibration<T, Param = Self>;
}

impl<T: Real> GridParam<T> for T {
    fn assemble<M>(model: &M, data: &M::Data, cfg: &CalibrationConfig, grid: &GridConfig) -> Result<ImPair<T>>
    where
        M: ExactCalibration<T, Param = T>,
    {
        let mle = model.mle(data)?;
        let se = model.standard_error(data, &mle);
        let space = model.spec().parameter_space[0];
        let points = default_grid(&space, mle, se, grid.points);
        let contour = if model.supports_exact() && !cfg.force_monte_carlo {
            let (m, d) = (model.clone(), data.clone());
            let f: ScalarEval<T> = Arc::new(move |t| m.contour_exact(&d, &t).unwrap_or_else(|_| T::nan()));
            Contour::from_exact(points, mle, space, f)?
        } else {
            cfg.validate()?;
            let values = points
                .par_iter()
                .enumerate()
                .map(|(k, t)| contour_mc_indexed(model, data, t, k as u64, cfg).map(|e| e.estimate))
                .collect::<Result<Vec<T>>>()?;
            Contour::new(points, values, mle, space, None)?
        };
        Ok(contour.into())
    }
}

impl<T: Real> GridParam<T> for [T; 2] {
    fn assemble<M>(model: &M, data: &M::Data, cfg: &CalibrationConfig, grid: &GridConfig) -> Result<ImPair<T>>
    where
        M: ExactCalibration<T, Param = [T; 2]>,
    {
        let mle = model.mle(data)?;
        let se = model.standard_error(data, &mle);
        let spec = model.spec();
        let space = [spec.parameter_space[0], spec.parameter_space[1]];
        let mut xs = default_grid(&space[0], mle[0], se[0], grid.lattice_points);
        let mut ys = default_grid(&space[1], mle[1], se[1], grid.lattice_points);
        let contour = if model.supports_exact() && !cfg.force_monte_carlo {
            let (m, d) = (model.clone(), data.clone());
            let f: PairEval<T> = Arc::new(move |p| m.contour_exact(&d, &p).unwrap_or_else(|_| T::nan()));
            LatticeContour::from_exact(xs, ys, mle, space, f)?
        } else {
            cfg.validate()?;
            insert_point(&mut xs, mle[0]);
            insert_point(&mut ys, mle[1]);
            let ny = ys.len();
            let values = (0..xs.len() * ny)
                .into_par_iter()
                .map(|k| {
                    let p = [xs[k / ny], ys[k % ny]];
                    contour_mc_indexed(model, data, &p, k as u64, cfg).map(|e| e.estimate)
                })
                .collect::<Result<Vec<T>>>()?;
            LatticeContour::new(xs, ys, values, mle, space, None)?
        };
        Ok(contour.into())
    }
}

/// Builds the IM on the default grid, preferring the exact evaluator.
pub fn build_im<T: Real, M>(model: &M, data: &M::Data, cfg: &CalibrationConfig) -> Result<ImPair<T>>
where
    M: ExactCalibration<T>,
    M::Param: GridParam<T>,
{
    build_im_with(model, data, cfg, &GridConfig::default())
}

pub fn build_im_with<T: Real, M>(model: &M, data: &M::Data, cfg: &CalibrationConfig, grid: &GridConfig) -> Result<ImPair<T>>
where
    M: ExactCalibration<T>,
    M::Param: GridParam<T>,
{
    model.check_data(data)?;
    M::Param::assemble(model, data, cfg, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_likelihood_examples() {
        let b = BinomialModel::<f64>::new(20).unwrap();
        let y = BinomialData { successes: 8 };
        assert_eq!(relative_likelihood(&b, &y, &0.4).unwrap(), 1.0);
        let want = 0.5f64.powi(8) * (0.8f64 / 0.6).powi(12);
        assert!((relative_likelihood(&b, &y, &0.2).unwrap() - want).abs() < 1e-14);
        assert!((want - 0.123_317_546_068_143).abs() < 1e-14);

        let n = NormalMeanModel::new(1.0f64).unwrap();
        let r = relative_likelihood(&n, &NormalData { ybar: 152.0 }, &150.0).unwrap();
        assert!((r - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(CalibrationConfig::default().with_samples(99).validate().is_err());
        assert!(CalibrationConfig::default().validate().is_ok());
    }

    #[test]
    fn correlation_lacks_exact_evaluator() {
        let m = BivariateCorrelationModel::new(15).unwrap();
        let d = crate::models::data::law_school::<f64>();
        assert!(matches!(contour_exact(&m, &d, &0.5), Err(Error::Capability(_))));
    }

    #[test]
    fn exact_contours_peak_at_one() {
        let b = BinomialModel::<f64>::new(20).unwrap();
        assert_eq!(contour_exact(&b, &BinomialData { successes: 8 }, &0.4).unwrap(), 1.0);
        let n = NormalMeanModel::new(1.0f64).unwrap();
        assert_eq!(contour_exact(&n, &NormalData { ybar: 152.0 }, &152.0).unwrap(), 1.0);
        assert_eq!(contour_exact(&n, &NormalData { ybar: 152.0 }, &f64::INFINITY).unwrap(), 0.0);
        let t = TableCounts::new(11, 14, 17, 8);
        let m = TwoByTwoModel::for_table(&t).unwrap();
        assert_eq!(contour_exact(&m, &t, &[0.56, 0.32]).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_binomial_data_uses_boundary() {
        let b = BinomialModel::<f64>::new(20).unwrap();
        let y0 = BinomialData { successes: 0 };
        assert_eq!(contour_exact(&b, &y0, &0.0).unwrap(), 1.0);
        assert!(contour_exact(&b, &y0, &0.3).unwrap() < 0.01);
        let y8 = BinomialData { successes: 8 };
        assert_eq!(contour_exact(&b, &y8, &0.0).unwrap(), 0.0);
        assert_eq!(contour_exact(&b, &y8, &1.0).unwrap(), 0.0);
    }
}
