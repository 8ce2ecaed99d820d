//! Statistical models: likelihood, maximum likelihood and sampling.

mod binomial;
mod correlation;
pub mod data;
mod normal;
mod table;

use std::fmt::Debug;

use rand::Rng;

use crate::error::{Error, Result};
use crate::possibility::Interval;
use crate::real::Real;
use crate::rng::{domain, Seed};

pub use binomial::{BinomialData, BinomialModel};
pub use correlation::{BivariateCorrelationModel, CorrelationData};
pub use normal::{NormalData, NormalMeanModel};
pub use table::{TableCounts, TwoByTwoModel};

/// Parameter space as a box, plus a description of admissible data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T> {
    pub parameter_space: Vec<Interval<T>>,
    pub data_shape: &'static str,
}

/// A parameter value: a scalar or a fixed-size vector of coordinates.
pub trait ParamPoint<T: Real>: Copy + Debug + PartialEq + Send + Sync + 'static {
    fn coords(&self) -> Vec<T>;
}

impl<T: Real> ParamPoint<T> for T {
    fn coords(&self) -> Vec<T> {
        vec![*self]
    }
}

impl<T: Real> ParamPoint<T> for [T; 2] {
    fn coords(&self) -> Vec<T> {
        self.to_vec()
    }
}

/// A parametric family `{P_θ}` with its likelihood.
pub trait Model<T: Real>: Clone + Debug + Send + Sync + 'static {
    type Param: ParamPoint<T>;
    type Data: Clone + Debug + PartialEq + Send + Sync + 'static;

    fn name(&self) -> &'static str;

    fn spec(&self) -> ModelSpec<T>;

    fn check_param(&self, theta: &Self::Param) -> Result<()> {
        let spec = self.spec();
        let coords = theta.coords();
        let inside = coords.len() == spec.parameter_space.len()
            && coords.iter().zip(&spec.parameter_space).all(|(x, s)| s.contains(*x));
        if inside {
            Ok(())
        } else {
            Err(Error::OutsideParameterSpace {
                value: format!("{theta:?}"),
                space: format!("{:?}", spec.parameter_space.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
            })
        }
    }

    fn check_data(&self, data: &Self::Data) -> Result<()>;

    /// Full normalized log-density of the data at `theta`.
    fn log_likelihood(&self, data: &Self::Data, theta: &Self::Param) -> Result<T>;

    fn mle(&self, data: &Self::Data) -> Result<Self::Param>;

    /// One draw from `P_θ`. Callers have validated `theta`.
    fn sample_with<R: Rng + ?Sized>(&self, theta: &Self::Param, rng: &mut R) -> Self::Data;

    /// Approximate standard error of the MLE, used to size default grids.
    fn standard_error(&self, data: &Self::Data, mle: &Self::Param) -> Self::Param;

    /// Identifies datasets of discrete models, letting callers memoize
    /// per-dataset work. Continuous models return `None`.
    fn data_key(&self, _data: &Self::Data) -> Option<u64> {
        None
    }
}

/// Reproducible draw from `P_θ`.
pub fn sample<T: Real, M: Model<T>>(model: &M, theta: &M::Param, seed: Seed) -> Result<M::Data> {
    model.check_param(theta)?;
    let mut rng = seed.substream(&[domain::SAMPLE]);
    Ok(model.sample_with(theta, &mut rng))
}

pub(crate) fn standard_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(rand_distr::StandardNormal))
}

/// Number of `n` uniforms falling below `p`; monotone in `p` for a fixed
/// stream, which keeps common random numbers effective across parameters.
pub(crate) fn bernoulli_count<T: Real, R: Rng + ?Sized>(n: u64, p: T, rng: &mut R) -> u64 {
    let p = p.to_f64_lossy();
    (0..n).filter(|_| rng.random::<f64>() < p).count() as u64
}
