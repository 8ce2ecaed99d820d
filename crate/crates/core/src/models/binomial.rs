use rand::Rng;

use crate::error::{Error, Result};
use crate::models::{bernoulli_count, Model, ModelSpec};
use crate::possibility::Interval;
use crate::real::Real;
use crate::special::LnFactorials;

/// `Y ~ Binomial(n, Θ)`, `Θ ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialModel<T> {
    n_trials: u64,
    ln_fact: LnFactorials<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinomialData {
    pub successes: u64,
}

impl<T: Real> BinomialModel<T> {
    pub fn new(n_trials: u64) -> Result<Self> {
        if n_trials == 0 {
            return Err(Error::Config("binomial model needs at least one trial".into()));
        }
        Ok(Self {
            n_trials,
            ln_fact: LnFactorials::new(n_trials as usize),
        })
    }

    pub fn n_trials(&self) -> u64 {
        self.n_trials
    }

    /// `ln P_θ(Y = y)`; `-inf` where the mass is zero.
    pub fn log_pmf(&self, y: u64, theta: T) -> T {
        let n = self.n_trials;
        let ln_c = self.ln_fact.ln_choose(n as usize, y as usize);
        ln_c + T::xlny(T::count(y as usize), theta) + T::xlny(T::count((n - y) as usize), T::one() - theta)
    }

    /// Log relative likelihood `ln R(y, θ)`, computed without the binomial
    /// coefficient (it cancels).
    pub fn log_relative(&self, y: u64, theta: T) -> T {
        let n = self.n_trials;
        let k = T::count(y as usize);
        let m = T::count((n - y) as usize);
        let hat = k / T::count(n as usize);
        let at = T::xlny(k, theta) + T::xlny(m, T::one() - theta);
        let top = T::xlny(k, hat) + T::xlny(m, T::one() - hat);
        (at - top).min(T::zero())
    }
}

impl<T: Real> Model<T> for BinomialModel<T> {
    type Param = T;
    type Data = BinomialData;

    fn name(&self) -> &'static str {
        "binomial"
    }

    fn spec(&self) -> ModelSpec<T> {
        ModelSpec {
            parameter_space: vec![Interval::closed(T::zero(), T::one())],
            data_shape: "successes y in 0..=n",
        }
    }

    fn check_data(&self, data: &BinomialData) -> Result<()> {
        if data.successes <= self.n_trials {
            Ok(())
        } else {
            Err(Error::InvalidData(format!(
                "{} successes exceed {} trials",
                data.successes, self.n_trials
            )))
        }
    }

    fn log_likelihood(&self, data: &BinomialData, theta: &T) -> Result<T> {
        self.check_param(theta)?;
        self.check_data(data)?;
        Ok(self.log_pmf(data.successes, *theta))
    }

    fn mle(&self, data: &BinomialData) -> Result<T> {
        self.check_data(data)?;
        Ok(T::count(data.successes as usize) / T::count(self.n_trials as usize))
    }

    fn sample_with<R: Rng + ?Sized>(&self, theta: &T, rng: &mut R) -> BinomialData {
        BinomialData {
            successes: bernoulli_count(self.n_trials, *theta, rng),
        }
    }

    fn standard_error(&self, _data: &BinomialData, mle: &T) -> T {
        let n = T::count(self.n_trials as usize);
        (*mle * (T::one() - *mle) / n).sqrt().max(T::one() / n)
    }

    fn data_key(&self, data: &BinomialData) -> Option<u64> {
        Some(data.successes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::sample;
    use crate::rng::Seed;

    #[test]
    fn log_likelihood_direct_formula() {
        let m = BinomialModel::<f64>::new(20).unwrap();
        let got = m.log_likelihood(&BinomialData { successes: 8 }, &0.4).unwrap();
        let want = 125_970f64.ln() + 8.0 * 0.4f64.ln() + 12.0 * 0.6f64.ln();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn mle_closed_form_and_boundaries() {
        let m = BinomialModel::<f64>::new(20).unwrap();
        assert_eq!(m.mle(&BinomialData { successes: 8 }).unwrap(), 0.4);
        assert_eq!(m.mle(&BinomialData { successes: 0 }).unwrap(), 0.0);
        assert_eq!(m.mle(&BinomialData { successes: 20 }).unwrap(), 1.0);
        assert_eq!(m.log_likelihood(&BinomialData { successes: 0 }, &0.0).unwrap(), 0.0);
        assert_eq!(m.log_likelihood(&BinomialData { successes: 3 }, &0.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn errors() {
        assert!(BinomialModel::<f64>::new(0).is_err());
        let m = BinomialModel::<f64>::new(20).unwrap();
        assert!(m.log_likelihood(&BinomialData { successes: 8 }, &1.2).is_err());
        assert!(m.mle(&BinomialData { successes: 21 }).is_err());
    }

    #[test]
    fn degenerate_sampling() {
        let m = BinomialModel::<f64>::new(20).unwrap();
        for s in 0..50 {
            assert_eq!(sample(&m, &0.0, Seed(s)).unwrap().successes, 0);
            assert_eq!(sample(&m, &1.0, Seed(s)).unwrap().successes, 20);
        }
    }
}
