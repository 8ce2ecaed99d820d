use rand::Rng;

use crate::error::{Error, Result};
use crate::models::{standard_normal, Model, ModelSpec};
use crate::possibility::Interval;
use crate::real::Real;

/// `Ȳ ~ N(Θ, sd²)` with known `sd`, the sampling distribution of a sample mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMeanModel<T> {
    sd: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalData<T> {
    pub ybar: T,
}

impl<T: Real> NormalMeanModel<T> {
    pub fn new(sampling_sd_of_mean: T) -> Result<Self> {
        if !(sampling_sd_of_mean > T::zero()) || !sampling_sd_of_mean.is_finite() {
            return Err(Error::Config(format!("sampling sd must be positive, got {sampling_sd_of_mean}")));
        }
        Ok(Self { sd: sampling_sd_of_mean })
    }

    /// Known population sd and sample size, `sd / √n`.
    pub fn from_population(sigma: T, n: usize) -> Result<Self> {
        Self::new(sigma / T::count(n).sqrt())
    }

    pub fn sd(&self) -> T {
        self.sd
    }

    /// Standardized distance `(ȳ - θ) / sd`.
    pub fn z(&self, ybar: T, theta: T) -> T {
        (ybar - theta) / self.sd
    }
}

impl<T: Real> Model<T> for NormalMeanModel<T> {
    type Param = T;
    type Data = NormalData<T>;

    fn name(&self) -> &'static str {
        "normal"
    }

    fn spec(&self) -> ModelSpec<T> {
        ModelSpec {
            parameter_space: vec![Interval::real_line()],
            data_shape: "one observed sample mean `ybar`",
        }
    }

    fn check_data(&self, data: &NormalData<T>) -> Result<()> {
        if data.ybar.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidData(format!("ybar must be finite, got {}", data.ybar)))
        }
    }

    fn log_likelihood(&self, data: &NormalData<T>, theta: &T) -> Result<T> {
        self.check_param(theta)?;
        let z = self.z(data.ybar, *theta);
        let half = T::lit(0.5);
        Ok(-half * z * z - self.sd.ln() - half * (T::lit(2.0) * T::PI()).ln())
    }

    fn mle(&self, data: &NormalData<T>) -> Result<T> {
        self.check_data(data)?;
        Ok(data.ybar)
    }

    fn sample_with<R: Rng + ?Sized>(&self, theta: &T, rng: &mut R) -> NormalData<T> {
        NormalData {
            ybar: *theta + self.sd * standard_normal::<T, R>(rng),
        }
    }

    fn standard_error(&self, _data: &NormalData<T>, _mle: &T) -> T {
        self.sd
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::sample;
    use crate::rng::Seed;

    #[test]
    fn log_likelihood_peaks_at_ybar() {
        let m = NormalMeanModel::new(1.0f64).unwrap();
        let y = NormalData { ybar: 152.0 };
        let top = m.log_likelihood(&y, &152.0).unwrap();
        assert!((top + 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
        for t in [150.0, 151.9, 152.1, 160.0] {
            assert!(m.log_likelihood(&y, &t).unwrap() < top);
        }
        assert_eq!(m.mle(&y).unwrap(), 152.0);
    }

    #[test]
    fn construction_and_domain_errors() {
        assert!(NormalMeanModel::new(0.0).is_err());
        assert!(NormalMeanModel::new(-1.0).is_err());
        let m = NormalMeanModel::from_population(10.0f64, 100).unwrap();
        assert_eq!(m.sd(), 1.0);
        let y = NormalData { ybar: 1.0 };
        assert!(m.log_likelihood(&y, &f64::INFINITY).is_err());
        assert!(m.mle(&NormalData { ybar: f64::NAN }).is_err());
    }

    #[test]
    fn sampler_mean_is_within_clt_bound() {
        let m = NormalMeanModel::new(1.0f64).unwrap();
        let mut rng = Seed(3).substream(&[9]);
        let draws = 1_000_000;
        let total: f64 = (0..draws).map(|_| m.sample_with(&150.0, &mut rng).ybar).sum();
        let mean = total / draws as f64;
        assert!((mean - 150.0).abs() < 0.004, "mean {mean}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let m = NormalMeanModel::new(1.0f64).unwrap();
        let a = sample(&m, &150.0, Seed(11)).unwrap();
        let b = sample(&m, &150.0, Seed(11)).unwrap();
        assert_eq!(a.ybar.to_bits(), b.ybar.to_bits());
    }
}
