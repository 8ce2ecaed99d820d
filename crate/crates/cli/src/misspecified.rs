//! A normal model whose data come from a different spread than the IM
//! assumes, for auditing how validity degrades under misspecification.

use improbe::likelihood::ExactCalibration;
use improbe::{Model, ModelSpec, NormalData, NormalMeanModel64, Result};
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub struct Misspecified {
    pub assumed: NormalMeanModel64,
    pub truth: NormalMeanModel64,
}

impl Model<f64> for Misspecified {
    type Param = f64;
    type Data = NormalData<f64>;

    fn name(&self) -> &'static str {
        "normal-misspecified"
    }

    fn spec(&self) -> ModelSpec<f64> {
        self.assumed.spec()
    }

    fn check_data(&self, data: &Self::Data) -> Result<()> {
        self.assumed.check_data(data)
    }

    fn log_likelihood(&self, data: &Self::Data, theta: &f64) -> Result<f64> {
        self.assumed.log_likelihood(data, theta)
    }

    fn mle(&self, data: &Self::Data) -> Result<f64> {
        self.assumed.mle(data)
    }

    fn sample_with<R: Rng + ?Sized>(&self, theta: &f64, rng: &mut R) -> Self::Data {
        self.truth.sample_with(theta, rng)
    }

    fn standard_error(&self, data: &Self::Data, mle: &f64) -> f64 {
        self.assumed.standard_error(data, mle)
    }
}

impl ExactCalibration<f64> for Misspecified {
    fn supports_exact(&self) -> bool {
        true
    }

    fn contour_exact(&self, data: &Self::Data, theta: &f64) -> Result<f64> {
        self.assumed.contour_exact(data, theta)
    }
}
