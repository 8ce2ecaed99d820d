use rand::Rng;

use crate::error::{Error, Result};
use crate::models::{standard_normal, Model, ModelSpec};
use crate::possibility::Interval;
use crate::real::Real;

/// Edge of the MLE search interval, `1 - 1e-9`.
pub const RHO_EDGE: f64 = 1.0 - 1e-9;
const MLE_TOL: f64 = 1e-10;
const SCAN_POINTS: usize = 64;
const GOLDEN_WIDTH: f64 = 1e-4;

/// `n` iid pairs from a bivariate normal with zero means, unit variances
/// and correlation `Θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BivariateCorrelationModel {
    n_pairs: usize,
}

/// Pairs on the model scale, with their sums of squares and cross-products.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationData<T> {
    pairs: Vec<[T; 2]>,
    s11: T,
    s12: T,
    s22: T,
}

impl<T: Real> CorrelationData<T> {
    /// Pairs taken as already centred and scaled.
    pub fn from_pairs(pairs: Vec<[T; 2]>) -> Self {
        let (mut s11, mut s12, mut s22) = (T::zero(), T::zero(), T::zero());
        for p in &pairs {
            s11 = s11 + p[0] * p[0];
            s12 = s12 + p[0] * p[1];
            s22 = s22 + p[1] * p[1];
        }
        Self { pairs, s11, s12, s22 }
    }

    /// Centres each column and divides by its sample standard deviation
    /// (denominator `n - 1`).
    pub fn standardized(raw: &[[T; 2]]) -> Result<Self> {
        let n = raw.len();
        if n < 2 {
            return Err(Error::InvalidData("need at least two pairs to standardize".into()));
        }
        let nf = T::count(n);
        let mut out = vec![[T::zero(); 2]; n];
        for col in 0..2 {
            let mean = raw.iter().map(|p| p[col]).sum::<T>() / nf;
            let ss = raw.iter().map(|p| (p[col] - mean) * (p[col] - mean)).sum::<T>();
            let sd = (ss / T::count(n - 1)).sqrt();
            if !(sd > T::zero()) {
                return Err(Error::InvalidData(format!("column {} has zero variance", col + 1)));
            }
            for (o, p) in out.iter_mut().zip(raw) {
                o[col] = (p[col] - mean) / sd;
            }
        }
        Ok(Self::from_pairs(out))
    }

    pub fn pairs(&self) -> &[[T; 2]] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `(S11, S12, S22)`.
    pub fn sums(&self) -> (T, T, T) {
        (self.s11, self.s12, self.s22)
    }

    /// Pearson sample correlation.
    pub fn sample_correlation(&self) -> T {
        let n = T::count(self.pairs.len());
        let m1 = self.pairs.iter().map(|p| p[0]).sum::<T>() / n;
        let m2 = self.pairs.iter().map(|p| p[1]).sum::<T>() / n;
        let (mut a, mut b, mut c) = (T::zero(), T::zero(), T::zero());
        for p in &self.pairs {
            let (u, v) = (p[0] - m1, p[1] - m2);
            a = a + u * v;
            b = b + u * u;
            c = c + v * v;
        }
        a / (b * c).sqrt()
    }
}

impl BivariateCorrelationModel {
    pub fn new(n_pairs: usize) -> Result<Self> {
        if n_pairs < 2 {
            return Err(Error::Config("correlation model needs at least two pairs".into()));
        }
        Ok(Self { n_pairs })
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    fn loglik_from_sums<T: Real>(n: usize, (s11, s12, s22): (T, T, T), rho: T) -> T {
        let one_m = T::one() - rho * rho;
        let half = T::lit(0.5);
        let n = T::count(n);
        -half * n * one_m.ln() - (s11 - T::lit(2.0) * rho * s12 + s22) / (T::lit(2.0) * one_m)
            - n * (T::lit(2.0) * T::PI()).ln()
    }

    // Numerator of d loglik / d rho; its sign is the derivative's sign.
    fn score_sign<T: Real>(n: usize, (s11, s12, s22): (T, T, T), rho: T) -> T {
        let n = T::count(n);
        n * rho * (T::one() - rho * rho) + (T::one() + rho * rho) * s12 - rho * (s11 + s22)
    }

    /// MLE from sufficient statistics. A sign scan of the score locates each
    /// local maximum; golden-section narrows it and bisection on the score
    /// sign finishes to `1e-10`.
    pub fn mle_from_sums<T: Real>(&self, sums: (T, T, T)) -> T {
        let n = self.n_pairs;
        let edge = T::lit(RHO_EDGE);
        let ll = |r: T| Self::loglik_from_sums(n, sums, r);
        let score = |r: T| Self::score_sign(n, sums, r);
        let pts: Vec<T> = (0..=SCAN_POINTS)
            .map(|k| -edge + T::lit(2.0) * edge * T::count(k) / T::count(SCAN_POINTS))
            .collect();
        let mut candidates: Vec<T> = Vec::with_capacity(4);
        if score(pts[0]) <= T::zero() {
            candidates.push(pts[0]);
        }
        if score(pts[SCAN_POINTS]) >= T::zero() {
            candidates.push(pts[SCAN_POINTS]);
        }
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if score(a) > T::zero() && score(b) <= T::zero() {
                candidates.push(refine_max(&ll, &score, a, b));
            }
        }
        candidates
            .into_iter()
            .fold((T::zero(), T::neg_infinity()), |best, r| {
                let v = ll(r);
                if v > best.1 { (r, v) } else { best }
            })
            .0
    }
}

fn refine_max<T: Real>(ll: &dyn Fn(T) -> T, score: &dyn Fn(T) -> T, mut a: T, mut b: T) -> T {
    let ratio = T::lit(0.618_033_988_749_894_8);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (ll(c), ll(d));
    while b - a > T::lit(GOLDEN_WIDTH) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = ll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = ll(d);
        }
    }
    if score(a) > T::zero() && score(b) <= T::zero() {
        while b - a > T::lit(MLE_TOL) {
            let mid = a + (b - a) / T::lit(2.0);
            if mid == a || mid == b {
                break;
            }
            if score(mid) > T::zero() {
                a = mid;
            } else {
                b = mid;
            }
        }
    }
    a + (b - a) / T::lit(2.0)
}

impl<T: Real> Model<T> for BivariateCorrelationModel {
    type Param = T;
    type Data = CorrelationData<T>;

    fn name(&self) -> &'static str {
        "correlation"
    }

    fn spec(&self) -> ModelSpec<T> {
        ModelSpec {
            parameter_space: vec![Interval::open(-T::one(), T::one())],
            data_shape: "n standardized pairs",
        }
    }

    fn check_param(&self, theta: &T) -> Result<()> {
        if theta.abs() == T::one() {
            return Err(Error::Divergent(format!("rho = {theta}")));
        }
        if !(theta.abs() < T::one()) {
            return Err(Error::OutsideParameterSpace {
                value: theta.to_string(),
                space: "[-1,1]".into(),
            });
        }
        Ok(())
    }

    fn check_data(&self, data: &CorrelationData<T>) -> Result<()> {
        if data.len() != self.n_pairs {
            return Err(Error::InvalidData(format!(
                "expected {} pairs, got {}",
                self.n_pairs,
                data.len()
            )));
        }
        if data.pairs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite value in pairs".into()));
        }
        Ok(())
    }

    fn log_likelihood(&self, data: &CorrelationData<T>, theta: &T) -> Result<T> {
        self.check_param(theta)?;
        self.check_data(data)?;
        Ok(Self::loglik_from_sums(self.n_pairs, data.sums(), *theta))
    }

    fn mle(&self, data: &CorrelationData<T>) -> Result<T> {
        self.check_data(data)?;
        Ok(self.mle_from_sums(data.sums()))
    }

    fn sample_with<R: Rng + ?Sized>(&self, theta: &T, rng: &mut R) -> CorrelationData<T> {
        let s = (T::one() - *theta * *theta).max(T::zero()).sqrt();
        let pairs = (0..self.n_pairs)
            .map(|_| {
                let z1: T = standard_normal(rng);
                let z2: T = standard_normal(rng);
                [z1, *theta * z1 + s * z2]
            })
            .collect();
        CorrelationData::from_pairs(pairs)
    }

    fn standard_error(&self, _data: &CorrelationData<T>, mle: &T) -> T {
        ((T::one() - *mle * *mle) / T::count(self.n_pairs).sqrt()).max(T::lit(1e-3))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;

    #[test]
    fn mle_maximizes_on_a_dense_grid() {
        let m = BivariateCorrelationModel::new(15).unwrap();
        for seed in 0..20u64 {
            let rho = -0.9 + 0.09 * seed as f64;
            let d: CorrelationData<f64> = m.sample_with(&rho, &mut Seed(seed).substream(&[]));
            let hat = m.mle(&d).unwrap();
            let top = m.log_likelihood(&d, &hat).unwrap();
            for k in 0..=4000 {
                let r = -0.9995 + 1.999 * k as f64 / 4000.0;
                assert!(m.log_likelihood(&d, &r).unwrap() <= top + 1e-9, "seed {seed} r {r}");
            }
        }
    }

    #[test]
    fn population_scaled_data_gives_sample_correlation() {
        // With S11 = S22 = n the score factors as n (r - rho)(1 + rho^2).
        let m = BivariateCorrelationModel::new(4).unwrap();
        let raw = [[1.0, 2.0], [2.0, 1.5], [3.0, 3.5], [4.0, 3.0]];
        let d = CorrelationData::<f64>::standardized(&raw).unwrap();
        let (s11, s12, s22) = d.sums();
        let scale = 4.0 / 3.0;
        let r = d.sample_correlation();
        let hat = m.mle_from_sums((s11 * scale, s12 * scale, s22 * scale));
        assert!((hat - r).abs() < 1e-9);
    }

    #[test]
    fn divergence_at_unit_correlation() {
        let m = BivariateCorrelationModel::new(2).unwrap();
        let d = CorrelationData::<f64>::from_pairs(vec![[1.0, 0.5], [-1.0, 0.2]]);
        assert!(matches!(m.log_likelihood(&d, &1.0), Err(Error::Divergent(_))));
        assert!(matches!(m.log_likelihood(&d, &1.5), Err(Error::OutsideParameterSpace { .. })));
        assert!(m.log_likelihood(&d, &(1.0 - 1e-9)).unwrap().is_finite());
        assert!(m.log_likelihood(&d, &(-1.0 + 1e-9)).unwrap().is_finite());
        assert!(BivariateCorrelationModel::new(1).is_err());
        assert!(Model::<f64>::check_data(&m, &CorrelationData::from_pairs(vec![[1.0, 0.5]])).is_err());
    }
}
