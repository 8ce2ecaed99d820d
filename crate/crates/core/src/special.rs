//! Normal-distribution special functions written against [`Real`] so they
//! work at any floating-point precision.

use crate::real::Real;

const SERIES_CUTOFF: f64 = 2.0;
const MAX_TERMS: usize = 500;

/// Complementary error function.
///
/// Power series for `erf` below the cutoff, continued fraction above it, so
/// the upper tail keeps full relative precision.
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::zero() {
        return T::lit(2.0) - erfc(-x);
    }
    if x.is_infinite() {
        return T::zero();
    }
    if x < T::lit(SERIES_CUTOFF) {
        T::one() - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// Error function.
pub fn erf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x.abs() < T::lit(SERIES_CUTOFF) {
        erf_series(x)
    } else {
        T::one() - erfc(x)
    }
}

// erf(x) = 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!, all terms positive.
fn erf_series<T: Real>(x: T) -> T {
    let two_x2 = T::lit(2.0) * x * x;
    let mut term = x;
    let mut sum = x;
    for n in 0..MAX_TERMS {
        term = term * two_x2 / T::count(2 * n + 3);
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    T::FRAC_2_SQRT_PI() * (-x * x).exp() * sum
}

// erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
// evaluated with the modified Lentz method.
fn erfc_continued_fraction<T: Real>(x: T) -> T {
    let tiny = T::min_positive_value().sqrt();
    let mut f = x;
    let mut c = f;
    let mut d = T::zero();
    for k in 1..MAX_TERMS {
        let a = T::count(k) * T::lit(0.5);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        d = d.recip();
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    (-x * x).exp() / (T::PI().sqrt() * f)
}

/// Standard normal distribution function.
pub fn norm_cdf<T: Real>(z: T) -> T {
    T::lit(0.5) * erfc(-z / T::SQRT_2())
}

/// Standard normal survival function `1 - norm_cdf(z)`, accurate in the upper tail.
pub fn norm_sf<T: Real>(z: T) -> T {
    T::lit(0.5) * erfc(z / T::SQRT_2())
}

/// Standard normal density.
pub fn norm_pdf<T: Real>(z: T) -> T {
    (-(z * z) / T::lit(2.0)).exp() / (T::lit(2.0) * T::PI()).sqrt()
}

/// Standard normal quantile. Rational initial guess refined by Halley steps
/// on [`norm_cdf`].
pub fn norm_quantile<T: Real>(p: T) -> T {
    if p.is_nan() || p < T::zero() || p > T::one() {
        return T::nan();
    }
    if p == T::zero() {
        return T::neg_infinity();
    }
    if p == T::one() {
        return T::infinity();
    }
    if p > T::lit(0.5) {
        // Work in the lower tail to avoid losing 1 - p.
        return -lower_quantile(T::one() - p);
    }
    lower_quantile(p)
}

fn lower_quantile<T: Real>(p: T) -> T {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let pf = p.to_f64_lossy();
    let guess = if pf < 0.02425 {
        let q = (-2.0 * pf.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = pf - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let mut x = T::lit(guess);
    for _ in 0..3 {
        let e = norm_cdf(x) - p;
        let u = e / norm_pdf(x);
        let step = u / (T::one() + x * u / T::lit(2.0));
        if !step.is_finite() {
            break;
        }
        x = x - step;
    }
    x
}

/// Table of `ln k!` for `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LnFactorials<T> {
    table: Vec<T>,
}

impl<T: Real> LnFactorials<T> {
    pub fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        let mut acc = 0.0f64;
        table.push(T::zero());
        for k in 1..=n {
            acc += (k as f64).ln();
            table.push(T::lit(acc));
        }
        Self { table }
    }

    #[inline]
    pub fn ln_factorial(&self, k: usize) -> T {
        self.table[k]
    }

    /// `ln C(n, k)`.
    #[inline]
    pub fn ln_choose(&self, n: usize, k: usize) -> T {
        self.table[n] - self.table[k] - self.table[n - k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn erfc_matches_reference_across_range() {
        let mut x = -6.0f64;
        while x <= 9.0 {
            let want = libm::erfc(x);
            let got = erfc(x);
            let tol = 1e-15f64.max(want.abs() * 1e-13);
            assert!((got - want).abs() <= tol, "x={x}: {got} vs {want}");
            x += 0.0137;
        }
    }

    #[test]
    fn erfc_limits() {
        assert_eq!(erfc(f64::INFINITY), 0.0);
        assert_eq!(erfc(f64::NEG_INFINITY), 2.0);
        assert_eq!(erfc(0.0f64), 1.0);
        assert!(erfc(f64::NAN).is_nan());
    }

    #[test]
    fn normal_cdf_and_quantile() {
        let n = Normal::standard();
        for &z in &[-8.0, -3.3, -1.0, 0.0, 0.4, 1.0, 2.0, 5.5] {
            let want = 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
            assert!((norm_cdf(z) - want).abs() <= 1e-14 * want, "z={z}");
        }
        for &p in &[1e-12, 1e-6, 0.01, 0.025, 0.3, 0.5, 0.8, 0.975, 0.999999] {
            let want = n.inverse_cdf(p);
            assert!((norm_quantile(p) - want).abs() < 1e-9 * want.abs().max(1.0), "p={p}");
        }
        assert_eq!(norm_quantile(0.0f64), f64::NEG_INFINITY);
        assert_eq!(norm_quantile(1.0f64), f64::INFINITY);
    }

    #[test]
    fn single_precision_is_usable() {
        let v: f32 = norm_cdf(1.0f32);
        assert!((v - 0.841_344_75).abs() < 1e-6);
    }

    #[test]
    fn ln_choose_small() {
        let t = LnFactorials::<f64>::new(20);
        assert!((t.ln_choose(20, 8) - 125_970f64.ln()).abs() < 1e-12);
        assert_eq!(t.ln_choose(20, 0), 0.0);
    }
}
