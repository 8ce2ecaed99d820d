use rand::Rng;

use crate::error::{Error, Result};
use crate::models::{bernoulli_count, Model, ModelSpec};
use crate::possibility::Interval;
use crate::real::Real;
use crate::special::LnFactorials;

/// Two independent binomial rows with fixed totals; `Θ = (Θ₀, Θ₁)` are the
/// row-wise probabilities of `W = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoByTwoModel<T> {
    row_totals: [u64; 2],
    ln_fact: LnFactorials<T>,
}

/// Cell counts in row-major order `(y00, y01, y10, y11)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TableCounts {
    pub cells: [u64; 4],
}

impl TableCounts {
    pub fn new(y00: u64, y01: u64, y10: u64, y11: u64) -> Self {
        Self { cells: [y00, y01, y10, y11] }
    }

    pub fn row_totals(&self) -> [u64; 2] {
        [self.cells[0] + self.cells[1], self.cells[2] + self.cells[3]]
    }

    /// Successes (`W = 1`) per row.
    pub fn successes(&self) -> [u64; 2] {
        [self.cells[1], self.cells[3]]
    }
}

impl<T: Real> TwoByTwoModel<T> {
    pub fn new(row_totals: [u64; 2]) -> Result<Self> {
        if row_totals.contains(&0) {
            return Err(Error::Config("both row totals must be at least 1".into()));
        }
        let max = row_totals[0].max(row_totals[1]) as usize;
        Ok(Self {
            row_totals,
            ln_fact: LnFactorials::new(max),
        })
    }

    /// Model whose row totals match the observed table.
    pub fn for_table(t: &TableCounts) -> Result<Self> {
        Self::new(t.row_totals())
    }

    pub fn row_totals(&self) -> [u64; 2] {
        self.row_totals
    }

    /// `ln P(Y_r = k)` for row `r`.
    pub fn row_log_pmf(&self, row: usize, k: u64, theta: T) -> T {
        let n = self.row_totals[row];
        self.ln_fact.ln_choose(n as usize, k as usize)
            + T::xlny(T::count(k as usize), theta)
            + T::xlny(T::count((n - k) as usize), T::one() - theta)
    }

    /// Row-wise log relative likelihood.
    pub fn row_log_relative(&self, row: usize, k: u64, theta: T) -> T {
        let n = self.row_totals[row];
        let a = T::count(k as usize);
        let b = T::count((n - k) as usize);
        let hat = a / T::count(n as usize);
        let at = T::xlny(a, theta) + T::xlny(b, T::one() - theta);
        let top = T::xlny(a, hat) + T::xlny(b, T::one() - hat);
        (at - top).min(T::zero())
    }
}

impl<T: Real> Model<T> for TwoByTwoModel<T> {
    type Param = [T; 2];
    type Data = TableCounts;

    fn name(&self) -> &'static str {
        "table"
    }

    fn spec(&self) -> ModelSpec<T> {
        let unit = Interval::closed(T::zero(), T::one());
        ModelSpec {
            parameter_space: vec![unit, unit],
            data_shape: "cell counts y00,y01,y10,y11 with fixed row totals",
        }
    }

    fn check_data(&self, data: &TableCounts) -> Result<()> {
        if data.row_totals() != self.row_totals {
            return Err(Error::InvalidData(format!(
                "row totals {:?} do not match model totals {:?}",
                data.row_totals(),
                self.row_totals
            )));
        }
        Ok(())
    }

    fn log_likelihood(&self, data: &TableCounts, theta: &[T; 2]) -> Result<T> {
        self.check_param(theta)?;
        self.check_data(data)?;
        let s = data.successes();
        Ok(self.row_log_pmf(0, s[0], theta[0]) + self.row_log_pmf(1, s[1], theta[1]))
    }

    fn mle(&self, data: &TableCounts) -> Result<[T; 2]> {
        self.check_data(data)?;
        let s = data.successes();
        Ok([
            T::count(s[0] as usize) / T::count(self.row_totals[0] as usize),
            T::count(s[1] as usize) / T::count(self.row_totals[1] as usize),
        ])
    }

    fn sample_with<R: Rng + ?Sized>(&self, theta: &[T; 2], rng: &mut R) -> TableCounts {
        let [n0, n1] = self.row_totals;
        let k0 = bernoulli_count(n0, theta[0], rng);
        let k1 = bernoulli_count(n1, theta[1], rng);
        TableCounts::new(n0 - k0, k0, n1 - k1, k1)
    }

    fn standard_error(&self, _data: &TableCounts, mle: &[T; 2]) -> [T; 2] {
        let se = |p: T, n: u64| {
            let n = T::count(n as usize);
            (p * (T::one() - p) / n).sqrt().max(T::one() / n)
        };
        [se(mle[0], self.row_totals[0]), se(mle[1], self.row_totals[1])]
    }

    fn data_key(&self, data: &TableCounts) -> Option<u64> {
        let s = data.successes();
        Some(s[0] * (self.row_totals[1] + 1) + s[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clinical() -> (TwoByTwoModel<f64>, TableCounts) {
        let t = TableCounts::new(11, 14, 17, 8);
        (TwoByTwoModel::for_table(&t).unwrap(), t)
    }

    #[test]
    fn mle_is_row_proportions() {
        let (m, t) = clinical();
        assert_eq!(m.mle(&t).unwrap(), [14.0 / 25.0, 8.0 / 25.0]);
    }

    #[test]
    fn mle_is_dense_grid_argmax() {
        let (m, t) = clinical();
        let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
        for i in 0..=200 {
            for j in 0..=200 {
                let p = [i as f64 / 200.0, j as f64 / 200.0];
                let v = m.log_likelihood(&t, &p).unwrap();
                if v > best.0 {
                    best = (v, p);
                }
            }
        }
        assert_eq!(best.1, [0.56, 0.32]);
        let top = m.log_likelihood(&t, &m.mle(&t).unwrap()).unwrap();
        assert!(top >= best.0 - 1e-12);
    }

    #[test]
    fn inconsistent_totals_rejected() {
        let (m, _) = clinical();
        assert!(m.check_data(&TableCounts::new(10, 14, 17, 8)).is_err());
        assert!(TwoByTwoModel::<f64>::new([0, 3]).is_err());
        assert!(m.log_likelihood(&TableCounts::new(11, 14, 17, 8), &[0.5, 1.5]).is_err());
    }
}
