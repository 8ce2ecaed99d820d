use std::fmt;

use crate::possibility::interval::{Interval, IntervalSet};
use crate::real::Real;

/// Boolean selection over a 2-D lattice, stored row-major with the first
/// coordinate as the slow index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeMask {
    pub nx: usize,
    pub ny: usize,
    bits: Vec<bool>,
}

impl LatticeMask {
    pub fn new(nx: usize, ny: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), nx * ny, "mask length must equal nx * ny");
        Self { nx, ny, bits }
    }

    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                bits.push(f(i, j));
            }
        }
        Self { nx, ny, bits }
    }

    pub fn full(nx: usize, ny: usize) -> Self {
        Self::new(nx, ny, vec![true; nx * ny])
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.ny + j]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn negate(&self) -> Self {
        Self::new(self.nx, self.ny, self.bits.iter().map(|b| !b).collect())
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// A subset of the parameter space.
#[derive(Debug, Clone, PartialEq)]
pub enum HypothesisSet<T> {
    /// Scalar parameter: a finite union of intervals.
    Intervals(IntervalSet<T>),
    /// Two-dimensional parameter: a selection of lattice points.
    Mask(LatticeMask),
}

impl<T: Real> HypothesisSet<T> {
    pub fn interval(i: Interval<T>) -> Self {
        Self::Intervals(i.into())
    }

    /// `{Θ ≤ θ}`
    pub fn at_most(theta: T) -> Self {
        Self::interval(Interval::at_most(theta))
    }

    /// `{Θ > θ}`
    pub fn greater_than(theta: T) -> Self {
        Self::interval(Interval::greater_than(theta))
    }

    pub fn as_intervals(&self) -> Option<&IntervalSet<T>> {
        match self {
            Self::Intervals(s) => Some(s),
            Self::Mask(_) => None,
        }
    }

    pub fn as_mask(&self) -> Option<&LatticeMask> {
        match self {
            Self::Mask(m) => Some(m),
            Self::Intervals(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Self::Intervals(s) => s.is_empty(),
            Self::Mask(m) => m.count() == 0,
        }
    }
}

impl<T: Real> From<IntervalSet<T>> for HypothesisSet<T> {
    fn from(s: IntervalSet<T>) -> Self {
        Self::Intervals(s)
    }
}

impl<T: Real> From<Interval<T>> for HypothesisSet<T> {
    fn from(i: Interval<T>) -> Self {
        Self::interval(i)
    }
}

impl<T: Real> From<LatticeMask> for HypothesisSet<T> {
    fn from(m: LatticeMask) -> Self {
        Self::Mask(m)
    }
}

impl<T: Real> fmt::Display for HypothesisSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Intervals(s) => write!(f, "{s}"),
            Self::Mask(m) => write!(f, "<mask {}x{}, {} points>", m.nx, m.ny, m.count()),
        }
    }
}
