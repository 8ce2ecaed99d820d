use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::possibility::interval::Interval;
use crate::real::Real;

/// Pointwise contour evaluator on a scalar parameter.
pub type ScalarEval<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
/// Pointwise contour evaluator on a two-dimensional parameter.
pub type PairEval<T> = Arc<dyn Fn([T; 2]) -> T + Send + Sync>;

/// Points per scalar dimension in default grids.
pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Half-width of unbounded default grids, in standard errors.
pub const GRID_HALF_WIDTH_SE: f64 = 6.0;
/// Inset applied to open bounded endpoints when gridding.
pub const OPEN_END_INSET: f64 = 1e-9;

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / T::count(n - 1);
            let mut v: Vec<T> = (0..n).map(|k| lo + step * T::count(k)).collect();
            v[n - 1] = hi;
            v
        }
    }
}

/// Inserts `x` into a strictly increasing grid, keeping it strictly increasing.
pub fn insert_point<T: Real>(grid: &mut Vec<T>, x: T) {
    match grid.binary_search_by(|g| g.partial_cmp(&x).expect("grid values are comparable")) {
        Ok(_) => {}
        Err(pos) => grid.insert(pos, x),
    }
}

/// Grid over `space`: the whole space where it is bounded, `center ± 6·se`
/// on any unbounded side. `center` is always a grid point.
pub fn default_grid<T: Real>(space: &Interval<T>, center: T, se: T, n: usize) -> Vec<T> {
    let inset = T::lit(OPEN_END_INSET);
    let half = T::lit(GRID_HALF_WIDTH_SE) * se;
    let lo = if space.lo.is_finite() {
        if space.lo_closed { space.lo } else { space.lo + inset }
    } else {
        center - half
    };
    let hi = if space.hi.is_finite() {
        if space.hi_closed { space.hi } else { space.hi - inset }
    } else {
        center + half
    };
    let mut g = linspace(lo, hi, n);
    if center.is_finite() {
        insert_point(&mut g, center.max(lo).min(hi));
    }
    g
}

fn check_increasing<T: Real>(grid: &[T], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{what} grid is empty")));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config(format!("{what} grid must be strictly increasing")));
    }
    Ok(())
}

fn check_values<T: Real>(values: &mut [T]) -> Result<()> {
    let slack = T::lit(1e-9);
    for v in values.iter_mut() {
        if v.is_nan() || *v < -slack || *v > T::one() + slack {
            return Err(Error::Config(format!("contour value {v} outside [0,1]")));
        }
        *v = v.unit_clamp();
    }
    Ok(())
}

/// Possibility contour of a scalar parameter tabulated on a grid.
#[derive(Clone)]
pub struct Contour<T> {
    grid: Vec<T>,
    values: Vec<T>,
    mle: T,
    space: Interval<T>,
    exact: Option<ScalarEval<T>>,
}

impl<T: Real> Contour<T> {
    /// `mle` must be a grid point. Values are validated to lie in `[0,1]`.
    pub fn new(grid: Vec<T>, mut values: Vec<T>, mle: T, space: Interval<T>, exact: Option<ScalarEval<T>>) -> Result<Self> {
        check_increasing(&grid, "contour")?;
        if grid.len() != values.len() {
            return Err(Error::Config("grid and values differ in length".into()));
        }
        check_values(&mut values)?;
        if grid.binary_search_by(|g| g.partial_cmp(&mle).unwrap()).is_err() {
            return Err(Error::Config(format!("mle {mle} is not a grid point")));
        }
        Ok(Self { grid, values, mle, space, exact })
    }

    /// Tabulates `exact` over `grid` (inserting `mle`) and keeps it as the
    /// exact evaluator.
    pub fn from_exact(mut grid: Vec<T>, mle: T, space: Interval<T>, exact: ScalarEval<T>) -> Result<Self> {
        insert_point(&mut grid, mle);
        let values = grid.iter().map(|&t| exact(t)).collect();
        Self::new(grid, values, mle, space, Some(exact))
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn mle(&self) -> T {
        self.mle
    }

    pub fn space(&self) -> &Interval<T> {
        &self.space
    }

    pub fn exact(&self) -> Option<&ScalarEval<T>> {
        self.exact.as_ref()
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Exact value where available, otherwise the grid value when `theta`
    /// is a grid point.
    pub fn value_at(&self, theta: T) -> Option<T> {
        if let Some(f) = &self.exact {
            return Some(f(theta).unit_clamp());
        }
        self.grid
            .binary_search_by(|g| g.partial_cmp(&theta).unwrap())
            .ok()
            .map(|k| self.values[k])
    }

    /// Linear interpolation between grid points, zero outside the grid.
    pub fn interpolate(&self, theta: T) -> T {
        let g = &self.grid;
        if theta < g[0] || theta > g[g.len() - 1] || theta.is_nan() {
            return T::zero();
        }
        match g.binary_search_by(|x| x.partial_cmp(&theta).unwrap()) {
            Ok(k) => self.values[k],
            Err(k) => {
                let w = (theta - g[k - 1]) / (g[k] - g[k - 1]);
                self.values[k - 1] * (T::one() - w) + self.values[k] * w
            }
        }
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// Writes `theta,pi` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "theta,pi")?;
        for (t, v) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{t},{v}")?;
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for Contour<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Contour")
            .field("points", &self.grid.len())
            .field("mle", &self.mle)
            .field("space", &self.space)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

/// Possibility contour of a two-dimensional parameter on a product lattice.
/// Values are row-major: `values[i * ny + j]` is the contour at `(x[i], y[j])`.
#[derive(Clone)]
pub struct LatticeContour<T> {
    x: Vec<T>,
    y: Vec<T>,
    values: Vec<T>,
    mle: [T; 2],
    space: [Interval<T>; 2],
    exact: Option<PairEval<T>>,
}

impl<T: Real> LatticeContour<T> {
    pub fn new(
        x: Vec<T>,
        y: Vec<T>,
        mut values: Vec<T>,
        mle: [T; 2],
        space: [Interval<T>; 2],
        exact: Option<PairEval<T>>,
    ) -> Result<Self> {
        check_increasing(&x, "first-axis")?;
        check_increasing(&y, "second-axis")?;
        if values.len() != x.len() * y.len() {
            return Err(Error::Config("lattice values have the wrong length".into()));
        }
        check_values(&mut values)?;
        let on_x = x.binary_search_by(|g| g.partial_cmp(&mle[0]).unwrap()).is_ok();
        let on_y = y.binary_search_by(|g| g.partial_cmp(&mle[1]).unwrap()).is_ok();
        if !(on_x && on_y) {
            return Err(Error::Config("mle is not a lattice point".into()));
        }
        Ok(Self { x, y, values, mle, space, exact })
    }

    pub fn from_exact(mut x: Vec<T>, mut y: Vec<T>, mle: [T; 2], space: [Interval<T>; 2], exact: PairEval<T>) -> Result<Self> {
        insert_point(&mut x, mle[0]);
        insert_point(&mut y, mle[1]);
        let mut values = Vec::with_capacity(x.len() * y.len());
        for &a in &x {
            for &b in &y {
                values.push(exact([a, b]));
            }
        }
        Self::new(x, y, values, mle, space, Some(exact))
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[i * self.y.len() + j]
    }

    pub fn mle(&self) -> [T; 2] {
        self.mle
    }

    pub fn space(&self) -> &[Interval<T>; 2] {
        &self.space
    }

    pub fn exact(&self) -> Option<&PairEval<T>> {
        self.exact.as_ref()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.x.len(), self.y.len())
    }

    /// Bilinear interpolation, zero outside the lattice.
    pub fn interpolate(&self, p: [T; 2]) -> T {
        let locate = |g: &[T], v: T| -> Option<(usize, T)> {
            if v.is_nan() || v < g[0] || v > g[g.len() - 1] {
                return None;
            }
            if g.len() == 1 {
                return Some((0, T::zero()));
            }
            let k = match g.binary_search_by(|x| x.partial_cmp(&v).unwrap()) {
                Ok(k) => k.min(g.len() - 2),
                Err(k) => k - 1,
            };
            Some((k, (v - g[k]) / (g[k + 1] - g[k])))
        };
        let (Some((i, wx)), Some((j, wy))) = (locate(&self.x, p[0]), locate(&self.y, p[1])) else {
            return T::zero();
        };
        let (nx, ny) = self.shape();
        let at = |a: usize, b: usize| self.value(a.min(nx - 1), b.min(ny - 1));
        let one = T::one();
        at(i, j) * (one - wx) * (one - wy)
            + at(i + 1, j) * wx * (one - wy)
            + at(i, j + 1) * (one - wx) * wy
            + at(i + 1, j + 1) * wx * wy
    }

    /// Exact value where available, otherwise bilinear interpolation.
    pub fn eval(&self, p: [T; 2]) -> T {
        match &self.exact {
            Some(f) => f(p).unit_clamp(),
            None => self.interpolate(p),
        }
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// Writes `theta,theta2,pi` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "theta,theta2,pi")?;
        for (i, a) in self.x.iter().enumerate() {
            for (j, b) in self.y.iter().enumerate() {
                writeln!(w, "{a},{b},{}", self.value(i, j))?;
            }
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for LatticeContour<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeContour")
            .field("shape", &(self.x.len(), self.y.len()))
            .field("mle", &self.mle)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_inserts_center_and_respects_bounds() {
        let g = default_grid(&Interval::closed(0.0, 1.0), 0.37, 0.1, 11);
        assert_eq!(g.len(), 12);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(g.contains(&0.37));

        let g = default_grid(&Interval::<f64>::real_line(), 152.0, 1.0, 2001);
        assert_eq!(g.len(), 2001);
        assert_eq!(g[0], 146.0);
        assert_eq!(g[2000], 158.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));

        let g = default_grid(&Interval::open(-1.0, 1.0), 0.5, 0.1, 5);
        assert!(g[0] > -1.0 && *g.last().unwrap() < 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sp = Interval::closed(0.0f64, 1.0);
        assert!(Contour::new(vec![0.0, 0.0], vec![1.0, 1.0], 0.0, sp, None).is_err());
        assert!(Contour::new(vec![0.0, 1.0], vec![1.0, 1.5], 0.0, sp, None).is_err());
        assert!(Contour::new(vec![0.0, 1.0], vec![1.0, 0.5], 0.5, sp, None).is_err());
    }

    #[test]
    fn interpolation() {
        let sp = Interval::closed(0.0f64, 1.0);
        let c = Contour::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0], 0.5, sp, None).unwrap();
        assert!((c.interpolate(0.25) - 0.5).abs() < 1e-15);
        assert_eq!(c.interpolate(2.0), 0.0);
        let l = LatticeContour::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0, 0.0, 0.0], [0.0, 0.0], [sp, sp], None).unwrap();
        assert!((l.interpolate([0.5, 0.5]) - 0.25).abs() < 1e-15);
        assert_eq!(l.interpolate([1.0, 1.0]), 0.0);
    }
}
