use crate::error::{Error, Result};
use crate::possibility::contour::{Contour, LatticeContour, ScalarEval};
use crate::possibility::hypothesis::{HypothesisSet, LatticeMask};
use crate::possibility::interval::{Interval, IntervalSet};
use crate::real::Real;

/// Golden-section iterations used to refine a sup inside one interval.
pub const SUP_REFINE_ITERS: usize = 40;
const BISECT_ITERS: usize = 200;

/// Contour backing an [`ImPair`].
#[derive(Debug, Clone)]
pub enum ImContour<T> {
    Scalar(Contour<T>),
    Lattice(LatticeContour<T>),
}

/// Necessity–possibility pair generated by a contour. Necessity is always
/// computed through the complement, so duality holds by construction.
#[derive(Debug, Clone)]
pub struct ImPair<T> {
    contour: ImContour<T>,
}

impl<T: Real> From<Contour<T>> for ImPair<T> {
    fn from(c: Contour<T>) -> Self {
        Self { contour: ImContour::Scalar(c) }
    }
}

impl<T: Real> From<LatticeContour<T>> for ImPair<T> {
    fn from(c: LatticeContour<T>) -> Self {
        Self { contour: ImContour::Lattice(c) }
    }
}

impl<T: Real> ImPair<T> {
    pub fn contour(&self) -> &ImContour<T> {
        &self.contour
    }

    pub fn scalar(&self) -> Option<&Contour<T>> {
        match &self.contour {
            ImContour::Scalar(c) => Some(c),
            ImContour::Lattice(_) => None,
        }
    }

    pub fn lattice(&self) -> Option<&LatticeContour<T>> {
        match &self.contour {
            ImContour::Lattice(c) => Some(c),
            ImContour::Scalar(_) => None,
        }
    }

    /// The whole parameter space as a hypothesis.
    pub fn full_space(&self) -> HypothesisSet<T> {
        match &self.contour {
            ImContour::Scalar(c) => HypothesisSet::interval(*c.space()),
            ImContour::Lattice(c) => {
                let (nx, ny) = c.shape();
                HypothesisSet::Mask(LatticeMask::full(nx, ny))
            }
        }
    }

    /// Complement relative to the parameter space.
    pub fn complement(&self, h: &HypothesisSet<T>) -> Result<HypothesisSet<T>> {
        match (&self.contour, h) {
            (ImContour::Scalar(c), HypothesisSet::Intervals(s)) => Ok(s.complement_within(c.space()).into()),
            (ImContour::Lattice(c), HypothesisSet::Mask(m)) => {
                check_mask(c, m)?;
                Ok(HypothesisSet::Mask(m.negate()))
            }
            _ => Err(mismatch(h)),
        }
    }

    /// `sup_{θ ∈ H} π(θ)`, zero for the empty set.
    pub fn possibility(&self, h: &HypothesisSet<T>) -> Result<T> {
        match (&self.contour, h) {
            (ImContour::Scalar(c), HypothesisSet::Intervals(s)) => scalar_sup(c, s),
            (ImContour::Lattice(c), HypothesisSet::Mask(m)) => {
                check_mask(c, m)?;
                Ok(c.values()
                    .iter()
                    .zip(m.bits())
                    .filter(|(_, b)| **b)
                    .map(|(v, _)| *v)
                    .fold(T::zero(), T::max))
            }
            _ => Err(mismatch(h)),
        }
    }

    /// `1 - possibility(complement(H))`.
    pub fn necessity(&self, h: &HypothesisSet<T>) -> Result<T> {
        let c = self.complement(h)?;
        Ok(T::one() - self.possibility(&c)?)
    }

    /// Upper level set `{θ : π(θ) > α}`.
    pub fn confidence_set(&self, alpha: T) -> Result<HypothesisSet<T>> {
        if alpha.is_nan() || alpha < T::zero() || alpha > T::one() {
            return Err(Error::Config(format!("alpha {alpha} outside [0,1]")));
        }
        match &self.contour {
            ImContour::Scalar(c) => Ok(scalar_level_set(c, alpha).into()),
            ImContour::Lattice(c) => {
                let (nx, ny) = c.shape();
                Ok(HypothesisSet::Mask(LatticeMask::from_fn(nx, ny, |i, j| c.value(i, j) > alpha)))
            }
        }
    }

    /// `Π̄({Θ ≤ θ})` for a scalar IM.
    pub fn possibility_at_most(&self, theta: T) -> Result<T> {
        self.possibility(&HypothesisSet::at_most(theta))
    }

    /// `Π̄({Θ > θ})` for a scalar IM.
    pub fn possibility_greater(&self, theta: T) -> Result<T> {
        self.possibility(&HypothesisSet::greater_than(theta))
    }

    /// `Π̲({Θ ≤ θ})` for a scalar IM.
    pub fn necessity_at_most(&self, theta: T) -> Result<T> {
        self.necessity(&HypothesisSet::at_most(theta))
    }

    /// `Π̲({Θ > θ})` for a scalar IM.
    pub fn necessity_greater(&self, theta: T) -> Result<T> {
        self.necessity(&HypothesisSet::greater_than(theta))
    }
}

fn mismatch<T: Real>(h: &HypothesisSet<T>) -> Error {
    Error::ShapeMismatch(h.to_string())
}

fn check_mask<T: Real>(c: &LatticeContour<T>, m: &LatticeMask) -> Result<()> {
    if (m.nx, m.ny) != c.shape() {
        return Err(Error::ShapeMismatch(format!(
            "mask {}x{} against lattice {}x{}",
            m.nx,
            m.ny,
            c.shape().0,
            c.shape().1
        )));
    }
    Ok(())
}

/// Maximizes `f` on `[a, b]` by golden-section search; returns the best value seen.
pub fn golden_max<T: Real>(f: &dyn Fn(T) -> T, mut a: T, mut b: T, iters: usize) -> T {
    let ratio = T::lit(0.618_033_988_749_894_8);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = fc.max(fd);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
    }
    best
}

/// Range of grid indices lying in `part`.
fn grid_range<T: Real>(grid: &[T], part: &Interval<T>) -> (usize, usize) {
    let start = grid.partition_point(|&g| g < part.lo || (g == part.lo && !part.lo_closed));
    let end = grid.partition_point(|&g| g < part.hi || (g == part.hi && part.hi_closed));
    (start, end.max(start))
}

fn evaluate<T: Real>(f: &ScalarEval<T>, x: T) -> T {
    let v = f(x);
    if v.is_nan() { T::zero() } else { v.unit_clamp() }
}

fn scalar_sup<T: Real>(c: &Contour<T>, set: &IntervalSet<T>) -> Result<T> {
    let set = set.intersect_interval(c.space());
    let grid = c.grid();
    let values = c.values();
    let mut best = T::zero();
    for part in set.parts() {
        let (i0, i1) = grid_range(grid, part);
        let mut argmax = None;
        for k in i0..i1 {
            if argmax.is_none_or(|a: usize| values[k] > values[a]) {
                argmax = Some(k);
            }
        }
        if let Some(k) = argmax {
            best = best.max(values[k]);
        }
        let Some(f) = c.exact() else {
            if argmax.is_none() {
                return Err(Error::Unresolved(part.to_string()));
            }
            continue;
        };
        // Endpoints count inclusively; infinite ones by their limit.
        for e in [part.lo, part.hi] {
            best = best.max(evaluate(f, e));
        }
        let bracket = match argmax {
            Some(k) => {
                let a = if k > 0 { grid[k - 1].max(part.lo) } else { grid[k].max(part.lo) };
                let b = if k + 1 < grid.len() { grid[k + 1].min(part.hi) } else { grid[k].min(part.hi) };
                Some((a, b))
            }
            None if part.is_bounded() => Some((part.lo, part.hi)),
            None => None,
        };
        if let Some((a, b)) = bracket {
            if a < b {
                let g = |x: T| evaluate(f, x);
                best = best.max(golden_max(&g, a, b, SUP_REFINE_ITERS));
            }
        }
    }
    Ok(best.unit_clamp())
}

/// Returns the last point with `f ≤ alpha` when moving from `out` towards `inside`.
fn bisect_boundary<T: Real>(f: &ScalarEval<T>, alpha: T, mut out: T, mut inside: T) -> T {
    for _ in 0..BISECT_ITERS {
        let mid = out + (inside - out) / T::lit(2.0);
        if mid == out || mid == inside {
            break;
        }
        if evaluate(f, mid) > alpha {
            inside = mid;
        } else {
            out = mid;
        }
    }
    out
}

enum Side {
    Left,
    Right,
}

/// Endpoint of a level-set run that reaches the edge of the grid.
fn edge_boundary<T: Real>(c: &Contour<T>, alpha: T, side: Side) -> (T, bool) {
    let grid = c.grid();
    let space = c.space();
    let (edge_pt, bound, bound_closed, dir) = match side {
        Side::Left => (grid[0], space.lo, space.lo_closed, -T::one()),
        Side::Right => (grid[grid.len() - 1], space.hi, space.hi_closed, T::one()),
    };
    let Some(f) = c.exact() else {
        return (edge_pt, true);
    };
    if edge_pt == bound {
        return (edge_pt, true);
    }
    if evaluate(f, bound) > alpha {
        return (bound, bound_closed);
    }
    if bound.is_finite() {
        return (bisect_boundary(f, alpha, bound, edge_pt), false);
    }
    let span = (grid[grid.len() - 1] - grid[0]).max(T::one());
    let mut step = span;
    let mut inside = edge_pt;
    for _ in 0..64 {
        let probe = edge_pt + dir * step;
        if !probe.is_finite() {
            break;
        }
        if evaluate(f, probe) <= alpha {
            return (bisect_boundary(f, alpha, probe, inside), false);
        }
        inside = probe;
        step = step * T::lit(2.0);
    }
    (bound, false)
}

fn scalar_level_set<T: Real>(c: &Contour<T>, alpha: T) -> IntervalSet<T> {
    let grid = c.grid();
    let values = c.values();
    let n = grid.len();
    let mut parts = Vec::new();
    let mut k = 0;
    while k < n {
        if values[k] <= alpha {
            k += 1;
            continue;
        }
        let start = k;
        while k < n && values[k] > alpha {
            k += 1;
        }
        let end = k - 1;
        let (lo, lo_closed) = if start == 0 {
            edge_boundary(c, alpha, Side::Left)
        } else {
            match c.exact() {
                Some(f) => (bisect_boundary(f, alpha, grid[start - 1], grid[start]), false),
                None => (grid[start], true),
            }
        };
        let (hi, hi_closed) = if end == n - 1 {
            edge_boundary(c, alpha, Side::Right)
        } else {
            match c.exact() {
                Some(f) => (bisect_boundary(f, alpha, grid[end + 1], grid[end]), false),
                None => (grid[end], true),
            }
        };
        parts.push(Interval::new(lo, lo_closed, hi, hi_closed));
    }
    IntervalSet::from_intervals(parts)
}

/// `Π̄_y(H)`.
pub fn possibility<T: Real>(im: &ImPair<T>, h: &HypothesisSet<T>) -> Result<T> {
    im.possibility(h)
}

/// `Π̲_y(H) = 1 - Π̄_y(H^c)`.
pub fn necessity<T: Real>(im: &ImPair<T>, h: &HypothesisSet<T>) -> Result<T> {
    im.necessity(h)
}

/// Complement of `h` relative to the IM's parameter space.
pub fn complement<T: Real>(im: &ImPair<T>, h: &HypothesisSet<T>) -> Result<HypothesisSet<T>> {
    im.complement(h)
}

/// `C_α = {θ : π_y(θ) > α}`.
pub fn confidence_set<T: Real>(im: &ImPair<T>, alpha: T) -> Result<HypothesisSet<T>> {
    im.confidence_set(alpha)
}
