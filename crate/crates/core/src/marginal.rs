//! Marginal IMs for scalar features `φ = f(θ)` of a two-dimensional
//! parameter, by maximizing the joint contour over level sets.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{Model, TableCounts, TwoByTwoModel};
use crate::possibility::contour::{default_grid, DEFAULT_GRID_POINTS};
use crate::possibility::im::{golden_max, SUP_REFINE_ITERS};
use crate::possibility::{Contour, ImPair, Interval, LatticeContour, ScalarEval};
use crate::real::Real;

/// Points per level-set segment before refinement.
pub const DEFAULT_SUBGRID_POINTS: usize = 2001;

/// A scalar function of `θ = (θ0, θ1)`.
#[derive(Clone)]
pub enum Feature<T> {
    /// `θ0 - θ1`.
    Difference,
    /// `θ0 / θ1`.
    RelativeRisk,
    /// Any other map. Level sets are approximated by the lattice points
    /// with `|f(θ) - φ| ≤ band`.
    Custom {
        name: String,
        map: Arc<dyn Fn([T; 2]) -> T + Send + Sync>,
        range: Interval<T>,
        band: T,
    },
}

impl<T: Real> fmt::Debug for Feature<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Feature({})", self.name())
    }
}

impl<T: Real> Feature<T> {
    pub fn name(&self) -> &str {
        match self {
            Feature::Difference => "difference",
            Feature::RelativeRisk => "relative-risk",
            Feature::Custom { name, .. } => name,
        }
    }

    pub fn apply(&self, theta: [T; 2]) -> T {
        match self {
            Feature::Difference => theta[0] - theta[1],
            Feature::RelativeRisk => theta[0] / theta[1],
            Feature::Custom { map, .. } => map(theta),
        }
    }

    /// Values the feature can take on `[0,1]²` (with `θ1 > 0` for the ratio).
    pub fn range(&self) -> Interval<T> {
        match self {
            Feature::Difference => Interval::closed(-T::one(), T::one()),
            Feature::RelativeRisk => Interval::new(T::zero(), true, T::infinity(), false),
            Feature::Custom { range, .. } => *range,
        }
    }

    /// Level set `{θ : f(θ) = φ}` as `t ↦ θ(t)` over `t` values, or `None`
    /// when it is empty. Custom features have no parameterization.
    fn segment(&self, phi: T, points: usize) -> Option<Vec<[T; 2]>> {
        let points = points.max(2);
        match self {
            Feature::Difference => {
                let lo = T::zero().max(-phi);
                let hi = T::one().min(T::one() - phi);
                if phi.is_nan() || lo > hi {
                    return None;
                }
                Some((0..points).map(|k| {
                    let t = lo + (hi - lo) * T::count(k) / T::count(points - 1);
                    [t + phi, t]
                }).collect())
            }
            Feature::RelativeRisk => {
                if phi.is_nan() || phi < T::zero() || phi.is_infinite() {
                    return None;
                }
                let hi = T::one().min(T::one() / phi);
                // t = 0 is excluded since θ1 must be positive.
                Some((1..=points).map(|k| {
                    let t = hi * T::count(k) / T::count(points);
                    [phi * t, t]
                }).collect())
            }
            Feature::Custom { .. } => None,
        }
    }
}

/// `π_y(φ)`, flagged when the level set is empty (the value is then 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalValue<T> {
    pub value: T,
    pub level_set_empty: bool,
}

pub fn marginal_contour<T: Real>(im: &ImPair<T>, feature: &Feature<T>, phi: T) -> Result<MarginalValue<T>> {
    marginal_contour_with(im, feature, phi, DEFAULT_SUBGRID_POINTS)
}

pub fn marginal_contour_with<T: Real>(
    im: &ImPair<T>,
    feature: &Feature<T>,
    phi: T,
    subgrid: usize,
) -> Result<MarginalValue<T>> {
    let c = im
        .lattice()
        .ok_or_else(|| Error::ShapeMismatch("marginalization needs a two-dimensional contour".into()))?;
    let out = match feature {
        Feature::Custom { map, band, .. } => band_max(c, map.as_ref(), phi, *band),
        _ => segment_max(c, feature, phi, subgrid),
    };
    if out.level_set_empty {
        log::warn!("empty level set for {} at {phi}", feature.name());
    }
    Ok(out)
}

fn clean<T: Real>(v: T) -> T {
    if v.is_nan() { T::zero() } else { v.unit_clamp() }
}

fn segment_max<T: Real>(c: &LatticeContour<T>, feature: &Feature<T>, phi: T, subgrid: usize) -> MarginalValue<T> {
    let Some(points) = feature.segment(phi, subgrid) else {
        return MarginalValue { value: T::zero(), level_set_empty: true };
    };
    let values: Vec<T> = points.iter().map(|&p| clean(c.eval(p))).collect();
    let (k, mut best) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, T::zero()), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    if let Some(f) = c.exact() {
        // Refine along the straight segment between the neighbours of the best point.
        let a = points[k.saturating_sub(1)];
        let b = points[(k + 1).min(points.len() - 1)];
        if a != b {
            let g = |s: T| clean(f([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]));
            best = best.max(golden_max(&g, T::zero(), T::one(), SUP_REFINE_ITERS));
        }
    }
    MarginalValue { value: best, level_set_empty: false }
}

fn band_max<T: Real>(c: &LatticeContour<T>, map: &(dyn Fn([T; 2]) -> T + Send + Sync), phi: T, band: T) -> MarginalValue<T> {
    let (nx, ny) = c.shape();
    let mut best: Option<T> = None;
    for i in 0..nx {
        for j in 0..ny {
            if (map([c.x()[i], c.y()[j]]) - phi).abs() <= band {
                let v = c.value(i, j);
                best = Some(best.map_or(v, |b: T| b.max(v)));
            }
        }
    }
    match best {
        Some(value) => MarginalValue { value, level_set_empty: false },
        None => MarginalValue { value: T::zero(), level_set_empty: true },
    }
}

/// `φ` grid over `f(θ̂) ± 6·se` (delta method), clipped to the feature range.
pub fn default_phi_grid<T: Real>(
    model: &TwoByTwoModel<T>,
    data: &TableCounts,
    feature: &Feature<T>,
    points: usize,
) -> Result<Vec<T>> {
    let mle = model.mle(data)?;
    let se = model.standard_error(data, &mle);
    let phi = feature.apply(mle);
    let spread = match feature {
        Feature::Difference => (se[0] * se[0] + se[1] * se[1]).sqrt(),
        Feature::RelativeRisk => {
            let (a, b) = (se[0] / mle[0].max(se[0]), se[1] / mle[1].max(se[1]));
            phi.abs().max(T::lit(0.1)) * (a * a + b * b).sqrt()
        }
        Feature::Custom { band, .. } => band.max(T::lit(0.1)),
    };
    let range = feature.range();
    let center = if phi.is_finite() { phi } else { T::one() };
    Ok(default_grid(&range, center, spread, points))
}

/// Marginal IM for `feature` on a `φ` grid. The contour keeps an evaluator,
/// so set queries anywhere in the feature range stay resolvable.
pub fn marginal_im<T: Real>(im: &ImPair<T>, feature: &Feature<T>, phi_grid: Vec<T>) -> Result<ImPair<T>> {
    marginal_im_with(im, feature, phi_grid, DEFAULT_SUBGRID_POINTS)
}

pub fn marginal_im_with<T: Real>(
    im: &ImPair<T>,
    feature: &Feature<T>,
    phi_grid: Vec<T>,
    subgrid: usize,
) -> Result<ImPair<T>> {
    let c = im
        .lattice()
        .ok_or_else(|| Error::ShapeMismatch("marginalization needs a two-dimensional contour".into()))?;
    let phi_hat = feature.apply(c.mle());
    let space = feature.range();
    let anchor = if space.contains(phi_hat) { phi_hat } else { phi_grid[phi_grid.len() / 2] };
    let (joint, feat) = (im.clone(), feature.clone());
    let f: ScalarEval<T> = Arc::new(move |phi| {
        marginal_contour_with(&joint, &feat, phi, subgrid)
            .map(|m| m.value)
            .unwrap_or_else(|_| T::nan())
    });
    let mut phi_grid = phi_grid;
    crate::possibility::contour::insert_point(&mut phi_grid, anchor);
    let values = phi_grid.par_iter().map(|&p| clean(f(p))).collect::<Vec<T>>();
    let mut values = values;
    // The joint maximum is only attained up to refinement error.
    if let Ok(k) = phi_grid.binary_search_by(|g| g.partial_cmp(&anchor).unwrap()) {
        if values[k] > T::one() - T::lit(1e-6) {
            values[k] = T::one();
        }
    }
    Contour::new(phi_grid, values, anchor, space, Some(f)).map(Into::into)
}

/// `phi,pi` rows of a marginal contour.
pub fn write_marginal_csv<T: Real, W: Write>(contour: &Contour<T>, w: W) -> std::io::Result<()> {
    contour.write_csv(w)
}

/// Grid-resolution one-sided measures: for each grid point, the sup of the
/// contour over grid points at or below it and at or above it.
pub fn one_sided_sups<T: Real>(contour: &Contour<T>) -> (Vec<T>, Vec<T>) {
    let v = contour.values();
    let mut below = Vec::with_capacity(v.len());
    let mut acc = T::zero();
    for &x in v {
        acc = acc.max(x);
        below.push(acc);
    }
    let mut above = vec![T::zero(); v.len()];
    acc = T::zero();
    for (k, &x) in v.iter().enumerate().rev() {
        acc = acc.max(x);
        above[k] = acc;
    }
    (below, above)
}

/// `phi,necessity,possibility` with necessity of `{Φ > φ}` and possibility
/// of `{Φ ≤ φ}`, evaluated at grid resolution.
pub fn write_marginal_pair_csv<T: Real, W: Write>(im: &ImPair<T>, mut w: W) -> Result<()> {
    let c = im.scalar().ok_or_else(|| Error::ShapeMismatch("expected a scalar contour".into()))?;
    let (below, _) = one_sided_sups(c);
    writeln!(w, "phi,necessity,possibility")?;
    for (g, b) in c.grid().iter().zip(below) {
        writeln!(w, "{g},{},{b}", T::one() - b)?;
    }
    Ok(())
}

/// Grid size used when a caller does not pass one.
pub const DEFAULT_PHI_POINTS: usize = DEFAULT_GRID_POINTS;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::{build_im_with, CalibrationConfig, GridConfig};

    fn joint(points: usize) -> ImPair<f64> {
        let data = TableCounts::new(11, 14, 17, 8);
        let model = TwoByTwoModel::for_table(&data).unwrap();
        build_im_with(&model, &data, &CalibrationConfig::default(), &GridConfig { points: 2001, lattice_points: points }).unwrap()
    }

    #[test]
    fn peak_at_feature_of_mle() {
        let im = joint(41);
        let d = marginal_contour_with(&im, &Feature::Difference, 0.24, 201).unwrap();
        assert!((d.value - 1.0).abs() < 1e-9, "{d:?}");
        let rr = marginal_contour_with(&im, &Feature::RelativeRisk, 1.75, 201).unwrap();
        assert!((rr.value - 1.0).abs() < 1e-9, "{rr:?}");
    }

    #[test]
    fn empty_level_sets() {
        let im = joint(21);
        let d = marginal_contour_with(&im, &Feature::Difference, 1.5, 101).unwrap();
        assert!(d.level_set_empty && d.value == 0.0);
        let rr = marginal_contour_with(&im, &Feature::RelativeRisk, -0.1, 101).unwrap();
        assert!(rr.level_set_empty);
    }

    #[test]
    fn scalar_input_rejected() {
        let m = crate::models::NormalMeanModel::new(1.0).unwrap();
        let im = crate::likelihood::build_im(&m, &crate::models::NormalData { ybar: 0.0 }, &CalibrationConfig::default()).unwrap();
        assert!(matches!(marginal_contour(&im, &Feature::Difference, 0.0), Err(Error::ShapeMismatch(_))));
    }
}
