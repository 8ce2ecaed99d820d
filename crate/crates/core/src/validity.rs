//! Simulation audits of the validity guarantees: strong validity of the
//! contour at the true parameter, the error rates of derived tests and
//! confidence sets, and uniform validity over probing policies.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::likelihood::{build_im_with, CalibrationConfig, ExactCalibration, GridConfig, NullSample};
use crate::likelihood::relative_likelihood;
use crate::models::{Model, ParamPoint};
use crate::possibility::{HypothesisSet, ImPair, Interval, IntervalSet};
use crate::real::Real;
use crate::rng::{domain, Seed};
use crate::test_based::{test_decision, Decision};

/// Smallest replicate count accepted for a report.
pub const MIN_REPLICATES: usize = 1000;
/// Null draws per true parameter for models without an exact contour.
pub const DEFAULT_NULL_SAMPLES: usize = 100_000;
/// Standard errors above nominal allowed before a cell fails.
pub const PASS_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditKind {
    Strong,
    ErrorRates,
    Uniform,
}

impl fmt::Display for AuditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuditKind::Strong => "strong validity",
            AuditKind::ErrorRates => "error rates",
            AuditKind::Uniform => "uniform validity",
        })
    }
}

/// One `(Θ, α)` cell of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityCell<T> {
    pub theta_index: usize,
    pub alpha: T,
    pub rate: T,
    /// `√(α(1-α)/N)`.
    pub se: T,
    pub pass: bool,
    /// Audit-specific counts and rates, reported in the summary.
    pub extras: Vec<(&'static str, T)>,
}

impl<T: Real> ValidityCell<T> {
    pub fn extra(&self, name: &str) -> Option<T> {
        self.extras.iter().find(|(n, _)| *n == name).map(|x| x.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport<T> {
    pub model: String,
    pub kind: AuditKind,
    pub thetas: Vec<Vec<T>>,
    pub replicates: usize,
    pub alphas: Vec<T>,
    pub cells: Vec<ValidityCell<T>>,
}

fn theta_label<T: Real>(theta: &[T]) -> String {
    theta.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

impl<T: Real> ValidityReport<T> {
    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| !c.pass).count()
    }

    /// `theta,alpha,rate,se,pass`; two-dimensional parameters are written
    /// as `a;b`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "theta,alpha,rate,se,pass")?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{},{},{}",
                theta_label(&self.thetas[c.theta_index]),
                c.alpha,
                c.rate,
                c.se,
                c.pass
            )?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} audit, {} model, N = {}: {}/{} cells pass\n",
            self.kind,
            self.model,
            self.replicates,
            self.cells.len() - self.failures(),
            self.cells.len()
        );
        for c in &self.cells {
            s.push_str(&format!(
                "  theta={} alpha={} rate={:.5} limit={:.5} {}",
                theta_label(&self.thetas[c.theta_index]),
                c.alpha,
                c.rate,
                threshold(c.alpha, self.replicates),
                if c.pass { "pass" } else { "FAIL" }
            ));
            for (name, v) in &c.extras {
                s.push_str(&format!(" {name}={v}"));
            }
            s.push('\n');
        }
        s
    }
}

fn binomial_se<T: Real>(alpha: T, n: usize) -> T {
    (alpha * (T::one() - alpha) / T::count(n)).sqrt()
}

/// `α + 3√(α(1-α)/N)`.
pub fn threshold<T: Real>(alpha: T, n: usize) -> T {
    alpha + T::lit(PASS_SIGMAS) * binomial_se(alpha, n)
}

fn check_inputs<T: Real, M: Model<T>>(model: &M, thetas: &[M::Param], n: usize, alphas: &[T]) -> Result<()> {
    if n < MIN_REPLICATES {
        return Err(Error::Config(format!("at least {MIN_REPLICATES} replicates are needed, got {n}")));
    }
    if thetas.is_empty() || alphas.is_empty() {
        return Err(Error::Config("empty parameter or alpha list".into()));
    }
    for a in alphas {
        if a.is_nan() || *a < T::zero() || *a >= T::one() {
            return Err(Error::Config(format!("alpha {a} outside [0,1)")));
        }
    }
    thetas.iter().try_for_each(|t| model.check_param(t))
}

fn replicate<T: Real, M: Model<T>>(model: &M, theta: &M::Param, seed: Seed, ti: usize, r: usize) -> M::Data {
    let mut rng = seed.substream(&[domain::REPLICATE, ti as u64, r as u64]);
    model.sample_with(theta, &mut rng)
}

/// Evaluates `π_y(Θ)` at a fixed true `Θ` for many datasets.
enum TruthContour<T> {
    Exact,
    Simulated(NullSample<T>),
}

impl<T: Real> TruthContour<T> {
    fn new<M: ExactCalibration<T>>(model: &M, theta: &M::Param, ti: usize, seed: Seed, null_samples: usize) -> Result<Self> {
        if model.supports_exact() {
            return Ok(TruthContour::Exact);
        }
        let cfg = CalibrationConfig::default().with_samples(null_samples).with_seed(seed);
        Ok(TruthContour::Simulated(NullSample::draw(model, theta, ti as u64, &cfg)?))
    }

    fn eval<M: ExactCalibration<T>>(&self, model: &M, data: &M::Data, theta: &M::Param) -> Result<T> {
        match self {
            TruthContour::Exact => model.contour_exact(data, theta),
            TruthContour::Simulated(null) => Ok(null.estimate(relative_likelihood(model, data, theta)?).estimate),
        }
    }
}

/// Applies `f` to every replicate, evaluating once per distinct dataset when
/// the model has a [`Model::data_key`].
fn per_replicate<T, M, V, F>(model: &M, theta: &M::Param, seed: Seed, ti: usize, n: usize, f: F) -> Result<Vec<V>>
where
    T: Real,
    M: Model<T>,
    V: Clone + Send + Sync,
    F: Fn(&M::Data) -> Result<V> + Send + Sync,
{
    let data: Vec<M::Data> = (0..n).into_par_iter().map(|r| replicate(model, theta, seed, ti, r)).collect();
    let keys: Vec<Option<u64>> = data.iter().map(|d| model.data_key(d)).collect();
    if keys.iter().all(Option::is_some) {
        let mut first: HashMap<u64, usize> = HashMap::new();
        for (r, k) in keys.iter().enumerate() {
            first.entry(k.unwrap()).or_insert(r);
        }
        let mut distinct: Vec<(u64, usize)> = first.into_iter().collect();
        distinct.sort_unstable();
        let computed = distinct
            .par_iter()
            .map(|&(k, r)| f(&data[r]).map(|v| (k, v)))
            .collect::<Result<HashMap<u64, V>>>()?;
        Ok(keys.iter().map(|k| computed[&k.unwrap()].clone()).collect())
    } else {
        data.par_iter().map(&f).collect()
    }
}

/// Frequency of `{π_Y(Θ) ≤ α}` over `n` datasets simulated at each `Θ`.
pub fn audit_strong_validity<T, M>(model: &M, thetas: &[M::Param], n: usize, alphas: &[T], seed: Seed) -> Result<ValidityReport<T>>
where
    T: Real,
    M: ExactCalibration<T>,
{
    audit_strong_validity_with(model, thetas, n, alphas, seed, DEFAULT_NULL_SAMPLES)
}

/// As [`audit_strong_validity`], with the number of null draws used when
/// the model has no exact contour. Each `Θ` shares one null sample across
/// its replicates.
pub fn audit_strong_validity_with<T, M>(
    model: &M,
    thetas: &[M::Param],
    n: usize,
    alphas: &[T],
    seed: Seed,
    null_samples: usize,
) -> Result<ValidityReport<T>>
where
    T: Real,
    M: ExactCalibration<T>,
{
    check_inputs(model, thetas, n, alphas)?;
    let mut cells = Vec::new();
    for (ti, theta) in thetas.iter().enumerate() {
        let truth = TruthContour::new(model, theta, ti, seed, null_samples)?;
        let pis = per_replicate(model, theta, seed, ti, n, |d| truth.eval(model, d, theta))?;
        for &alpha in alphas {
            let hits = pis.iter().filter(|&&p| p <= alpha).count();
            cells.push(rate_cell(ti, alpha, hits, n, Vec::new()));
        }
    }
    Ok(report(model, AuditKind::Strong, thetas, n, alphas, cells))
}

fn rate_cell<T: Real>(ti: usize, alpha: T, hits: usize, n: usize, extras: Vec<(&'static str, T)>) -> ValidityCell<T> {
    let rate = T::count(hits) / T::count(n);
    ValidityCell {
        theta_index: ti,
        alpha,
        rate,
        se: binomial_se(alpha, n),
        pass: rate <= threshold(alpha, n),
        extras,
    }
}

fn report<T: Real, M: Model<T>>(
    model: &M,
    kind: AuditKind,
    thetas: &[M::Param],
    n: usize,
    alphas: &[T],
    cells: Vec<ValidityCell<T>>,
) -> ValidityReport<T> {
    ValidityReport {
        model: model.name().to_string(),
        kind,
        thetas: thetas.iter().map(|t| t.coords()).collect(),
        replicates: n,
        alphas: alphas.to_vec(),
        cells,
    }
}

fn require_exact<T: Real, M: ExactCalibration<T>>(model: &M) -> Result<()> {
    if model.supports_exact() {
        Ok(())
    } else {
        Err(Error::Capability(format!(
            "{} model has no exact contour; set-level audits rebuild the IM per replicate",
            model.name()
        )))
    }
}

/// Type-I error of [`test_decision`] for the true hypothesis `(-∞, Θ]` (the
/// rate cell) and non-coverage of the `α` confidence set (`non_coverage`).
pub fn audit_error_rates<T, M>(
    model: &M,
    thetas: &[T],
    n: usize,
    alphas: &[T],
    seed: Seed,
    grid: &GridConfig,
) -> Result<ValidityReport<T>>
where
    T: Real,
    M: ExactCalibration<T, Param = T>,
{
    check_inputs(model, thetas, n, alphas)?;
    require_exact(model)?;
    let space = model.spec().parameter_space[0];
    let cfg = CalibrationConfig::default();
    let mut cells = Vec::new();
    for (ti, &theta) in thetas.iter().enumerate() {
        let h = HypothesisSet::from(IntervalSet::from_intervals([Interval::at_most(theta).intersect(&space)]));
        let flags = per_replicate(model, &theta, seed, ti, n, |d| {
            let im = build_im_with(model, d, &cfg, grid)?;
            alphas
                .iter()
                .map(|&a| {
                    let reject = test_decision(&im, &h, a)? == Decision::Reject;
                    let covered = im.confidence_set(a)?.as_intervals().is_some_and(|s| s.contains(theta));
                    Ok((reject, !covered))
                })
                .collect::<Result<Vec<(bool, bool)>>>()
        })?;
        for (ai, &alpha) in alphas.iter().enumerate() {
            let rejects = flags.iter().filter(|f| f[ai].0).count();
            let misses = flags.iter().filter(|f| f[ai].1).count();
            let miss_rate = T::count(misses) / T::count(n);
            let mut cell = rate_cell(ti, alpha, rejects, n, vec![("non_coverage", miss_rate)]);
            cell.pass = cell.pass && miss_rate <= threshold(alpha, n);
            cells.push(cell);
        }
    }
    Ok(report(model, AuditKind::ErrorRates, thetas, n, alphas, cells))
}

/// Built-in rules producing the hypotheses examined for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbingPolicy<T> {
    /// `{θ : π_y(θ) ≤ α}`, the complement of the `α` confidence set.
    LevelSetAdversary,
    /// Only the whole parameter space.
    FullSpace,
    /// The same hypotheses for every dataset.
    FixedFamily(Vec<IntervalSet<T>>),
    /// `count` intervals with uniform endpoints in `range`, drawn per replicate.
    RandomIntervals { count: usize, range: Interval<T> },
}

impl<T: Real> ProbingPolicy<T> {
    /// `H = (-∞, θ0]` together with `A_r = (θ0 + r·step, ∞)` for `r = 1..=count`.
    pub fn one_sided_family(theta0: T, step: T, count: usize) -> Self {
        let mut family = vec![IntervalSet::from_intervals([Interval::at_most(theta0)])];
        family.extend(
            (1..=count).map(|r| IntervalSet::from_intervals([Interval::greater_than(theta0 + step * T::count(r))])),
        );
        ProbingPolicy::FixedFamily(family)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProbingPolicy::LevelSetAdversary => "level-set-adversary",
            ProbingPolicy::FullSpace => "full-space",
            ProbingPolicy::FixedFamily(_) => "fixed-family",
            ProbingPolicy::RandomIntervals { .. } => "random-intervals",
        }
    }

    fn hypotheses<R: Rng>(&self, im: &ImPair<T>, alpha: T, space: &Interval<T>, rng: &mut R) -> Result<Vec<IntervalSet<T>>> {
        let sets = match self {
            ProbingPolicy::LevelSetAdversary => {
                let c = im.confidence_set(alpha)?;
                let c = c.as_intervals().expect("scalar contour");
                vec![c.complement_within(space)]
            }
            ProbingPolicy::FullSpace => vec![IntervalSet::from_intervals([*space])],
            ProbingPolicy::FixedFamily(family) => family.clone(),
            ProbingPolicy::RandomIntervals { count, range } => (0..*count)
                .map(|_| {
                    let u = |rng: &mut R| range.lo + (range.hi - range.lo) * T::lit(rng.random::<f64>());
                    let (a, b) = (u(rng), u(rng));
                    IntervalSet::from_intervals([Interval::closed(a.min(b), a.max(b))])
                })
                .collect(),
        };
        let whole = IntervalSet::from_intervals([*space]);
        for h in &sets {
            if !h.is_subset_of(&whole) {
                return Err(Error::Config(format!("policy {} produced {h} outside {space}", self.name())));
            }
        }
        Ok(sets)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct UniformFlags {
    misleading: bool,
    strong: bool,
    false_support: bool,
}

/// Frequency of a misleading assignment among the policy's hypotheses: a
/// true `H` with `Π̄(H) ≤ α` or a false `H` with `Π̲(H) ≥ 1-α`.
///
/// Cells also report `mismatches` (replicates where the misleading indicator
/// differs from `1{π_Y(Θ) ≤ α}`), `violations` (misleading while
/// `π_Y(Θ) > α`) and `false_support_rate`. A cell passes when the rate and
/// the false-support rate are below threshold and there are no violations;
/// under the level-set adversary, mismatches must also be zero.
pub fn audit_uniform_validity<T, M>(
    model: &M,
    thetas: &[T],
    n: usize,
    alphas: &[T],
    policy: &ProbingPolicy<T>,
    seed: Seed,
) -> Result<ValidityReport<T>>
where
    T: Real,
    M: ExactCalibration<T, Param = T>,
{
    audit_uniform_validity_with(model, thetas, n, alphas, policy, seed, &GridConfig::default())
}

pub fn audit_uniform_validity_with<T, M>(
    model: &M,
    thetas: &[T],
    n: usize,
    alphas: &[T],
    policy: &ProbingPolicy<T>,
    seed: Seed,
    grid: &GridConfig,
) -> Result<ValidityReport<T>>
where
    T: Real,
    M: ExactCalibration<T, Param = T>,
{
    check_inputs(model, thetas, n, alphas)?;
    require_exact(model)?;
    let space = model.spec().parameter_space[0];
    let cfg = CalibrationConfig::default();
    let random = matches!(policy, ProbingPolicy::RandomIntervals { .. });
    let mut cells = Vec::new();
    for (ti, &theta) in thetas.iter().enumerate() {
        let evaluate = |d: &M::Data, r: usize| -> Result<Vec<UniformFlags>> {
            let im = build_im_with(model, d, &cfg, grid)?;
            let pi = model.contour_exact(d, &theta)?;
            let mut rng = seed.substream(&[domain::POLICY, ti as u64, r as u64]);
            alphas
                .iter()
                .map(|&a| {
                    let mut flags = UniformFlags { strong: pi <= a, ..Default::default() };
                    for h in policy.hypotheses(&im, a, &space, &mut rng)? {
                        let hs = HypothesisSet::from(h.clone());
                        if h.contains(theta) {
                            flags.misleading |= im.possibility(&hs)? <= a;
                        } else if im.necessity(&hs)? >= T::one() - a {
                            flags.misleading = true;
                            flags.false_support = true;
                        }
                    }
                    Ok(flags)
                })
                .collect()
        };
        let flags: Vec<Vec<UniformFlags>> = if random {
            // Random hypotheses differ per replicate, so nothing is shared.
            (0..n)
                .into_par_iter()
                .map(|r| evaluate(&replicate(model, &theta, seed, ti, r), r))
                .collect::<Result<_>>()?
        } else {
            per_replicate(model, &theta, seed, ti, n, |d| evaluate(d, 0))?
        };
        for (ai, &alpha) in alphas.iter().enumerate() {
            let col = flags.iter().map(|f| f[ai]);
            let misleading = col.clone().filter(|f| f.misleading).count();
            let mismatches = col.clone().filter(|f| f.misleading != f.strong).count();
            let violations = col.clone().filter(|f| f.misleading && !f.strong).count();
            let false_support = col.filter(|f| f.false_support).count();
            let fs_rate = T::count(false_support) / T::count(n);
            let mut cell = rate_cell(
                ti,
                alpha,
                misleading,
                n,
                vec![
                    ("mismatches", T::count(mismatches)),
                    ("violations", T::count(violations)),
                    ("false_support_rate", fs_rate),
                ],
            );
            cell.pass = cell.pass
                && fs_rate <= threshold(alpha, n)
                && violations == 0
                && (mismatches == 0 || !matches!(policy, ProbingPolicy::LevelSetAdversary));
            cells.push(cell);
        }
    }
    Ok(report(model, AuditKind::Uniform, thetas, n, alphas, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BinomialModel, NormalMeanModel};

    #[test]
    fn rejects_small_replicate_counts_and_bad_alpha() {
        let m = NormalMeanModel::<f64>::new(1.0).unwrap();
        assert!(audit_strong_validity(&m, &[0.0], 10, &[0.05], Seed(0)).is_err());
        assert!(audit_strong_validity(&m, &[0.0], 1000, &[1.5], Seed(0)).is_err());
        let b = BinomialModel::<f64>::new(20).unwrap();
        assert!(audit_strong_validity(&b, &[1.5], 1000, &[0.05], Seed(0)).is_err());
    }

    #[test]
    fn alpha_zero_never_hit() {
        let m = NormalMeanModel::<f64>::new(1.0).unwrap();
        let r = audit_strong_validity(&m, &[150.0], 1000, &[0.0, 0.1], Seed(3)).unwrap();
        assert_eq!(r.cells[0].rate, 0.0);
        assert!(r.all_pass(), "{}", r.summary());
    }

    #[test]
    fn full_space_policy_never_misleads() {
        let m = BinomialModel::<f64>::new(20).unwrap();
        let r = audit_uniform_validity(&m, &[0.3], 1000, &[0.05, 0.25], &ProbingPolicy::FullSpace, Seed(1)).unwrap();
        assert!(r.cells.iter().all(|c| c.rate == 0.0));
    }

    #[test]
    fn report_csv_layout() {
        let m = NormalMeanModel::<f64>::new(1.0).unwrap();
        let r = audit_strong_validity(&m, &[0.0], 1000, &[0.05], Seed(0)).unwrap();
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("theta,alpha,rate,se,pass"));
        assert!(lines.next().unwrap().starts_with("0,0.05,"));
    }
}
