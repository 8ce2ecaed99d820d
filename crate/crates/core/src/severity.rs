//! Severity of one-sided tests and its relation to test-based and
//! likelihood-based necessity.

use std::io::Write;

use crate::error::{Error, Result};
use crate::possibility::{HypothesisSet, ImPair};
use crate::real::Real;
use crate::likelihood::{build_im, CalibrationConfig};
use crate::models::{NormalData, NormalMeanModel};
use crate::test_based::{pval_left, pval_right, test_im, Direction, OneSidedPValueFunction};

/// Which claim is being probed after a test of `H0: Θ ≤ θ0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    /// `H0` rejected; probe `Θ > θ`.
    Reject,
    /// `H0` not rejected; probe `Θ ≤ θ`.
    NotReject,
}

impl Case {
    pub fn label(self) -> &'static str {
        match self {
            Case::Reject => "case1",
            Case::NotReject => "case2",
        }
    }
}

/// `SEV(Θ > θ) = 1 - pval^≤_y(θ)`.
pub fn severity_case1<T: Real>(model: &NormalMeanModel<T>, ybar: T, theta: T) -> T {
    T::one() - pval_left(model, ybar, theta)
}

/// `SEV(Θ ≤ θ) = 1 - pval^≥_y(θ)`.
pub fn severity_case2<T: Real>(model: &NormalMeanModel<T>, ybar: T, theta: T) -> T {
    T::one() - pval_right(model, ybar, theta)
}

/// Severity over a `θ` grid for one case.
#[derive(Debug, Clone, PartialEq)]
pub struct SeverityCurve<T> {
    pub case: Case,
    pub theta0: T,
    pub grid: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> SeverityCurve<T> {
    pub fn new(model: &NormalMeanModel<T>, ybar: T, theta0: T, case: Case, grid: Vec<T>) -> Self {
        let values = grid
            .iter()
            .map(|&t| match case {
                Case::Reject => severity_case1(model, ybar, t),
                Case::NotReject => severity_case2(model, ybar, t),
            })
            .collect();
        Self { case, theta0, grid, values }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "theta,severity")?;
        for (t, v) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{t},{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow<T> {
    pub theta: T,
    pub severity: T,
    pub test_im_necessity: T,
    pub holistic_necessity: T,
}

/// Severity next to the necessity of the probed claim under the test-based
/// IM and under a likelihood-based IM.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbingComparison<T> {
    pub case: Case,
    pub theta0: T,
    pub alpha: T,
    pub rows: Vec<ProbeRow<T>>,
}

impl<T: Real> ProbingComparison<T> {
    /// Test-based necessity never exceeds severity.
    pub fn dominance_holds(&self) -> bool {
        self.rows.iter().all(|r| r.test_im_necessity <= r.severity)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "theta,severity,test_im_necessity,holistic_necessity,case")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.theta,
                r.severity,
                r.test_im_necessity,
                r.holistic_necessity,
                self.case.label()
            )?;
        }
        Ok(())
    }
}

/// Runs the test of `H0: Θ ≤ θ0` at level `alpha` and, depending on the
/// outcome, probes `Θ > θ` or `Θ ≤ θ` across `grid`, next to the
/// likelihood-based IM for the same data.
pub fn compare_probing<T: Real>(
    model: &NormalMeanModel<T>,
    ybar: T,
    theta0: T,
    alpha: T,
    grid: &[T],
) -> Result<ProbingComparison<T>> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Config(format!("alpha {alpha} outside (0,1)")));
    }
    let holistic = build_im(model, &NormalData { ybar }, &CalibrationConfig::default())?;
    let left = test_im(&OneSidedPValueFunction::normal(*model, ybar, Direction::Left))?;
    let case = if pval_left(model, ybar, theta0) <= alpha { Case::Reject } else { Case::NotReject };
    let rows = grid
        .iter()
        .map(|&theta| {
            let (severity, h) = match case {
                Case::Reject => (severity_case1(model, ybar, theta), HypothesisSet::greater_than(theta)),
                Case::NotReject => (severity_case2(model, ybar, theta), HypothesisSet::at_most(theta)),
            };
            Ok(ProbeRow {
                theta,
                severity,
                test_im_necessity: left.necessity(&h)?,
                holistic_necessity: holistic.necessity(&h)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbingComparison { case, theta0, alpha, rows })
}

/// Direction of the probed one-sided claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Probe {
    /// `Θ > θ`.
    Greater,
    /// `Θ ≤ θ`.
    AtMost,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbePoint<T> {
    pub theta: T,
    pub possibility: T,
    pub necessity: T,
}

/// Possibility and necessity of `{Θ > θ}` or `{Θ ≤ θ}` along `grid`.
pub fn holistic_probe<T: Real>(im: &ImPair<T>, probe: Probe, grid: &[T]) -> Result<Vec<ProbePoint<T>>> {
    grid.iter()
        .map(|&theta| {
            let h = match probe {
                Probe::Greater => HypothesisSet::greater_than(theta),
                Probe::AtMost => HypothesisSet::at_most(theta),
            };
            Ok(ProbePoint {
                theta,
                possibility: im.possibility(&h)?,
                necessity: im.necessity(&h)?,
            })
        })
        .collect()
}

pub fn write_probe_csv<T: Real, W: Write>(points: &[ProbePoint<T>], mut w: W) -> std::io::Result<()> {
    writeln!(w, "theta,possibility,necessity")?;
    for p in points {
        writeln!(w, "{},{},{}", p.theta, p.possibility, p.necessity)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::possibility::contour::linspace;

    #[test]
    fn case_selection_and_identities() {
        let m = NormalMeanModel::<f64>::new(1.0).unwrap();
        for (ybar, case) in [(152.0, Case::Reject), (151.0, Case::NotReject)] {
            let grid = linspace(148.0, 156.0, 81);
            let cmp = compare_probing(&m, ybar, 150.0, 0.05, &grid).unwrap();
            assert_eq!(cmp.case, case);
            assert!(cmp.dominance_holds());
            for r in &cmp.rows {
                match case {
                    Case::Reject => assert!((r.severity - r.test_im_necessity).abs() < 1e-12),
                    Case::NotReject => assert_eq!(r.test_im_necessity, 0.0),
                }
                assert!(r.holistic_necessity <= r.severity + 1e-12 || case == Case::NotReject);
            }
        }
    }

    #[test]
    fn severity_monotone() {
        let m = NormalMeanModel::new(1.0).unwrap();
        let g = linspace(145.0f64, 160.0, 301);
        let c1 = SeverityCurve::new(&m, 152.0, 150.0, Case::Reject, g.clone());
        assert!(c1.values.windows(2).all(|w| w[0] >= w[1]));
        let c2 = SeverityCurve::new(&m, 151.0, 150.0, Case::NotReject, g);
        assert!(c2.values.windows(2).all(|w| w[0] <= w[1]));
        assert!((severity_case1(&m, 152.0, 151.0) - 0.841_344_746_068_543).abs() < 1e-12);
    }
}
