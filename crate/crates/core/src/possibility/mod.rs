//! Possibility contours, hypothesis sets and the necessity–possibility calculus.

pub mod contour;
pub mod hypothesis;
pub mod im;
pub mod interval;

pub use contour::{default_grid, linspace, Contour, LatticeContour, PairEval, ScalarEval};
pub use hypothesis::{HypothesisSet, LatticeMask};
pub use im::{complement, confidence_set, necessity, possibility, ImContour, ImPair};
pub use interval::{Interval, IntervalSet};
