//! Valid inferential models built from likelihoods.
//!
//! A model and observed data produce a possibility contour; the contour
//! induces a necessity–possibility pair over hypotheses, which can be
//! marginalized to derived features, compared against severity curves and
//! audited for validity by simulation.
//!
//! Everything numeric is generic over [`Real`]; the `*64` aliases below are
//! the usual entry points.

pub mod error;
pub mod likelihood;
pub mod marginal;
pub mod models;
pub mod possibility;
pub mod real;
pub mod rng;
pub mod severity;
pub mod special;
pub mod test_based;
pub mod validity;

pub use error::{Error, Result};
pub use likelihood::{
    build_im, build_im_with, contour_exact, contour_mc, relative_likelihood, CalibrationConfig, ExactCalibration,
    GridConfig, McEstimate, NullSample,
};
pub use models::{
    sample, BinomialData, BinomialModel, BivariateCorrelationModel, CorrelationData, Model, ModelSpec, NormalData,
    NormalMeanModel, ParamPoint, TableCounts, TwoByTwoModel,
};
pub use possibility::{
    complement, confidence_set, necessity, possibility, Contour, HypothesisSet, ImPair, Interval, IntervalSet,
    LatticeContour, LatticeMask,
};
pub use marginal::{marginal_contour, marginal_im, Feature, MarginalValue};
pub use real::Real;
pub use severity::{compare_probing, holistic_probe, severity_case1, severity_case2, Case, Probe, SeverityCurve};
pub use test_based::{
    construction_agreement_check, pval_left, pval_right, test_decision, test_im, Decision, Direction,
    OneSidedPValueFunction,
};
pub use validity::{
    audit_error_rates, audit_strong_validity, audit_uniform_validity, ProbingPolicy, ValidityCell, ValidityReport,
};
pub use rng::Seed;

pub type ImPair64 = ImPair<f64>;
pub type ImPair32 = ImPair<f32>;
pub type Contour64 = Contour<f64>;
pub type LatticeContour64 = LatticeContour<f64>;
pub type Interval64 = Interval<f64>;
pub type IntervalSet64 = IntervalSet<f64>;
pub type HypothesisSet64 = HypothesisSet<f64>;
pub type NormalMeanModel64 = NormalMeanModel<f64>;
pub type BinomialModel64 = BinomialModel<f64>;
pub type TwoByTwoModel64 = TwoByTwoModel<f64>;
pub type CorrelationData64 = CorrelationData<f64>;
pub type Feature64 = Feature<f64>;
pub type ValidityReport64 = ValidityReport<f64>;
