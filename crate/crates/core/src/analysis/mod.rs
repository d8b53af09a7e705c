//! Statistics derived from growth runs: conditional moments, the
//! square-sum inequality for sequences with growing partial sums, shape
//! constants, scaling fits and distribution tests.

mod clt;
mod fit;
mod lemma2;
mod moments;
mod shape;
mod stats;

pub use clt::clt_conditional_check;
pub use fit::{bootstrap_log_law_slope, fit_scaling, ScalingFit, ScalingModel};
pub use lemma2::{
    lemma2_check, min_growth_ratio, q_sequence, q_square_prefix_check, q_value,
    rearrange_decreasing, summation_by_parts, Lemma2Report,
};
pub use moments::{
    conditional_moments, lemma1_ratio, CompensatedSum, ConditionalMoments, MomentAccumulator,
};
pub use shape::{
    estimate_growth_constant, estimate_time_constant, first_hit_index,
    growth_constant_from_endpoints, GrowthConstantEstimate, TimeConstantEstimate,
};
pub use stats::{
    chi_square_critical, chi_square_gof, chi_square_homogeneity, ks_critical_one_sample,
    ks_critical_two_sample, ks_one_sample, ks_two_sample, quantile, tightness_scan, KsResult,
    SampleSet, Summary, KS_COEFFICIENT_0001, SIGNIFICANCE,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("empty input")]
    Empty,
    #[error("corrupt trace: Y_{index} = 0")]
    ZeroBoundary { index: usize },
    #[error("index {n} out of range (trace has {len} steps)")]
    OutOfRange { n: usize, len: usize },
    #[error("need n >= 2 for a log ratio, got {0}")]
    LogOfOne(usize),
    #[error(
        "partial-sum constraint fails first at n = {n}: S_n = {partial_sum} < a*sqrt(n) = {bound}"
    )]
    ConstraintViolated {
        n: usize,
        partial_sum: f64,
        bound: f64,
    },
    #[error("target {0} not in trace")]
    NotFound(crate::lattice::Vertex),
    #[error("need at least {need} scales, got {got}")]
    TooFewScales { need: usize, got: usize },
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("window must be nonnegative, got {0}")]
    BadWindow(f64),
    #[error("non-positive statistic {0} under a power law")]
    NonPositive(f64),
    #[error("sample set is not from exponential passage times ({0} clocks)")]
    WrongModel(crate::engines::ClockDistribution),
    #[error("invalid argument: {0}")]
    Invalid(String),
}
