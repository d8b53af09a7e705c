use statrs::distribution::{ContinuousCDF, Normal};

use super::{ks_one_sample, AnalysisError, CompensatedSum, ConditionalMoments, KsResult};
use crate::rng::RngStream;

/// Shortest boundary sequence accepted by the conditional CLT check.
pub const MIN_CLT_LENGTH: usize = 1000;

/// Redraw `sum_j Exp(mean 1/Y_j)` on a fixed boundary sequence `replicates`
/// times, standardize by the conditional mean and variance, and KS-test the
/// result against the standard normal.
pub fn clt_conditional_check(
    y_counts: &[u32],
    replicates: usize,
    rng: &mut RngStream,
) -> Result<KsResult, AnalysisError> {
    if y_counts.len() < MIN_CLT_LENGTH {
        return Err(AnalysisError::TooFewSamples {
            need: MIN_CLT_LENGTH,
            got: y_counts.len(),
        });
    }
    if replicates == 0 {
        return Err(AnalysisError::Empty);
    }
    let moments = ConditionalMoments::from_y_counts(y_counts)?;
    let mu = *moments.mu.last().unwrap();
    let sigma = moments.sigma_sq.last().unwrap().sqrt();
    let rates: Vec<f64> = y_counts.iter().map(|&y| y as f64).collect();
    let z: Vec<f64> = (0..replicates)
        .map(|_| {
            let t: CompensatedSum = rates.iter().map(|&y| rng.exp1() / y).collect();
            (t.value() - mu) / sigma
        })
        .collect();
    let normal = Normal::standard();
    ks_one_sample(&z, |x| normal.cdf(x))
}
