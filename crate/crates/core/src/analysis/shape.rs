use super::{AnalysisError, SampleSet};
use crate::engines::{ClockDistribution, GrowthTrace};
use crate::lattice::Vertex;

/// The unique `j` with `trace.vertices[j] == target`.
pub fn first_hit_index(trace: &GrowthTrace, target: Vertex) -> Result<usize, AnalysisError> {
    trace
        .vertices
        .iter()
        .position(|&v| v == target)
        .ok_or(AnalysisError::NotFound(target))
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TimeConstantEstimate {
    pub direction: (f64, f64),
    /// `mean(T) / n` at the largest scale.
    pub c1: f64,
    pub std_error: f64,
    pub scale: u64,
    /// Intercept and slope of the least-squares line `mean(T)/n = c + b/n`.
    pub extrapolated: f64,
    pub slope: f64,
}

/// Time constant from passage-time samples at three or more scales.
pub fn estimate_time_constant(
    samples: &[SampleSet],
    direction: (f64, f64),
) -> Result<TimeConstantEstimate, AnalysisError> {
    if samples.len() < 3 {
        return Err(AnalysisError::TooFewScales {
            need: 3,
            got: samples.len(),
        });
    }
    if let Some(s) = samples
        .iter()
        .find(|s| s.clock != ClockDistribution::Exponential)
    {
        return Err(AnalysisError::WrongModel(s.clock));
    }
    if let Some(s) = samples.iter().find(|s| s.len() < 2 || s.n_label == 0) {
        return Err(AnalysisError::Invalid(format!(
            "scale {} needs >= 2 samples and n > 0",
            s.n_label
        )));
    }
    let largest = samples.iter().max_by_key(|s| s.n_label).unwrap();
    let n = largest.n_label as f64;
    let points: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (1.0 / s.n_label as f64, s.mean() / s.n_label as f64))
        .collect();
    let (slope, intercept) = least_squares(&points);
    Ok(TimeConstantEstimate {
        direction,
        c1: largest.mean() / n,
        std_error: largest.std_error() / n,
        scale: largest.n_label,
        extrapolated: intercept,
        slope,
    })
}

/// Ordinary least squares `y = slope * x + intercept`.
pub(crate) fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GrowthConstantEstimate {
    /// Mean of `n / T(V_n)^2` over replicates at the largest `n`.
    pub c2: f64,
    pub std_error: f64,
    pub steps: u64,
    pub replicates: usize,
}

impl GrowthConstantEstimate {
    /// Lower end of the two-sided 99% normal interval.
    pub fn lower_99(&self) -> f64 {
        self.c2 - 2.5758 * self.std_error
    }
}

/// Growth constant from retained traces (their final step and time).
pub fn estimate_growth_constant(
    traces: &[GrowthTrace],
) -> Result<GrowthConstantEstimate, AnalysisError> {
    let endpoints: Vec<(u64, f64)> = traces
        .iter()
        .map(|t| {
            (
                t.steps() as u64,
                *t.times.last().expect("trace has a start time"),
            )
        })
        .collect();
    growth_constant_from_endpoints(&endpoints)
}

/// Growth constant from `(n, T(V_n))` pairs, using those at the largest `n`.
pub fn growth_constant_from_endpoints(
    endpoints: &[(u64, f64)],
) -> Result<GrowthConstantEstimate, AnalysisError> {
    let steps = endpoints
        .iter()
        .map(|e| e.0)
        .max()
        .ok_or(AnalysisError::Empty)?;
    if steps == 0 {
        return Err(AnalysisError::Invalid("traces have no steps".into()));
    }
    let values: Vec<f64> = endpoints
        .iter()
        .filter(|e| e.0 == steps)
        .map(|&(n, t)| n as f64 / (t * t))
        .collect();
    let set = SampleSet::new(values, steps);
    let std_error = if set.len() > 1 {
        set.std_error()
    } else {
        f64::INFINITY
    };
    Ok(GrowthConstantEstimate {
        c2: set.mean(),
        std_error,
        steps,
        replicates: set.len(),
    })
}
