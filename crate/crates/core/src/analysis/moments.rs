use super::AnalysisError;
use crate::engines::GrowthTrace;

/// Neumaier-compensated running sum.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Streaming sums of `1/Y` and `1/Y^2`.
#[derive(Copy, Clone, Debug, Default)]
pub struct MomentAccumulator {
    mu: CompensatedSum,
    sigma_sq: CompensatedSum,
}

impl MomentAccumulator {
    #[inline]
    pub fn push(&mut self, y: u32) {
        let r = 1.0 / y as f64;
        self.mu.add(r);
        self.sigma_sq.add(r * r);
    }

    pub fn mu(&self) -> f64 {
        self.mu.value()
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq.value()
    }
}

/// Prefix sums `mu[j-1] = sum_{i<=j} 1/Y_i` and `sigma_sq[j-1] = sum_{i<=j} 1/Y_i^2`:
/// the mean and variance of `T(V_j)` given the reach order.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalMoments {
    pub mu: Vec<f64>,
    pub sigma_sq: Vec<f64>,
}

impl ConditionalMoments {
    pub fn from_y_counts(y_counts: &[u32]) -> Result<Self, AnalysisError> {
        if y_counts.is_empty() {
            return Err(AnalysisError::Empty);
        }
        let mut acc = MomentAccumulator::default();
        let mut mu = Vec::with_capacity(y_counts.len());
        let mut sigma_sq = Vec::with_capacity(y_counts.len());
        for (i, &y) in y_counts.iter().enumerate() {
            if y == 0 {
                return Err(AnalysisError::ZeroBoundary { index: i + 1 });
            }
            acc.push(y);
            mu.push(acc.mu());
            sigma_sq.push(acc.sigma_sq());
        }
        Ok(ConditionalMoments { mu, sigma_sq })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// `mu_n^2 / n <= sigma_n^2 <= mu_n` at every n, up to a relative slack.
    pub fn bounds_hold(&self, rel_tol: f64) -> bool {
        self.mu
            .iter()
            .zip(&self.sigma_sq)
            .enumerate()
            .all(|(i, (&m, &s))| {
                let n = (i + 1) as f64;
                m * m / n <= s * (1.0 + rel_tol) && s <= m * (1.0 + rel_tol)
            })
    }
}

pub fn conditional_moments(trace: &GrowthTrace) -> Result<ConditionalMoments, AnalysisError> {
    ConditionalMoments::from_y_counts(&trace.y_counts)
}

/// `sigma_n^2 / ln n` over the first `n` steps of a trace.
pub fn lemma1_ratio(trace: &GrowthTrace, n: usize) -> Result<f64, AnalysisError> {
    if n < 2 {
        return Err(AnalysisError::LogOfOne(n));
    }
    if n > trace.y_counts.len() {
        return Err(AnalysisError::OutOfRange {
            n,
            len: trace.y_counts.len(),
        });
    }
    let m = ConditionalMoments::from_y_counts(&trace.y_counts[..n])?;
    Ok(m.sigma_sq[n - 1] / (n as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trace_with(y: &[u32]) -> GrowthTrace {
        GrowthTrace {
            y_counts: y.to_vec(),
            ..Default::default()
        }
    }

    #[test]
    fn one_and_two_terms() {
        let m = conditional_moments(&trace_with(&[4])).unwrap();
        assert_eq!(m.mu, vec![0.25]);
        assert_eq!(m.sigma_sq, vec![0.0625]);
        let m = conditional_moments(&trace_with(&[4, 6])).unwrap();
        assert!((m.mu[1] - 5.0 / 12.0).abs() < 1e-15);
        assert!((m.sigma_sq[1] - 13.0 / 144.0).abs() < 1e-15);
    }

    #[test]
    fn corrupt_and_empty() {
        assert_eq!(
            conditional_moments(&trace_with(&[4, 0])),
            Err(AnalysisError::ZeroBoundary { index: 2 })
        );
        assert_eq!(
            conditional_moments(&trace_with(&[])),
            Err(AnalysisError::Empty)
        );
    }

    #[test]
    fn lemma1_small() {
        let r = lemma1_ratio(&trace_with(&[4, 6]), 2).unwrap();
        assert!((r - (1.0 / 16.0 + 1.0 / 36.0) / 2f64.ln()).abs() < 1e-15);
        assert!((r - 0.1302).abs() < 1e-4);
        assert_eq!(
            lemma1_ratio(&trace_with(&[4, 6]), 1),
            Err(AnalysisError::LogOfOne(1))
        );
        assert!(matches!(
            lemma1_ratio(&trace_with(&[4, 6]), 3),
            Err(AnalysisError::OutOfRange { .. })
        ));
    }

    #[test]
    fn compensated_beats_naive() {
        let n = 10_000_000;
        let c: CompensatedSum = std::iter::repeat_n(0.1, n).collect();
        assert!((c.value() - 1_000_000.0).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn moments_monotone_and_bounded(ys in proptest::collection::vec(1u32..5000, 1..400)) {
            let m = ConditionalMoments::from_y_counts(&ys).unwrap();
            prop_assert!(m.mu.windows(2).all(|w| w[1] > w[0]));
            prop_assert!(m.sigma_sq.windows(2).all(|w| w[1] > w[0]));
            prop_assert!(m.bounds_hold(1e-12));
            // prefix consistency: a shorter prefix reproduces the same values
            let half = ys.len().div_ceil(2);
            let h = ConditionalMoments::from_y_counts(&ys[..half]).unwrap();
            prop_assert_eq!(&h.mu[..], &m.mu[..half]);
        }
    }
}
