use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::AnalysisError;
use crate::engines::ClockDistribution;

/// Significance level of every distribution test in the crate.
pub const SIGNIFICANCE: f64 = 0.001;

/// Asymptotic Kolmogorov coefficient `c(alpha)` at `alpha = 0.001`.
pub const KS_COEFFICIENT_0001: f64 = 1.9495;

pub fn ks_critical_one_sample(n: usize) -> f64 {
    KS_COEFFICIENT_0001 / (n as f64).sqrt()
}

pub fn ks_critical_two_sample(m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    KS_COEFFICIENT_0001 * ((m + n) / (m * n)).sqrt()
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    /// Critical value at significance 0.001.
    pub critical: f64,
}

impl KsResult {
    pub fn passed(&self) -> bool {
        self.statistic < self.critical
    }
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> Result<KsResult, AnalysisError> {
    if xs.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let s = sorted(xs);
    let n = s.len() as f64;
    let statistic = s.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    });
    Ok(KsResult {
        statistic,
        critical: ks_critical_one_sample(s.len()),
    })
}

/// Two-sample KS statistic `sup |F_a - F_b|`, exact for the empirical
/// measures (ties handled).
pub fn ks_two_sample(a: &SampleSet, b: &SampleSet) -> Result<KsResult, AnalysisError> {
    ks_two_sample_values(&a.values, &b.values)
}

pub(crate) fn ks_two_sample_values(a: &[f64], b: &[f64]) -> Result<KsResult, AnalysisError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let (a, b) = (sorted(a), sorted(b));
    let (m, n) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < m && j < n {
        let v = if a[i].total_cmp(&b[j]).is_le() {
            a[i]
        } else {
            b[j]
        };
        while i < m && a[i] == v {
            i += 1;
        }
        while j < n && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / m as f64 - j as f64 / n as f64).abs());
    }
    Ok(KsResult {
        statistic: d,
        critical: ks_critical_two_sample(m, n),
    })
}

/// Upper `alpha` quantile of chi-square with `df` degrees of freedom.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("df > 0")
        .inverse_cdf(1.0 - alpha)
}

/// Goodness of fit of `counts` to `probs`; returns (statistic, critical).
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> Result<(f64, f64), AnalysisError> {
    if counts.len() != probs.len() || counts.len() < 2 {
        return Err(AnalysisError::Invalid(
            "counts and probabilities must align, >= 2 cells".into(),
        ));
    }
    let total: u64 = counts.iter().sum();
    let stat = counts
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    Ok((stat, chi_square_critical(counts.len() - 1, SIGNIFICANCE)))
}

/// Homogeneity of two count vectors over the same cells.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> Result<(f64, f64), AnalysisError> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(AnalysisError::Invalid(
            "count vectors must align, >= 2 cells".into(),
        ));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut stat = 0.0;
    let mut cells = 0;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        for (obs, row) in [(x as f64, na), (y as f64, nb)] {
            let e = row * col / (na + nb);
            stat += (obs - e).powi(2) / e;
        }
    }
    Ok((stat, chi_square_critical(cells.max(2) - 1, SIGNIFICANCE)))
}

/// Linear-interpolation quantile of sorted data, `p` in [0, 1].
pub fn quantile(sorted_values: &[f64], p: f64) -> f64 {
    let n = sorted_values.len();
    assert!(n > 0, "quantile of empty data");
    let h = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted_values[lo] + (h - lo as f64) * (sorted_values[hi] - sorted_values[lo])
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Unbiased (n - 1 divisor); 0 for a single value.
    pub variance: f64,
    pub median: f64,
    pub count: usize,
}

/// Passage-time samples at one lattice scale.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub n_label: u64,
    /// Clock law that produced the samples.
    pub clock: ClockDistribution,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, n_label: u64) -> Self {
        SampleSet {
            values,
            n_label,
            clock: ClockDistribution::Exponential,
        }
    }

    pub fn with_clock(mut self, clock: ClockDistribution) -> Self {
        self.clock = clock;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sorted_values(&self) -> Vec<f64> {
        sorted(&self.values)
    }

    pub fn mean(&self) -> f64 {
        let s: super::CompensatedSum = self.values.iter().copied().collect();
        s.value() / self.values.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        let s: super::CompensatedSum = self.values.iter().map(|x| (x - m).powi(2)).collect();
        s.value() / (n - 1) as f64
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.values.len() as f64).sqrt()
    }

    pub fn summary(&self) -> Result<Summary, AnalysisError> {
        if self.values.is_empty() {
            return Err(AnalysisError::Empty);
        }
        Ok(Summary {
            mean: self.mean(),
            variance: self.variance(),
            median: quantile(&self.sorted_values(), 0.5),
            count: self.values.len(),
        })
    }
}

/// Largest empirical mass of any closed interval `[a, a + window]`.
pub fn tightness_scan(samples: &SampleSet, window: f64) -> Result<f64, AnalysisError> {
    const MIN_SAMPLES: usize = 100;
    if samples.len() < MIN_SAMPLES {
        return Err(AnalysisError::TooFewSamples {
            need: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    if window.is_nan() || window < 0.0 {
        return Err(AnalysisError::BadWindow(window));
    }
    let s = samples.sorted_values();
    let mut best = 0usize;
    let mut hi = 0usize;
    for lo in 0..s.len() {
        if hi < lo {
            hi = lo;
        }
        while hi < s.len() && s[hi] - s[lo] <= window {
            hi += 1;
        }
        best = best.max(hi - lo);
    }
    Ok(best as f64 / s.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use proptest::prelude::*;

    fn exp_samples(seed: u64, n: usize) -> SampleSet {
        let mut r = derive_stream(seed, 0);
        SampleSet::new((0..n).map(|_| r.exp1()).collect(), 0)
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a = exp_samples(1, 500);
        assert_eq!(ks_two_sample(&a, &a).unwrap().statistic, 0.0);
        let shifted = SampleSet::new(a.values.iter().map(|x| x + 10.0).collect(), 0);
        assert_eq!(ks_two_sample(&a, &shifted).unwrap().statistic, 1.0);
        assert!(ks_two_sample(&a, &SampleSet::new(vec![], 0)).is_err());
    }

    #[test]
    fn ks_critical_constant() {
        assert!((KS_COEFFICIENT_0001 - (-(SIGNIFICANCE / 2.0).ln() / 2.0).sqrt()).abs() < 1e-4);
        assert!((ks_critical_two_sample(2000, 2000) - 1.9495 * (0.001f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ks_calibration() {
        let mut passes = 0;
        for t in 0..100 {
            let a = exp_samples(1000 + 2 * t, 10_000);
            let b = exp_samples(1001 + 2 * t, 10_000);
            passes += ks_two_sample(&a, &b).unwrap().passed() as u32;
        }
        assert!(passes >= 99, "{passes}/100");
    }

    #[test]
    fn ks_ties_brute_force() {
        // compare against direct evaluation of both ECDFs at every point
        let a = SampleSet::new(vec![1.0, 2.0, 2.0, 3.0, 5.0], 0);
        let b = SampleSet::new(vec![2.0, 2.0, 2.0, 4.0], 0);
        let ecdf =
            |xs: &[f64], t: f64| xs.iter().filter(|&&x| x <= t).count() as f64 / xs.len() as f64;
        let brute = a
            .values
            .iter()
            .chain(&b.values)
            .map(|&t| (ecdf(&a.values, t) - ecdf(&b.values, t)).abs())
            .fold(0.0, f64::max);
        assert_eq!(ks_two_sample(&a, &b).unwrap().statistic, brute);
    }

    #[test]
    fn chi_square_reference_quantiles() {
        assert!((chi_square_critical(3, 0.001) - 16.266).abs() < 1e-3);
        assert!((chi_square_critical(23, 0.001) - 49.728).abs() < 1e-3);
    }

    #[test]
    fn summary_values() {
        let s = SampleSet::new(vec![1.0, 2.0, 3.0, 4.0], 8);
        let sm = s.summary().unwrap();
        assert_eq!(sm.mean, 2.5);
        assert!((sm.variance - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(sm.median, 2.5);
        assert_eq!(sm.count, 4);
    }

    #[test]
    fn tightness_edges() {
        let s = exp_samples(3, 1000);
        assert_eq!(tightness_scan(&s, f64::INFINITY).unwrap(), 1.0);
        assert_eq!(tightness_scan(&s, 0.0).unwrap(), 1.0 / 1000.0);
        let mut tied = s.clone();
        tied.values[..5].fill(0.7);
        assert_eq!(tightness_scan(&tied, 0.0).unwrap(), 5.0 / 1000.0);
        assert!(matches!(
            tightness_scan(&s, -1.0),
            Err(AnalysisError::BadWindow(_))
        ));
        assert!(matches!(
            tightness_scan(&SampleSet::new(vec![1.0; 10], 0), 1.0),
            Err(AnalysisError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn tightness_brute_force() {
        let s = exp_samples(4, 300);
        for w in [0.01, 0.1, 0.5, 2.0] {
            let brute = s
                .values
                .iter()
                .map(|&a| s.values.iter().filter(|&&x| x >= a && x <= a + w).count())
                .max()
                .unwrap() as f64
                / 300.0;
            assert_eq!(tightness_scan(&s, w).unwrap(), brute);
        }
    }

    proptest! {
        #[test]
        fn ks_symmetric_and_rank_invariant(
            a in proptest::collection::vec(-1000i32..1000, 1..80),
            b in proptest::collection::vec(-1000i32..1000, 1..80),
        ) {
            let set = |v: &[i32], f: &dyn Fn(i32) -> f64| SampleSet::new(v.iter().map(|&k| f(k)).collect(), 0);
            let id = |k: i32| k as f64;
            let grow = |k: i32| (k as f64 / 100.0).exp();
            let d = ks_two_sample(&set(&a, &id), &set(&b, &id)).unwrap().statistic;
            prop_assert_eq!(d, ks_two_sample(&set(&b, &id), &set(&a, &id)).unwrap().statistic);
            prop_assert_eq!(d, ks_two_sample(&set(&a, &grow), &set(&b, &grow)).unwrap().statistic);
        }
    }
}
