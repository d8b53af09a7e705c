//! Deterministic inequality for positive sequences whose partial sums grow
//! at least like `a * sqrt(n)`: then `sum x_j^2 >= a^2 sum q_j^2`, with
//! `q_j = sqrt(j) - sqrt(j - 1)` the extremal sequence.

use super::{AnalysisError, CompensatedSum};

/// Relative slack allowed when re-verifying `S_n >= a sqrt(n)`, so that the
/// extremal sequence `a * q` itself passes despite rounding.
pub const PRECONDITION_RTOL: f64 = 1e-12;

/// Relative slack on the margin for `holds`.
pub const MARGIN_RTOL: f64 = 1e-12;

/// `sqrt(j) - sqrt(j - 1)`, in the cancellation-free form.
#[inline]
pub fn q_value(j: usize) -> f64 {
    assert!(j >= 1, "q is indexed from 1");
    1.0 / ((j as f64).sqrt() + ((j - 1) as f64).sqrt())
}

pub fn q_sequence(n: usize) -> Vec<f64> {
    (1..=n).map(q_value).collect()
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Lemma2Report {
    /// `sum x^2 >= a^2 sum q^2` within `MARGIN_RTOL`.
    pub holds: bool,
    /// `sum x^2 - a^2 sum q^2`.
    pub margin: f64,
    pub sum_sq: f64,
    /// `a^2 sum_{j<=n} q_j^2`.
    pub q_bound: f64,
    /// The weaker `a^2 ln(n) / 4`.
    pub log_bound: f64,
}

pub fn lemma2_check(xs: &[f64], a: f64) -> Result<Lemma2Report, AnalysisError> {
    if xs.is_empty() {
        return Err(AnalysisError::Empty);
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(AnalysisError::Invalid(format!(
            "a must be positive, got {a}"
        )));
    }
    if let Some(x) = xs.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(AnalysisError::Invalid(format!(
            "entries must be positive, got {x}"
        )));
    }
    let mut partial = CompensatedSum::default();
    for (i, &x) in xs.iter().enumerate() {
        partial.add(x);
        let n = i + 1;
        let bound = a * (n as f64).sqrt();
        if partial.value() < bound * (1.0 - PRECONDITION_RTOL) {
            return Err(AnalysisError::ConstraintViolated {
                n,
                partial_sum: partial.value(),
                bound,
            });
        }
    }
    let sum_sq: CompensatedSum = xs.iter().map(|x| x * x).collect();
    let q_sq: CompensatedSum = (1..=xs.len()).map(|j| q_value(j).powi(2)).collect();
    let sum_sq = sum_sq.value();
    let q_bound = a * a * q_sq.value();
    let margin = sum_sq - q_bound;
    Ok(Lemma2Report {
        holds: margin >= -MARGIN_RTOL * sum_sq,
        margin,
        sum_sq,
        q_bound,
        log_bound: a * a * (xs.len() as f64).ln() / 4.0,
    })
}

/// Largest `a` with `S_n >= a sqrt(n)` for every prefix.
pub fn min_growth_ratio(xs: &[f64]) -> f64 {
    let mut partial = CompensatedSum::default();
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            partial.add(x);
            partial.value() / ((i + 1) as f64).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Sort decreasing. Panics if some prefix sum of the result falls below the
/// corresponding prefix sum of the input.
pub fn rearrange_decreasing(xs: &[f64]) -> Vec<f64> {
    let mut out = xs.to_vec();
    out.sort_by(|a, b| b.total_cmp(a));
    let (mut before, mut after) = (CompensatedSum::default(), CompensatedSum::default());
    for (k, (&x, &y)) in xs.iter().zip(&out).enumerate() {
        before.add(x);
        after.add(y);
        assert!(
            after.value() >= before.value() - 1e-12 * before.value().abs(),
            "rearranged prefix sum {k} decreased"
        );
    }
    out
}

/// `S_n x_n + sum_{k<n} S_k (x_k - x_{k+1})`, which equals `sum x_j^2`.
pub fn summation_by_parts(xs: &[f64]) -> f64 {
    let Some(&last) = xs.last() else { return 0.0 };
    let mut partial = CompensatedSum::default();
    let mut total = CompensatedSum::default();
    for w in xs.windows(2) {
        partial.add(w[0]);
        total.add(partial.value() * (w[0] - w[1]));
    }
    partial.add(last);
    total.add(partial.value() * last);
    total.value()
}

/// Check `sum_{j<=n} q_j^2 >= H_n / 4 >= ln(n) / 4` for every `n <= n_max`;
/// returns the first failing `n`.
pub fn q_square_prefix_check(n_max: usize) -> Result<(), usize> {
    let mut q_sq = CompensatedSum::default();
    let mut harmonic = CompensatedSum::default();
    for n in 1..=n_max {
        q_sq.add(q_value(n).powi(2));
        harmonic.add(1.0 / n as f64);
        let h4 = harmonic.value() / 4.0;
        if q_sq.value() < h4 || h4 < (n as f64).ln() / 4.0 {
            return Err(n);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    #[test]
    fn q_values() {
        assert_eq!(q_value(1), 1.0);
        assert!((q_value(4) - (2.0 - 3f64.sqrt())).abs() < 1e-15);
        assert!((q_value(4) - 0.267949).abs() < 1e-6);
        for j in 1..10_000 {
            assert!(q_value(j) >= 0.5 / (j as f64).sqrt());
        }
    }

    #[test]
    fn q_square_sum_first_hundred() {
        let s: f64 = q_sequence(100).iter().map(|q| q * q).sum();
        let h100: f64 = (1..=100).map(|j| 1.0 / j as f64).sum();
        assert!(s >= h100 / 4.0);
        assert!((h100 / 4.0 - 1.2969).abs() < 1e-4);
        assert!(s >= 100f64.ln() / 4.0);
    }

    #[test]
    fn equality_case() {
        for &a in &[1.0, 0.37, 5.5] {
            let xs: Vec<f64> = q_sequence(500).iter().map(|q| a * q).collect();
            let r = lemma2_check(&xs, a).unwrap();
            assert!(r.margin.abs() <= 1e-12 * r.sum_sq, "margin {}", r.margin);
            assert!(r.holds);
        }
    }

    #[test]
    fn all_ones() {
        let xs = vec![1.0; 100];
        let a = min_growth_ratio(&xs);
        assert_eq!(a, 1.0);
        let r = lemma2_check(&xs, a).unwrap();
        let q_sq: f64 = q_sequence(100).iter().map(|q| q * q).sum();
        assert!(r.holds);
        assert_eq!(r.sum_sq, 100.0);
        assert!((r.q_bound - q_sq).abs() < 1e-12);
        assert!(r.margin > 90.0);
    }

    #[test]
    fn violation_reports_first_index() {
        let err = lemma2_check(&[1.0, 0.1, 5.0], 1.0).unwrap_err();
        assert!(matches!(
            err,
            AnalysisError::ConstraintViolated { n: 2, .. }
        ));
        assert!(lemma2_check(&[1.0, -1.0], 0.5).is_err());
    }

    #[test]
    fn random_fuzz() {
        let mut r = derive_stream(77, 0);
        for _ in 0..10_000 {
            let len = 2 + r.index(199);
            let xs: Vec<f64> = (0..len).map(|_| r.uniform01()).collect();
            let a = min_growth_ratio(&xs);
            let rep = lemma2_check(&xs, a).unwrap();
            assert!(rep.holds, "{rep:?}");
        }
    }

    #[test]
    fn near_extremal_perturbations() {
        let mut r = derive_stream(78, 0);
        for _ in 0..2000 {
            let len = 2 + r.index(300);
            let a = 0.1 + 3.0 * r.uniform01();
            let xs: Vec<f64> = (1..=len)
                .map(|j| a * q_value(j) * (1.0 + 2e-6 * (r.uniform01() - 0.5)))
                .collect();
            let a_eff = a.min(min_growth_ratio(&xs));
            let rep = lemma2_check(&xs, a_eff).unwrap();
            assert!(rep.margin >= -1e-12 * rep.sum_sq, "{rep:?}");
        }
    }

    #[test]
    fn rearrange() {
        assert_eq!(rearrange_decreasing(&[1.0, 3.0, 2.0]), vec![3.0, 2.0, 1.0]);
        assert_eq!(
            rearrange_decreasing(&[5.0, 4.0, 4.0, 1.0]),
            vec![5.0, 4.0, 4.0, 1.0]
        );
        let mut r = derive_stream(79, 0);
        let xs: Vec<f64> = (0..1000).map(|_| r.exp1()).collect();
        let ys = rearrange_decreasing(&xs);
        let mut a: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let mut b: Vec<f64> = ys.iter().map(|x| x * x).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
    }

    #[test]
    fn summation_by_parts_identity() {
        let mut r = derive_stream(80, 0);
        for _ in 0..1000 {
            let len = 1 + r.index(300);
            let mut xs: Vec<f64> = (0..len).map(|_| r.exp1()).collect();
            xs.sort_by(|a, b| b.total_cmp(a));
            let direct: CompensatedSum = xs.iter().map(|x| x * x).collect();
            let parts = summation_by_parts(&xs);
            assert!((parts - direct.value()).abs() <= 1e-10 * direct.value());
        }
    }

    #[test]
    fn q_prefix_and_telescoping() {
        assert_eq!(q_square_prefix_check(100_000), Ok(()));
        let s: CompensatedSum = (1..=1_000_000).map(q_value).collect();
        assert!((s.value() - 1000.0).abs() < 1e-9);
    }
}
