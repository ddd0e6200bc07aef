//! Kolmogorov–Smirnov statistics with asymptotic p-values.

use std::fmt;

use statrs::distribution::{ContinuousCDF, Gamma, Normal};

use crate::error::{Error, Result};

/// `sup_x |F_m(x) − F(x)|` for the empirical CDF of `sample`, evaluated on
/// both sides of every jump.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let d = xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i + 1) as f64 / m - f).max(f - i as f64 / m)
    });
    Ok(d)
}

/// Two-sample statistic `sup_x |F_a(x) − F_b(x)|`.
pub fn ks_two_sample_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        // the alternating series converges poorly here and the value is 1 to
        // double precision
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Result of a KS test at level `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct KsReport {
    pub statistic: f64,
    /// Sample size (effective size `m·n/(m+n)` for two-sample tests).
    pub sample_size: usize,
    pub reference: String,
    pub p_value: f64,
    pub alpha: f64,
    pub accept: bool,
}

impl KsReport {
    fn new(
        statistic: f64,
        effective: f64,
        sample_size: usize,
        reference: String,
        alpha: f64,
    ) -> Self {
        let p_value = kolmogorov_survival(effective.sqrt() * statistic);
        KsReport {
            statistic,
            sample_size,
            reference,
            p_value,
            alpha,
            accept: p_value > alpha,
        }
    }
}

impl fmt::Display for KsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "KS vs {}: D = {:.5}, m = {}, p = {:.4} -> {} at alpha = {}",
            self.reference,
            self.statistic,
            self.sample_size,
            self.p_value,
            if self.accept { "accept" } else { "reject" },
            self.alpha
        )
    }
}

/// One-sample test against a reference CDF.
pub fn ks_test(
    sample: &[f64],
    cdf: impl Fn(f64) -> f64,
    reference: impl Into<String>,
    alpha: f64,
) -> Result<KsReport> {
    let d = ks_statistic(sample, cdf)?;
    Ok(KsReport::new(
        d,
        sample.len() as f64,
        sample.len(),
        reference.into(),
        alpha,
    ))
}

/// Two-sample test.
pub fn ks_two_sample_test(
    a: &[f64],
    b: &[f64],
    reference: impl Into<String>,
    alpha: f64,
) -> Result<KsReport> {
    let d = ks_two_sample_statistic(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let eff = na * nb / (na + nb);
    Ok(KsReport::new(
        d,
        eff,
        eff.round() as usize,
        reference.into(),
        alpha,
    ))
}

/// `Normal(mean, sd)` CDF.
pub fn normal_cdf(mean: f64, sd: f64) -> impl Fn(f64) -> f64 {
    let dist = Normal::new(mean, sd).expect("valid normal parameters");
    move |x| dist.cdf(x)
}

/// CDF of the sum of `shape` independent exponentials of rate `rate`.
pub fn gamma_cdf(shape: f64, rate: f64) -> impl Fn(f64) -> f64 {
    let dist = Gamma::new(shape, rate).expect("valid gamma parameters");
    move |x| if x <= 0.0 { 0.0 } else { dist.cdf(x) }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct O(m²) evaluation of the sup distance over both limits at every
    /// sample point.
    fn ks_direct(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
        let m = sample.len() as f64;
        let mut d = 0.0f64;
        for &x in sample {
            let at = sample.iter().filter(|&&y| y <= x).count() as f64 / m;
            let before = sample.iter().filter(|&&y| y < x).count() as f64 / m;
            d = d.max((at - cdf(x)).abs()).max((before - cdf(x)).abs());
        }
        d
    }

    fn uniform(x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    #[test]
    fn single_and_two_point_samples() {
        assert_eq!(ks_statistic(&[0.5], uniform).unwrap(), 0.5);
        assert_eq!(ks_statistic(&[0.25, 0.75], uniform).unwrap(), 0.25);
        assert!(matches!(
            ks_statistic(&[], uniform),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn quantile_sample_is_close() {
        let m = 1000;
        let xs: Vec<f64> = (1..=m).map(|i| (i as f64 - 0.5) / m as f64).collect();
        assert!(ks_statistic(&xs, uniform).unwrap() <= 0.0005 + 1e-12);
    }

    #[test]
    fn agrees_with_direct_evaluation() {
        use rand::Rng;
        let mut rng = crate::seed::rng(5);
        for trial in 0..50 {
            let m = 1 + trial % 40;
            let xs: Vec<f64> = (0..m)
                .map(|_| (rng.random::<f64>() * 8.0).floor() / 8.0)
                .collect();
            let a = ks_statistic(&xs, uniform).unwrap();
            assert!((a - ks_direct(&xs, uniform)).abs() <= 1e-12, "{xs:?}");
        }
    }

    #[test]
    fn two_sample_statistic() {
        assert_eq!(
            ks_two_sample_statistic(&[1.0, 2.0], &[1.0, 2.0]).unwrap(),
            0.0
        );
        assert_eq!(
            ks_two_sample_statistic(&[1.0, 2.0], &[3.0, 4.0]).unwrap(),
            1.0
        );
        assert_eq!(
            ks_two_sample_statistic(&[1.0, 3.0], &[2.0, 4.0]).unwrap(),
            0.5
        );
    }

    #[test]
    fn kolmogorov_tail_values() {
        // P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn reference_cdfs() {
        assert!((normal_cdf(0.0, 1.0)(0.0) - 0.5).abs() < 1e-15);
        let exp = gamma_cdf(1.0, 2.0);
        assert!((exp(1.0) - (1.0 - (-2.0f64).exp())).abs() < 1e-12);
        assert_eq!(exp(-1.0), 0.0);
    }
}
