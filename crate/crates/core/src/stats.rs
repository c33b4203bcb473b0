//! Small statistics helpers used by diagnostics, audits and experiments.

use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Nearest-rank quantile: `sorted[ceil(q·n) − 1]`, clamped to the sample.
pub fn quantile_nearest_rank(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty(), "quantile of empty sample");
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let rank = (q * n as f64).ceil() as usize;
    v[rank.clamp(1, n) - 1]
}

/// Asymptotic Kolmogorov tail `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in v.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample KS statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    let p = kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d);
    (d, p)
}

/// Split-R̂ over equal-length chains. Each chain is cut in half. Clamped
/// below at 1.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let half = chains.iter().map(Vec::len).min().unwrap_or(0) / 2;
    if half < 2 {
        return f64::NAN;
    }
    let mut parts: Vec<&[f64]> = Vec::with_capacity(chains.len() * 2);
    for c in chains {
        parts.push(&c[..half]);
        parts.push(&c[half..2 * half]);
    }
    let n = half as f64;
    let means: Vec<f64> = parts.iter().map(|p| mean(p)).collect();
    let w = parts.iter().map(|p| variance(p)).sum::<f64>() / parts.len() as f64;
    let b = n * variance(&means);
    if w <= 0.0 {
        // Constant chains: identical means mean converged, anything else is not.
        return if b <= 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var_plus = (n - 1.0) / n * w + b / n;
    (var_plus / w).sqrt().max(1.0)
}

/// Least-squares slope with its two-sided p-value for `H0: slope = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub p_value: f64,
}

pub fn linear_regression(x: &[f64], y: &[f64]) -> Regression {
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let dof = n - 2.0;
    let slope_se = (rss / dof / sxx).sqrt();
    let p_value = if slope_se > 0.0 {
        let t = StudentsT::new(0.0, 1.0, dof).expect("dof > 0");
        2.0 * t.sf((slope / slope_se).abs())
    } else {
        0.0
    };
    Regression { slope, intercept, slope_se, p_value }
}

/// Equal-width histogram of values in `[0, 1]`, as proportions.
pub fn unit_histogram(values: &[f64], bins: usize) -> Vec<f64> {
    let counts = unit_histogram_counts(values, bins);
    counts.iter().map(|c| *c as f64 / values.len() as f64).collect()
}

pub fn unit_histogram_counts(values: &[f64], bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    for v in values {
        let b = ((v * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank() {
        let xs = [5.0, 1.0, 3.0, 2.0, 4.0];
        assert_eq!(quantile_nearest_rank(&xs, 0.5), 3.0);
        assert_eq!(quantile_nearest_rank(&xs, 0.9), 5.0);
        assert_eq!(quantile_nearest_rank(&xs, 0.2), 1.0);
        assert_eq!(quantile_nearest_rank(&xs, 0.0), 1.0);
    }

    #[test]
    fn kolmogorov_known_values() {
        // P(K > 1.3581) ≈ 0.05, P(K > 1.6276) ≈ 0.01.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-3);
    }

    #[test]
    fn ks_uniform_grid() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_statistic(&xs, |x| x) - 0.005).abs() < 1e-12);
        let (d, p) = ks_two_sample(&xs, &xs);
        assert_eq!(d, 0.0);
        assert!(p > 0.99);
    }

    #[test]
    fn rhat_identical_chains_is_one() {
        let c: Vec<f64> = (0..100).map(|i| (i % 7) as f64).collect();
        let r = split_rhat(&[c.clone(), c.clone(), c.clone(), c]);
        assert!((1.0..1.05).contains(&r));
    }

    #[test]
    fn rhat_detects_shifted_chains() {
        let a: Vec<f64> = (0..100).map(|i| (i % 5) as f64).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 10.0).collect();
        assert!(split_rhat(&[a, b]) > 1.5);
    }

    #[test]
    fn regression_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.1];
        let r = linear_regression(&x, &y);
        assert!((r.slope - 2.03).abs() < 1e-12);
        assert!(r.p_value < 1e-3);
    }

    #[test]
    fn simpson_exp() {
        let v = simpson(|t| (2.0 * t).exp(), 0.0, 1.0, 200);
        assert!((v - (2f64.exp() - 1.0) / 2.0).abs() < 1e-9);
    }
}
