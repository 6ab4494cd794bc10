//! Small descriptive statistics used by the Monte Carlo harness.

use statrs::distribution::{ContinuousCDF, Normal};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance (`NaN` for fewer than two values).
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return f64::NAN;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Least-squares slope of `y` on `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Blom plotting positions `Φ^{-1}((i - 3/8) / (n + 1/4))`.
pub fn normal_scores(n: usize) -> Vec<f64> {
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    (1..=n)
        .map(|i| std.inverse_cdf((i as f64 - 0.375) / (n as f64 + 0.25)))
        .collect()
}

/// Sorted sample against normal scores, and their correlation.
pub fn qq(x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let scores = normal_scores(sorted.len());
    let r = correlation(&scores, &sorted);
    (scores, sorted, r)
}

/// Sample skewness and (non-excess) kurtosis with biased moments.
pub fn skew_kurt(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = mean(x);
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2))
}

/// Jarque–Bera statistic and its asymptotic `χ²_2` p-value `exp(-JB/2)`.
pub fn jarque_bera(x: &[f64]) -> (f64, f64) {
    let (s, k) = skew_kurt(x);
    let jb = x.len() as f64 / 6.0 * (s * s + (k - 3.0).powi(2) / 4.0);
    (jb, (-jb / 2.0).exp())
}
