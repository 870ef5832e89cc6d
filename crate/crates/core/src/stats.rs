//! Streaming moments, jackknife errors and least-squares line fits.

use serde::Serialize;

/// One-pass accumulator for the first four central moments
/// (Welford / Terriberry update).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut m = Self::new();
        for &x in xs {
            m.push(x);
        }
        m
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n as f64 - 1.0)).max(0.0)
        }
    }

    pub fn std_err_mean(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    /// Standard error of the sample variance from the fourth central moment,
    /// `Var(s²) ≈ (m4 − (n−3)/(n−1)·s⁴)/n`.
    pub fn std_err_variance(&self) -> f64 {
        if self.n < 4 {
            return 0.0;
        }
        let n = self.n as f64;
        let s2 = self.variance();
        let m4 = self.m4 / n;
        ((m4 - (n - 3.0) / (n - 1.0) * s2 * s2) / n).max(0.0).sqrt()
    }

    /// Sample skewness `g1 = √n·M3 / M2^{3/2}`.
    pub fn skewness(&self) -> f64 {
        if self.m2 <= 0.0 {
            return 0.0;
        }
        (self.n as f64).sqrt() * self.m3 / self.m2.powf(1.5)
    }

    /// Sample excess kurtosis `g2 = n·M4 / M2² − 3`.
    pub fn excess_kurtosis(&self) -> f64 {
        if self.m2 <= 0.0 {
            return 0.0;
        }
        self.n as f64 * self.m4 / (self.m2 * self.m2) - 3.0
    }

    /// Standard error of the skewness under normality.
    pub fn std_err_skewness(&self) -> f64 {
        let n = self.n as f64;
        if self.n < 3 {
            return f64::INFINITY;
        }
        (6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0))).sqrt()
    }

    /// Standard error of the excess kurtosis under normality.
    pub fn std_err_kurtosis(&self) -> f64 {
        let n = self.n as f64;
        if self.n < 4 {
            return f64::INFINITY;
        }
        2.0 * self.std_err_skewness() * ((n * n - 1.0) / ((n - 3.0) * (n + 5.0))).sqrt()
    }
}

/// Jackknife standard error of the sample mean.
///
/// Leave-one-out means are formed in O(n) from the total.
pub fn jackknife_se_of_mean(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let total: f64 = xs.iter().sum();
    let loo: Vec<f64> = xs.iter().map(|x| (total - x) / (nf - 1.0)).collect();
    let loo_mean = loo.iter().sum::<f64>() / nf;
    let ss: f64 = loo.iter().map(|v| (v - loo_mean).powi(2)).sum();
    ((nf - 1.0) / nf * ss).sqrt()
}

/// Sample covariance and the standard error of that estimate.
pub fn covariance_with_se(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let products: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let cov = products.iter().sum::<f64>() / (nf - 1.0);
    let m = Moments::from_slice(&products);
    (cov, m.std_err_mean())
}

/// Ordinary least-squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Needs at least three points with distinct `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_se = (rss / (nf - 2.0) / sxx).sqrt();
    Some(LinearFit {
        slope,
        intercept,
        slope_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_two_pass() {
        let xs: Vec<f64> = (0..500)
            .map(|i| ((i * 37) % 101) as f64 * 0.3 - 4.0)
            .collect();
        let m = Moments::from_slice(&xs);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let c = |k: i32| xs.iter().map(|x| (x - mean).powi(k)).sum::<f64>();
        assert!((m.mean() - mean).abs() < 1e-12);
        assert!((m.variance() - c(2) / (n - 1.0)).abs() < 1e-10);
        let skew = n.sqrt() * c(3) / c(2).powf(1.5);
        assert!((m.skewness() - skew).abs() < 1e-10);
        let kurt = n * c(4) / (c(2) * c(2)) - 3.0;
        assert!((m.excess_kurtosis() - kurt).abs() < 1e-10);
    }

    #[test]
    fn constant_sample_has_zero_spread() {
        let m = Moments::from_slice(&[2.5; 10]);
        assert_eq!(m.variance(), 0.0);
        assert_eq!(m.std_err_variance(), 0.0);
        assert_eq!(jackknife_se_of_mean(&[2.5; 10]), 0.0);
    }

    #[test]
    fn jackknife_equals_classical_se_for_mean() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0, 7.0];
        let m = Moments::from_slice(&xs);
        assert!((jackknife_se_of_mean(&xs) - m.std_err_mean()).abs() < 1e-12);
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-14);
        assert!((fit.intercept - 2.0).abs() < 1e-14);
        assert!(fit.slope_se < 1e-14);
        assert!(linear_fit(&x[..2], &y[..2]).is_none());
    }
}
