//! Streaming moments, Pearson correlation and the rank test used to
//! compare experiment outcomes.

use statrs::distribution::{ContinuousCDF, Normal};

/// Welford accumulator for mean and variance.
#[derive(Debug, Clone, Default)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; `None` below two samples.
    pub fn sample_variance(&self) -> Option<f64> {
        (self.n >= 2).then(|| self.m2 / (self.n - 1) as f64)
    }

    pub fn sample_std(&self) -> Option<f64> {
        self.sample_variance().map(f64::sqrt)
    }
}

/// Online co-moment accumulator (single pass over paired samples).
#[derive(Debug, Clone, Default)]
pub struct OnlineCovariance {
    n: u64,
    mean_x: f64,
    mean_y: f64,
    c_xy: f64,
    m2_x: f64,
    m2_y: f64,
}

impl OnlineCovariance {
    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        let n = self.n as f64;
        let dx = x - self.mean_x;
        let dy = y - self.mean_y;
        self.mean_x += dx / n;
        self.mean_y += dy / n;
        self.c_xy += dx * (y - self.mean_y);
        self.m2_x += dx * (x - self.mean_x);
        self.m2_y += dy * (y - self.mean_y);
    }

    /// Pearson coefficient, or `None` when fewer than `min_samples` pairs
    /// were seen or either variable is constant.
    pub fn correlation(&self, min_samples: u64) -> Option<f64> {
        if self.n < min_samples.max(2) {
            return None;
        }
        let scale = (self.m2_x.max(0.0) * self.m2_y.max(0.0)).sqrt();
        if !(scale > 0.0) || !scale.is_finite() {
            return None;
        }
        // relative guard: spread indistinguishable from rounding noise is zero
        let tol = 1e-12;
        if self.m2_x <= tol * tol * self.mean_x.abs().max(1.0).powi(2)
            || self.m2_y <= tol * tol * self.mean_y.abs().max(1.0).powi(2)
        {
            return None;
        }
        Some((self.c_xy / scale).clamp(-1.0, 1.0))
    }
}

/// Pearson correlation of paired samples. `None` when fewer than three
/// pairs are given or either variable has zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len(), "pearson needs paired samples");
    let mut acc = OnlineCovariance::default();
    for (&x, &y) in xs.iter().zip(ys) {
        acc.push(x, y);
    }
    acc.correlation(3)
}

/// One-sided Mann-Whitney U test of the alternative "samples in `a` tend
/// to be smaller than samples in `b`". Returns the p-value from the normal
/// approximation with tie and continuity corrections.
pub fn mann_whitney_less(a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return 1.0;
    }
    let mut pooled: Vec<(f64, usize)> = a
        .iter()
        .map(|&x| (x, 0))
        .chain(b.iter().map(|&x| (x, 1)))
        .collect();
    pooled.sort_by(|l, r| l.0.total_cmp(&r.0));

    let n = pooled.len();
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        for item in &pooled[i..=j] {
            if item.1 == 0 {
                rank_sum_a += avg_rank;
            }
        }
        i = j + 1;
    }

    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let u_a = rank_sum_a - n1f * (n1f + 1.0) / 2.0;
    let mean_u = n1f * n2f / 2.0;
    let var_u = n1f * n2f / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if var_u <= 0.0 {
        return 1.0;
    }
    // small U supports the alternative
    let z = (u_a - mean_u + 0.5) / var_u.sqrt();
    Normal::standard().cdf(z)
}
