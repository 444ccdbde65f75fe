//! Small descriptive-statistics helpers shared across modules.

/// Arithmetic mean; NaN for an empty slice. Accumulates offsets from the
/// first value so constant input returns that value exactly.
pub fn mean(xs: &[f64]) -> f64 {
    match xs.first() {
        None => f64::NAN,
        Some(&x0) => x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64,
    }
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Type-7 quantile (linear interpolation between order statistics) of
/// already-sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty data");
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Type-7 quantile of unsorted data.
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    quantile_sorted(&sorted(xs), p)
}

/// Mean with a normal-approximation 95% interval for the mean.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub sd: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

pub fn mean_ci(xs: &[f64]) -> MeanCi {
    let m = mean(xs);
    let s = sd(xs);
    let half = 1.96 * s / (xs.len() as f64).sqrt();
    MeanCi {
        mean: m,
        sd: s,
        lo: m - half,
        hi: m + half,
        n: xs.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((quantile(&xs, 0.9) - 90.1).abs() < 1e-12);
        assert!((quantile(&xs, 0.95) - 95.05).abs() < 1e-12);
        assert_eq!(quantile(&[3.0], 0.3), 3.0);
        assert_eq!(quantile(&xs, 1.0), 100.0);
        assert_eq!(quantile(&xs, 0.0), 1.0);
    }

    #[test]
    fn spread() {
        assert_eq!(sd(&[1.0]), 0.0);
        assert!((sd(&[1.0, 2.0, 3.0, 4.0]) - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}
