use bevt::evd::{GevParams, GpdParams, Mean};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn xi_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![-0.9..0.9f64, -1e-6..1e-6f64, Just(0.0)]
}

/// Kolmogorov–Smirnov statistic of `xs` against `cdf`.
fn ks_statistic(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn gev_quantile_cdf_roundtrip(xi in xi_strategy(), mu in -5.0..5.0f64, sigma in 0.1..5.0f64, q in 1e-6..(1.0 - 1e-6)) {
        let p = GevParams::new(xi, mu, sigma).unwrap();
        let y = p.quantile(q).unwrap();
        prop_assert!((p.cdf(y) - q).abs() < 1e-10);
    }

    #[test]
    fn gpd_quantile_cdf_roundtrip(xi in xi_strategy(), sigma in 0.1..5.0f64, u in -3.0..3.0f64, q in 1e-6..(1.0 - 1e-6)) {
        let p = GpdParams::new(xi, sigma, u).unwrap();
        let y = p.quantile(q).unwrap();
        prop_assert!((p.cdf(y) - q).abs() < 1e-10);
    }

    #[test]
    fn gev_cdf_monotone(xi in xi_strategy(), sigma in 0.1..5.0f64, a in -20.0..20.0f64, d in 0.0..5.0f64) {
        let p = GevParams::new(xi, 0.0, sigma).unwrap();
        prop_assert!(p.cdf(a) <= p.cdf(a + d));
        prop_assert!((0.0..=1.0).contains(&p.cdf(a)));
    }

    #[test]
    fn gev_quantile_monotone(xi in xi_strategy(), sigma in 0.1..5.0f64, q1 in 0.001..0.999f64, q2 in 0.001..0.999f64) {
        let p = GevParams::new(xi, 1.0, sigma).unwrap();
        let (lo, hi) = if q1 < q2 { (q1, q2) } else { (q2, q1) };
        prop_assert!(p.quantile(lo).unwrap() <= p.quantile(hi).unwrap());
    }

    #[test]
    fn gev_logpdf_is_cdf_derivative(xi in -0.9..0.9f64, mu in -3.0..3.0f64, sigma in 0.2..4.0f64, q in 0.01..0.99f64) {
        let p = GevParams::new(xi, mu, sigma).unwrap();
        let y = p.quantile(q).unwrap();
        let h = 1e-5 * sigma;
        let fd = (p.cdf(y + h) - p.cdf(y - h)) / (2.0 * h);
        let pdf = p.logpdf(y).exp();
        prop_assert!(((fd - pdf) / pdf).abs() < 1e-5, "fd {fd} pdf {pdf}");
    }

    #[test]
    fn gpd_logpdf_is_cdf_derivative(xi in -0.9..0.9f64, sigma in 0.2..4.0f64, q in 0.01..0.99f64) {
        let p = GpdParams::new(xi, sigma, 1.0).unwrap();
        let y = p.quantile(q).unwrap();
        let h = 1e-5 * sigma;
        let fd = (p.cdf(y + h) - p.cdf(y - h)) / (2.0 * h);
        let pdf = p.logpdf(y).exp();
        prop_assert!(((fd - pdf) / pdf).abs() < 1e-5, "fd {fd} pdf {pdf}");
    }

    #[test]
    fn gev_continuous_at_zero_shape(mu in -3.0..3.0f64, sigma in 0.2..4.0f64, y in -2.0..8.0f64, q in 0.01..0.99f64) {
        let g = GevParams::new(0.0, mu, sigma).unwrap();
        let z = (y - mu) / sigma;
        let gz = -(-q.ln()).ln();
        for xi in [1e-7f64, -1e-7, 1e-9, -1e-9] {
            // the departure from the Gumbel limit is first order in xi
            let tol = |w: f64| 1e-12 + 2.0 * xi.abs() * (1.0 + w * w).powf(1.5) * (1.0 + (-w).exp());
            let p = GevParams::new(xi, mu, sigma).unwrap();
            prop_assert!((p.cdf(y) - g.cdf(y)).abs() < tol(z));
            prop_assert!((p.quantile(q).unwrap() - g.quantile(q).unwrap()).abs() < sigma * tol(gz));
            let (a, b) = (p.logpdf(y), g.logpdf(y));
            if b.is_finite() && b > -50.0 {
                prop_assert!((a - b).abs() < tol(z), "xi {xi}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn gpd_continuous_at_zero_shape(sigma in 0.2..4.0f64, y in 0.0..8.0f64, q in 0.01..0.99f64) {
        let g = GpdParams::new(0.0, sigma, 0.0).unwrap();
        let z = y / sigma;
        let gz = -(1.0 - q).ln();
        for xi in [1e-7f64, -1e-7, 1e-9] {
            let tol = |w: f64| 1e-12 + 2.0 * xi.abs() * (1.0 + w * w);
            let p = GpdParams::new(xi, sigma, 0.0).unwrap();
            prop_assert!((p.cdf(y) - g.cdf(y)).abs() < tol(z));
            prop_assert!((p.quantile(q).unwrap() - g.quantile(q).unwrap()).abs() < sigma * tol(gz));
        }
    }

    #[test]
    fn gev_mean_finite_iff_shape_below_one(xi in -0.9..1.5f64) {
        let p = GevParams::new(xi, 0.0, 1.0).unwrap();
        prop_assert_eq!(matches!(p.mean(), Mean::Infinite), xi >= 1.0);
    }
}

#[test]
fn gev_sampler_passes_ks() {
    // critical value of the one-sample KS statistic at the 1% level
    let n = 100_000;
    let crit = 1.628 / (n as f64).sqrt();
    for (i, &(xi, mu, sigma)) in [(-0.3, 0.0, 1.0), (0.0, 2.0, 0.5), (0.25, -1.0, 2.0)].iter().enumerate() {
        let p = GevParams::new(xi, mu, sigma).unwrap();
        let mut xs = p.sample(&mut ChaCha8Rng::seed_from_u64(100 + i as u64), n);
        let d = ks_statistic(&mut xs, |x| p.cdf(x));
        assert!(d < crit, "xi={xi}: D = {d} >= {crit}");
    }
}

#[test]
fn gpd_sampler_passes_ks() {
    let n = 100_000;
    let crit = 1.628 / (n as f64).sqrt();
    for (i, &(xi, sigma)) in [(-0.2, 1.0), (0.0, 0.5), (0.4, 2.0)].iter().enumerate() {
        let p = GpdParams::new(xi, sigma, 3.0).unwrap();
        let mut xs = p.sample(&mut ChaCha8Rng::seed_from_u64(200 + i as u64), n);
        let d = ks_statistic(&mut xs, |x| p.cdf(x));
        assert!(d < crit, "xi={xi}: D = {d} >= {crit}");
    }
}

#[test]
fn gev_sample_mean_matches_analytic_mean() {
    for (i, &xi) in [-0.4, -0.1, 0.0, 0.2].iter().enumerate() {
        let p = GevParams::new(xi, 1.0, 1.5).unwrap();
        let xs = p.sample(&mut ChaCha8Rng::seed_from_u64(300 + i as u64), 400_000);
        let m = bevt::stats::mean(&xs);
        let se = bevt::stats::sd(&xs) / (xs.len() as f64).sqrt();
        let exact = p.mean().finite().unwrap();
        assert!((m - exact).abs() < 4.0 * se, "xi={xi}: {m} vs {exact}");
    }
}
