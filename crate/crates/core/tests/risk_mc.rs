use bevt::extract::{empirical_var_es_values, ExceedanceSample};
use bevt::model::{gev_loglik_fixed, gpd_loglik};
use bevt::risk::{es_pot, return_level, var_pot, var_pot_ratio, ReturnPeriod, TailProb};
use bevt::simlab::{generate_bm, ScenarioBM};
use bevt::{GevParams, GpdParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Draws that exceed `u` with probability `zeta`, GPD-distributed above it
/// and uniform on `(u - 1, u)` below.
fn gpd_tailed(p: &GpdParams, zeta: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if rng.random::<f64>() < zeta {
                p.from_uniform(rng.random())
            } else {
                p.u - rng.random::<f64>()
            }
        })
        .collect()
}

#[test]
fn var_and_es_match_monte_carlo() {
    let cases = [(0.15, 0.58, 1.4, 0.08), (-0.1, 0.41, 4.0, 0.05), (0.0, 1.0, 0.0, 0.1)];
    for (i, &(xi, sigma, u, zeta)) in cases.iter().enumerate() {
        let p = GpdParams::new(xi, sigma, u).unwrap();
        let xs = gpd_tailed(&p, zeta, 1_000_000, &mut ChaCha8Rng::seed_from_u64(i as u64));
        for tail in [0.02, 0.01] {
            let emp = empirical_var_es_values(&xs, tail).unwrap();
            let var = var_pot_ratio(&p, 1.0 / zeta, tail);
            let es = es_pot(var, &p);
            assert!((emp.var - var).abs() / var.abs() < 0.01, "case {i} p {tail}: VaR {} vs {var}", emp.var);
            assert!((emp.es - es).abs() / es.abs() < 0.01, "case {i} p {tail}: ES {} vs {es}", emp.es);
        }
    }
}

#[test]
fn gpd_likelihood_prefers_true_shape() {
    let truth = GpdParams::new(0.15, 0.58, 0.0).unwrap();
    let wrong = GpdParams::new(0.5, 0.58, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    // the dominance rate is about 0.964 for 100 excesses; estimate it tightly
    let reps = 10_000;
    let wins = (0..reps)
        .filter(|_| {
            let s = ExceedanceSample::from_values(&truth.sample(&mut rng, 100), 0.0).unwrap();
            gpd_loglik(&truth, &s) >= gpd_loglik(&wrong, &s)
        })
        .count();
    assert!(wins as f64 >= 0.95 * reps as f64, "true parameters won {wins} of {reps}");
}

#[test]
fn fixed_loglik_on_simulated_maxima() {
    // mean over 200 seeded datasets at 360 observations per year, measured
    let s = ScenarioBM {
        obs_per_year: 360,
        ..ScenarioBM::default()
    };
    let p = GevParams::new(-0.1, 3.33, 1.0).unwrap();
    let lls: Vec<f64> = (0..200)
        .map(|i| gev_loglik_fixed(&p, &generate_bm(&s, &mut ChaCha8Rng::seed_from_u64(i)).unwrap().sample))
        .collect();
    let m = bevt::stats::mean(&lls);
    assert!((m - -77.50).abs() < 0.05, "mean loglik {m}");
}

proptest! {
    #[test]
    fn return_level_is_gev_quantile(xi in -0.9..0.9f64, mu in -3.0..3.0f64, sigma in 0.1..3.0f64, k in 2u32..1000) {
        let p = GevParams::new(xi, mu, sigma).unwrap();
        let r = return_level(&p, ReturnPeriod::new(k).unwrap());
        let q = p.quantile(1.0 - 1.0 / k as f64).unwrap();
        prop_assert!((r - q).abs() <= 1e-12 * (1.0 + q.abs()) * 10.0);
    }

    #[test]
    fn return_level_increases_with_period(xi in -0.9..0.9f64, sigma in 0.1..3.0f64, k in 2u32..1000) {
        let p = GevParams::new(xi, 0.0, sigma).unwrap();
        prop_assert!(return_level(&p, ReturnPeriod::new(k).unwrap()) < return_level(&p, ReturnPeriod::new(k + 1).unwrap()));
    }

    #[test]
    fn es_exceeds_var(xi in -0.9..0.9f64, sigma in 0.1..3.0f64, u in -2.0..2.0f64, ratio in 1.0..50.0f64, tail in 0.001..0.2f64) {
        let p = GpdParams::new(xi, sigma, u).unwrap();
        let r = (ratio * tail).min(1.0) / tail;
        let var = var_pot_ratio(&p, r, tail);
        prop_assert!(es_pot(var, &p) >= var);
    }

    #[test]
    fn var_continuous_at_zero_shape(sigma in 0.1..3.0f64, u in -2.0..5.0f64, n_exceed in 1usize..500, tail in 0.001..0.5f64) {
        let n_total = 10_000;
        let t = TailProb::new(tail).unwrap();
        let a = var_pot(&GpdParams::new(1e-10, sigma, u).unwrap(), n_total, n_exceed, t).unwrap();
        let b = var_pot(&GpdParams::new(0.0, sigma, u).unwrap(), n_total, n_exceed, t).unwrap();
        prop_assert!((a - b).abs() < 1e-6);
    }
}
