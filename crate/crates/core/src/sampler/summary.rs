//! Posterior summaries: HPD intervals, DIC and prior transfer.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::mcmc::{Chain, Target};
use super::prior::{Prior, PriorSpec};
use crate::error::{Error, Result};
use crate::stats;

/// Shortest interval holding `ceil(level * n)` of the sorted draws. Ties go
/// to the first window.
pub fn hpd_interval(draws: &[f64], level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("HPD level must lie in (0, 1), got {level}")));
    }
    let n = draws.len();
    let m = (level * n as f64).ceil() as usize;
    if n < 2 || m > n || m < 1 {
        return Err(Error::EmptySample(format!(
            "{n} draws are too few for a {level} HPD window"
        )));
    }
    let s = stats::sorted(draws);
    let mut best = 0;
    let mut best_width = f64::INFINITY;
    for i in 0..=(n - m) {
        let w = s[i + m - 1] - s[i];
        if w < best_width {
            best_width = w;
            best = i;
        }
    }
    Ok((s[best], s[best + m - 1]))
}

/// Equal-tailed interval from type-7 quantiles at `(1-level)/2` and `(1+level)/2`.
pub fn equal_tailed_interval(draws: &[f64], level: f64) -> (f64, f64) {
    let s = stats::sorted(draws);
    let a = (1.0 - level) / 2.0;
    (stats::quantile_sorted(&s, a), stats::quantile_sorted(&s, 1.0 - a))
}

/// Mean, SD and 95% HPD bounds of one quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub mean: f64,
    pub sd: f64,
    pub hpd_lo: f64,
    pub hpd_hi: f64,
}

impl ParamSummary {
    pub fn from_draws(draws: &[f64], level: f64) -> Result<Self> {
        let (hpd_lo, hpd_hi) = hpd_interval(draws, level)?;
        Ok(Self {
            mean: stats::mean(draws),
            sd: stats::sd(draws),
            hpd_lo,
            hpd_hi,
        })
    }
}

/// Deviance information criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dic {
    pub dic: f64,
    pub p_d: f64,
    /// Posterior mean deviance.
    pub d_bar: f64,
    /// Deviance at the posterior mean.
    pub d_hat: f64,
    /// Draws dropped because their log-likelihood was not finite.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub params: IndexMap<String, ParamSummary>,
    pub dic: Option<Dic>,
    pub loglik_at_mean: Option<f64>,
    pub acceptance_rate: IndexMap<String, f64>,
    pub n_draws: usize,
}

impl PosteriorSummary {
    pub fn get(&self, name: &str) -> Option<&ParamSummary> {
        self.params.get(name)
    }
}

/// Per-coordinate summary of the first `n_params` chain columns (latent
/// coordinates beyond that are skipped).
pub fn summarize(chain: &Chain, n_params: usize, level: f64) -> Result<PosteriorSummary> {
    let mut params = IndexMap::new();
    let mut acceptance_rate = IndexMap::new();
    for j in 0..n_params.min(chain.names.len()) {
        let col = chain.column_at(j);
        params.insert(chain.names[j].clone(), ParamSummary::from_draws(&col, level)?);
        acceptance_rate.insert(chain.names[j].clone(), chain.acceptance_rate[j]);
    }
    Ok(PosteriorSummary {
        params,
        dic: None,
        loglik_at_mean: None,
        acceptance_rate,
        n_draws: chain.len(),
    })
}

/// DIC from an arbitrary per-draw log-likelihood.
pub fn dic_with(chain: &Chain, loglik: impl Fn(&[f64]) -> f64) -> Result<Dic> {
    if chain.is_empty() {
        return Err(Error::EmptySample("DIC of an empty chain".into()));
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    for row in &chain.draws {
        let ll = loglik(row);
        if ll.is_finite() {
            sum += -2.0 * ll;
            used += 1;
        }
    }
    let excluded = chain.len() - used;
    if excluded > 0 {
        log::warn!("DIC: {excluded} draws with non-finite log-likelihood excluded");
    }
    if used == 0 {
        return Err(Error::Degenerate("no draw has a finite log-likelihood".into()));
    }
    let d_bar = sum / used as f64;
    let d_hat = -2.0 * loglik(&chain.mean());
    let p_d = d_bar - d_hat;
    Ok(Dic {
        dic: d_bar + p_d,
        p_d,
        d_bar,
        d_hat,
        excluded,
    })
}

/// DIC using the target's conditional likelihood (latent coordinates count
/// as parameters).
pub fn dic<T: Target + ?Sized>(chain: &Chain, target: &T) -> Result<Dic> {
    dic_with(chain, |theta| target.loglik(theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DicVerdict {
    NoSeriousDifference,
    PreferSmaller,
    StronglyPreferSmaller,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DicComparison {
    pub verdict: DicVerdict,
    /// Model with the smaller DIC (`A` on ties).
    pub smaller: Which,
    pub difference: f64,
}

/// Classifies `|dic_a - dic_b|`: below 5 no serious difference, 5 to 10
/// prefer the smaller, above 10 strongly prefer the smaller.
pub fn dic_verdict(dic_a: f64, dic_b: f64) -> DicComparison {
    let diff = (dic_a - dic_b).abs();
    let verdict = if diff < 5.0 {
        DicVerdict::NoSeriousDifference
    } else if diff <= 10.0 {
        DicVerdict::PreferSmaller
    } else {
        DicVerdict::StronglyPreferSmaller
    };
    DicComparison {
        verdict,
        smaller: if dic_b < dic_a { Which::B } else { Which::A },
        difference: diff,
    }
}

fn moments(chain: &Chain, name: &str) -> Result<Option<(f64, f64)>> {
    let Some(col) = chain.column(name) else {
        return Ok(None);
    };
    let m = stats::mean(&col);
    let s = stats::sd(&col);
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Degenerate(format!(
            "draws of '{name}' have no spread; cannot build a prior"
        )));
    }
    Ok(Some((m, s)))
}

/// Moment-matched informative priors from a chain: normal for shape,
/// location and random-effect means; gamma for the scale; inverse-gamma for
/// variances; normal for the correlation.
pub fn posterior_to_prior(chain: &Chain) -> Result<PriorSpec> {
    let mut spec = PriorSpec::new();
    for name in ["xi", "mu", "theta1", "theta2", "rho"] {
        if let Some((m, s)) = moments(chain, name)? {
            spec.insert(name, Prior::Normal { mean: m, sd: s });
        }
    }
    if let Some((m, s)) = moments(chain, "sigma")? {
        let v = s * s;
        spec.insert(
            "sigma",
            Prior::Gamma {
                shape: m * m / v,
                scale: v / m,
            },
        );
    }
    for name in ["tau2", "tau1_2", "tau2_2"] {
        if let Some((m, s)) = moments(chain, name)? {
            let a = m * m / (s * s) + 2.0;
            spec.insert(
                name,
                Prior::InverseGamma {
                    shape: a,
                    scale: m * (a - 1.0),
                },
            );
        }
    }
    if spec.get("xi").is_none() || spec.get("sigma").is_none() {
        return Err(Error::Config("chain lacks xi or sigma draws".into()));
    }
    // keep the canonical parameter order of the source chain
    let mut ordered = PriorSpec::new();
    for n in &chain.names {
        if let Some(p) = spec.get(n) {
            ordered.insert(n, *p);
        }
    }
    Ok(ordered)
}
