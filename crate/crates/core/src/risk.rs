//! Return levels, value-at-risk and expected shortfall, as closed-form maps
//! of GEV/GPD parameters and as posterior distributions via per-draw
//! transformation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evd::{GevParams, GpdParams, XI_ZERO_TOL};
use crate::sampler::{hpd_interval, Chain};
use crate::stats;

/// Number of equal-length periods `k >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReturnPeriod(u32);

impl ReturnPeriod {
    pub fn new(k: u32) -> Result<Self> {
        if k >= 2 {
            Ok(Self(k))
        } else {
            Err(Error::Domain(format!("return period must be at least 2, got {k}")))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// Tail probability `0 < p < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailProb(f64);

impl TailProb {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p < 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::Domain(format!("tail probability must lie in (0, 1), got {p}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Level exceeded on average once every `k` periods.
pub fn return_level(p: &GevParams, k: ReturnPeriod) -> f64 {
    let y = -(-1.0 / k.0 as f64).ln_1p();
    if p.xi.abs() < XI_ZERO_TOL {
        p.mu - p.sigma * y.ln()
    } else {
        p.mu - p.sigma / p.xi * (1.0 - y.powf(-p.xi))
    }
}

/// Threshold-model VaR at tail probability `p`.
///
/// `(n_total / n_exceed) * p` above one means the requested quantile lies
/// below the threshold, outside the range the tail model describes; the
/// formula is still evaluated.
pub fn var_pot(p: &GpdParams, n_total: usize, n_exceed: usize, tail: TailProb) -> Result<f64> {
    if n_exceed == 0 {
        return Err(Error::EmptySample("no exceedances: VaR undefined".into()));
    }
    Ok(var_pot_ratio(p, n_total as f64 / n_exceed as f64, tail.0))
}

/// [`var_pot`] with the ratio `n_total / n_exceed` given directly.
pub fn var_pot_ratio(p: &GpdParams, ratio: f64, tail: f64) -> f64 {
    let r = ratio * tail;
    if p.xi.abs() < XI_ZERO_TOL {
        p.u - p.sigma * r.ln()
    } else {
        p.u + p.sigma / p.xi * (r.powf(-p.xi) - 1.0)
    }
}

/// Expected shortfall beyond `var`; infinite when `xi >= 1`.
pub fn es_pot(var: f64, p: &GpdParams) -> f64 {
    if p.xi >= 1.0 {
        return f64::INFINITY;
    }
    (var + p.sigma - p.xi * p.u) / (1.0 - p.xi)
}

/// Posterior summary of a derived quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedSummary {
    pub mean: f64,
    pub sd: f64,
    pub hpd_lo: f64,
    pub hpd_hi: f64,
    /// Draws whose image was not finite and were left out.
    pub n_nonfinite: usize,
    pub n_draws: usize,
}

/// Applies `map` to every retained draw and summarises the images. Fails
/// when more than 1% of them are not finite.
pub fn posterior_transform<F>(chain: &Chain, level: f64, map: F) -> Result<DerivedSummary>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let values = transform_values(chain, map)?;
    summarize_values(&values, chain.len(), level)
}

/// Per-draw images of `map`, dropping non-finite ones (at most 1%).
pub fn transform_values<F>(chain: &Chain, map: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let all: Vec<f64> = chain.draws.par_iter().map(|d| map(d)).collect();
    let total = all.len();
    let values: Vec<f64> = all.into_iter().filter(|v| v.is_finite()).collect();
    let bad = total - values.len();
    if bad * 100 > total {
        return Err(Error::NonFinite { count: bad, total });
    }
    Ok(values)
}

fn summarize_values(values: &[f64], total: usize, level: f64) -> Result<DerivedSummary> {
    let (hpd_lo, hpd_hi) = hpd_interval(values, level)?;
    Ok(DerivedSummary {
        mean: stats::mean(values),
        sd: stats::sd(values),
        hpd_lo,
        hpd_hi,
        n_nonfinite: total - values.len(),
        n_draws: total,
    })
}

/// Posterior of `R^k` from a chain whose first columns are `xi, mu, sigma`.
pub fn return_level_posterior(chain: &Chain, k: ReturnPeriod, level: f64) -> Result<DerivedSummary> {
    let idx = gev_columns(chain)?;
    posterior_transform(chain, level, |d| {
        return_level(
            &GevParams {
                xi: d[idx.0],
                mu: d[idx.1],
                sigma: d[idx.2],
            },
            k,
        )
    })
}

/// Posterior VaR and ES from a chain with `xi, sigma` columns.
pub fn var_es_posterior(
    chain: &Chain,
    u: f64,
    n_total: usize,
    n_exceed: usize,
    tail: TailProb,
    level: f64,
) -> Result<(DerivedSummary, Result<DerivedSummary>)> {
    if n_exceed == 0 {
        return Err(Error::EmptySample("no exceedances: VaR undefined".into()));
    }
    let (ix, is) = gpd_columns(chain)?;
    let ratio = n_total as f64 / n_exceed as f64;
    let gpd = |d: &[f64]| GpdParams {
        xi: d[ix],
        sigma: d[is],
        u,
    };
    let var = posterior_transform(chain, level, |d| var_pot_ratio(&gpd(d), ratio, tail.0))?;
    let es = posterior_transform(chain, level, |d| {
        let p = gpd(d);
        es_pot(var_pot_ratio(&p, ratio, tail.0), &p)
    });
    Ok((var, es))
}

fn col(chain: &Chain, name: &str) -> Result<usize> {
    chain
        .index_of(name)
        .ok_or_else(|| Error::Config(format!("chain has no '{name}' column")))
}

fn gev_columns(chain: &Chain) -> Result<(usize, usize, usize)> {
    Ok((col(chain, "xi")?, col(chain, "mu")?, col(chain, "sigma")?))
}

fn gpd_columns(chain: &Chain) -> Result<(usize, usize)> {
    Ok((col(chain, "xi")?, col(chain, "sigma")?))
}

/// GEV parameters at the posterior mean of a chain.
pub fn plug_in_gev(chain: &Chain) -> Result<GevParams> {
    let (a, b, c) = gev_columns(chain)?;
    let m = chain.mean();
    Ok(GevParams {
        xi: m[a],
        mu: m[b],
        sigma: m[c],
    })
}

/// GPD parameters at the posterior mean of a chain.
pub fn plug_in_gpd(chain: &Chain, u: f64) -> Result<GpdParams> {
    let (a, b) = gpd_columns(chain)?;
    let m = chain.mean();
    Ok(GpdParams {
        xi: m[a],
        sigma: m[b],
        u,
    })
}
