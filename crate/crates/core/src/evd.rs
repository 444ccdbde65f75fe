//! Generalized extreme value (GEV) and generalized Pareto (GPD) kernels.
//!
//! Both families are parameterised by a shape `xi`. When `|xi|` drops below
//! [`XI_ZERO_TOL`] the exponential-limit (Gumbel / exponential) formulas are
//! used, which keeps `(1 + xi z)^(-1/xi)` away from catastrophic cancellation.
//!
//! Evaluation outside the support never errors: the cdf returns the limiting
//! value (0 or 1) and the log-density returns `f64::NEG_INFINITY`, so that a
//! Metropolis proposal stepping off the support is simply rejected.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this magnitude the shape is treated as exactly zero.
pub const XI_ZERO_TOL: f64 = 1e-8;

/// Gamma function, Lanczos approximation (relative error ~1e-15).
pub fn gamma_fn(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Mean of a distribution that may not have one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mean {
    Finite(f64),
    Infinite,
}

impl Mean {
    pub fn finite(self) -> Option<f64> {
        match self {
            Mean::Finite(m) => Some(m),
            Mean::Infinite => None,
        }
    }
}

#[inline]
fn is_zero_shape(xi: f64) -> bool {
    xi.abs() < XI_ZERO_TOL
}

fn check_probability(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability must lie in (0, 1), got {q}")))
    }
}

fn check_scale(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "scale must be positive and finite, got {sigma}"
        )))
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

// ---------------------------------------------------------------------------
// GEV
// ---------------------------------------------------------------------------

/// GEV parameters: shape `xi`, location `mu`, scale `sigma > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub xi: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl GevParams {
    pub fn new(xi: f64, mu: f64, sigma: f64) -> Result<Self> {
        check_finite("xi", xi)?;
        check_finite("mu", mu)?;
        check_scale(sigma)?;
        Ok(Self { xi, mu, sigma })
    }

    /// Open support interval `(lo, hi)`.
    pub fn support(&self) -> (f64, f64) {
        if is_zero_shape(self.xi) {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else if self.xi > 0.0 {
            (self.mu - self.sigma / self.xi, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, self.mu - self.sigma / self.xi)
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        let z = (y - self.mu) / self.sigma;
        if is_zero_shape(self.xi) {
            return (-(-z).exp()).exp();
        }
        let arg = self.xi * z;
        if arg <= -1.0 {
            // below the lower endpoint (xi > 0) or above the upper one (xi < 0)
            return if self.xi > 0.0 { 0.0 } else { 1.0 };
        }
        let lt = arg.ln_1p();
        (-(-lt / self.xi).exp()).exp()
    }

    pub fn logpdf(&self, y: f64) -> f64 {
        let z = (y - self.mu) / self.sigma;
        if is_zero_shape(self.xi) {
            return -self.sigma.ln() - z - (-z).exp();
        }
        let arg = self.xi * z;
        if arg <= -1.0 {
            return f64::NEG_INFINITY;
        }
        let lt = arg.ln_1p();
        -self.sigma.ln() - (1.0 + 1.0 / self.xi) * lt - (-lt / self.xi).exp()
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.logpdf(y).exp()
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        check_probability(q)?;
        Ok(self.quantile_unchecked(q))
    }

    /// Quantile without the domain check; `q` must lie in `(0, 1)`.
    pub(crate) fn quantile_unchecked(&self, q: f64) -> f64 {
        let w = -q.ln();
        if is_zero_shape(self.xi) {
            self.mu - self.sigma * w.ln()
        } else {
            self.mu + self.sigma * (-self.xi * w.ln()).exp_m1() / self.xi
        }
    }

    pub fn mean(&self) -> Mean {
        if self.xi >= 1.0 {
            Mean::Infinite
        } else if is_zero_shape(self.xi) {
            Mean::Finite(self.mu + self.sigma * EULER_GAMMA)
        } else {
            Mean::Finite(self.mu + self.sigma * (gamma_fn(1.0 - self.xi) - 1.0) / self.xi)
        }
    }

    /// Maps a uniform variate through the quantile function.
    pub fn from_uniform(&self, u: f64) -> f64 {
        self.quantile_unchecked(u)
    }

    /// `n` draws by inverse-transform sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.from_uniform(rng.sample(Open01))).collect()
    }
}

// ---------------------------------------------------------------------------
// GPD
// ---------------------------------------------------------------------------

/// GPD parameters: shape `xi`, scale `sigma > 0` and location (threshold) `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdParams {
    pub xi: f64,
    pub sigma: f64,
    pub u: f64,
}

impl GpdParams {
    pub fn new(xi: f64, sigma: f64, u: f64) -> Result<Self> {
        check_finite("xi", xi)?;
        check_finite("u", u)?;
        check_scale(sigma)?;
        Ok(Self { xi, sigma, u })
    }

    /// Support `[lo, hi)`; `hi` is finite only for negative shape.
    pub fn support(&self) -> (f64, f64) {
        if self.xi < 0.0 && !is_zero_shape(self.xi) {
            (self.u, self.u - self.sigma / self.xi)
        } else {
            (self.u, f64::INFINITY)
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        let x = (y - self.u) / self.sigma;
        if x <= 0.0 {
            return 0.0;
        }
        if is_zero_shape(self.xi) {
            return -(-x).exp_m1();
        }
        let arg = self.xi * x;
        if arg <= -1.0 {
            return 1.0;
        }
        -(-arg.ln_1p() / self.xi).exp_m1()
    }

    pub fn logpdf(&self, y: f64) -> f64 {
        let x = (y - self.u) / self.sigma;
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        if is_zero_shape(self.xi) {
            return -self.sigma.ln() - x;
        }
        let arg = self.xi * x;
        if arg <= -1.0 {
            return f64::NEG_INFINITY;
        }
        -self.sigma.ln() - (1.0 + 1.0 / self.xi) * arg.ln_1p()
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.logpdf(y).exp()
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        check_probability(q)?;
        Ok(self.quantile_unchecked(q))
    }

    pub(crate) fn quantile_unchecked(&self, q: f64) -> f64 {
        let l = (-q).ln_1p();
        if is_zero_shape(self.xi) {
            self.u - self.sigma * l
        } else {
            self.u + self.sigma * (-self.xi * l).exp_m1() / self.xi
        }
    }

    pub fn mean(&self) -> Mean {
        if self.xi >= 1.0 {
            Mean::Infinite
        } else {
            Mean::Finite(self.u + self.sigma / (1.0 - self.xi))
        }
    }

    pub fn from_uniform(&self, u: f64) -> f64 {
        self.quantile_unchecked(u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.from_uniform(rng.sample(Open01))).collect()
    }
}

/// Free-function form of [`GevParams::sample`].
pub fn sample_gev<R: Rng + ?Sized>(p: &GevParams, rng: &mut R, n: usize) -> Vec<f64> {
    p.sample(rng, n)
}

/// Free-function form of [`GpdParams::sample`].
pub fn sample_gpd<R: Rng + ?Sized>(p: &GpdParams, rng: &mut R, n: usize) -> Vec<f64> {
    p.sample(rng, n)
}
