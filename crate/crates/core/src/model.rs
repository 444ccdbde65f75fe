//! Log-likelihoods for GEV block maxima under fixed, location and correlated
//! location+scale random effects, and for GPD threshold excesses.
//!
//! With location effects the observations of group `i` share the location
//! `mu + delta_i`, `delta_i ~ N(0, tau2)`; the marginal likelihood integrates
//! each group's product of densities against that normal. With
//! location+scale effects `(delta1_i, delta2_i) ~ N2(theta, Sigma)` shift the
//! location and the scale, and draws leaving `sigma + delta2_i <= 0` have
//! zero likelihood.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evd::{GevParams, GpdParams, EULER_GAMMA, XI_ZERO_TOL};
use crate::extract::{ExceedanceSample, ExtremesSample};
use crate::quadrature::{GaussHermite, LogSumExp};
use crate::sampler::Target;
use crate::stats;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Default Gauss–Hermite order for marginal likelihoods.
pub const DEFAULT_QUAD_ORDER: usize = 30;

/// Random-effect structure of a GEV model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectKind {
    None,
    Location,
    LocationScale,
}

impl EffectKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EffectKind::None => "none",
            EffectKind::Location => "location",
            EffectKind::LocationScale => "location-scale",
        }
    }
}

impl std::str::FromStr for EffectKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(EffectKind::None),
            "location" => Ok(EffectKind::Location),
            "location-scale" => Ok(EffectKind::LocationScale),
            other => Err(Error::Config(format!("unknown random-effects kind '{other}'"))),
        }
    }
}

/// Effect structure plus the grouping that defines `i = 1..I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomEffectsSpec {
    pub kind: EffectKind,
    pub group_key: crate::extract::GroupSpec,
}

/// Variance of the location effects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocationREParams {
    pub tau2: f64,
}

impl LocationREParams {
    pub fn new(tau2: f64) -> Result<Self> {
        if tau2 > 0.0 && tau2.is_finite() {
            Ok(Self { tau2 })
        } else {
            Err(Error::InvalidParameter(format!("tau2 must be positive, got {tau2}")))
        }
    }
}

/// Bivariate normal hyperparameters of `(delta1_i, delta2_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocScaleREParams {
    pub theta1: f64,
    pub theta2: f64,
    pub tau1_2: f64,
    pub tau2_2: f64,
    pub rho: f64,
}

impl LocScaleREParams {
    pub fn new(theta1: f64, theta2: f64, tau1_2: f64, tau2_2: f64, rho: f64) -> Result<Self> {
        let p = Self {
            theta1,
            theta2,
            tau1_2,
            tau2_2,
            rho,
        };
        if p.is_valid() {
            Ok(p)
        } else {
            Err(Error::InvalidParameter(format!(
                "need tau1_2 > 0, tau2_2 > 0 and |rho| < 1, got {p:?}"
            )))
        }
    }

    fn is_valid(&self) -> bool {
        self.tau1_2 > 0.0
            && self.tau2_2 > 0.0
            && self.rho.abs() < 1.0
            && self.theta1.is_finite()
            && self.theta2.is_finite()
    }

    /// Lower Cholesky factor `(l11, l21, l22)` of the covariance.
    fn cholesky(&self) -> (f64, f64, f64) {
        let t1 = self.tau1_2.sqrt();
        let t2 = self.tau2_2.sqrt();
        (t1, self.rho * t2, t2 * (1.0 - self.rho * self.rho).sqrt())
    }

    fn ln_pdf(&self, d1: f64, d2: f64) -> f64 {
        let (l11, l21, l22) = self.cholesky();
        let z1 = (d1 - self.theta1) / l11;
        let z2 = (d2 - self.theta2 - l21 * z1) / l22;
        -LN_2PI - l11.ln() - l22.ln() - 0.5 * (z1 * z1 + z2 * z2)
    }
}

/// Per-group latent effects, ordered like [`ExtremesSample::groups`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LatentEffects {
    Location(Vec<f64>),
    LocationScale(Vec<(f64, f64)>),
}

fn normal_ln_pdf(x: f64, var: f64) -> f64 {
    -0.5 * (LN_2PI + var.ln()) - 0.5 * x * x / var
}

/// Sum of GEV log-densities; stops at the first point outside the support.
pub fn gev_loglik_values(p: &GevParams, ys: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &y in ys {
        let l = p.logpdf(y);
        if l == f64::NEG_INFINITY {
            return l;
        }
        acc += l;
    }
    acc
}

fn shifted(p: &GevParams, dmu: f64, dsigma: f64) -> GevParams {
    GevParams {
        xi: p.xi,
        mu: p.mu + dmu,
        sigma: p.sigma + dsigma,
    }
}

/// Fixed-effects log-likelihood.
pub fn gev_loglik_fixed(p: &GevParams, sample: &ExtremesSample) -> f64 {
    gev_loglik_values(p, &sample.values())
}

fn conditional_grouped(p: &GevParams, re: &LatentEffects, groups: &[Vec<f64>]) -> Result<f64> {
    let n = match re {
        LatentEffects::Location(d) => d.len(),
        LatentEffects::LocationScale(d) => d.len(),
    };
    if n != groups.len() {
        return Err(Error::Config(format!(
            "{n} latent effects given for {} groups",
            groups.len()
        )));
    }
    let mut acc = 0.0;
    for (i, ys) in groups.iter().enumerate() {
        let gp = match re {
            LatentEffects::Location(d) => shifted(p, d[i], 0.0),
            LatentEffects::LocationScale(d) => {
                let s = p.sigma + d[i].1;
                if !(s > 0.0) {
                    return Ok(f64::NEG_INFINITY);
                }
                shifted(p, d[i].0, d[i].1)
            }
        };
        acc += gev_loglik_values(&gp, ys);
        if acc == f64::NEG_INFINITY {
            break;
        }
    }
    Ok(acc)
}

/// Log-likelihood conditional on given latent effects.
pub fn gev_loglik_conditional(
    p: &GevParams,
    re: &LatentEffects,
    sample: &ExtremesSample,
) -> Result<f64> {
    let groups: Vec<Vec<f64>> = sample.groups().into_iter().map(|(_, v)| v).collect();
    conditional_grouped(p, re, &groups)
}

/// Integrates location effects out of the likelihood, group by group.
///
/// The adaptive rule starts at the requested order and doubles it (up to
/// eight times the start, capped at [`GaussHermite::MAX_ORDER`]) until two
/// successive estimates agree to [`REFINE_TOL`].
#[derive(Debug, Clone)]
pub struct MarginalIntegrator {
    gh: GaussHermite,
    refined: Vec<GaussHermite>,
}

/// Agreement required between successive adaptive estimates.
pub const REFINE_TOL: f64 = 1e-10;

impl MarginalIntegrator {
    pub fn new(order: usize) -> Result<Self> {
        if !(5..=GaussHermite::MAX_ORDER).contains(&order) {
            return Err(Error::Config(format!(
                "quadrature order must lie in 5..={}, got {order}",
                GaussHermite::MAX_ORDER
            )));
        }
        Ok(Self {
            gh: GaussHermite::new(order),
            refined: [2, 4, 8]
                .iter()
                .map(|k| k * order)
                .filter(|&n| n <= GaussHermite::MAX_ORDER)
                .map(GaussHermite::new)
                .collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.gh.order()
    }

    /// `log ∫ Π_l f(y_l | mu + d) N(d; 0, tau2) dd` by non-adaptive Gauss–Hermite.
    pub fn log_group_plain(&self, p: &GevParams, tau2: f64, ys: &[f64]) -> f64 {
        let scale = (2.0 * tau2).sqrt();
        let mut acc = LogSumExp::default();
        for (x, lw) in self.gh.iter_ln_scaled() {
            acc.add(lw - x * x + gev_loglik_values(&shifted(p, scale * x, 0.0), ys));
        }
        acc.value() - 0.5 * LN_PI
    }

    /// Same integral with the rule recentred at the integrand's mode and
    /// rescaled by its curvature; falls back to [`Self::log_group_plain`].
    ///
    /// When `xi != 0` the integrand vanishes at a finite support bound `b`
    /// without being smooth there, so the rule is applied in `t` with
    /// `delta = b ± e^t` instead.
    pub fn log_group(&self, p: &GevParams, tau2: f64, ys: &[f64]) -> f64 {
        match self.log_group_adaptive(p, tau2, ys) {
            Some(v) => v,
            None => self.log_group_plain(p, tau2, ys),
        }
    }

    fn log_group_adaptive(&self, p: &GevParams, tau2: f64, ys: &[f64]) -> Option<f64> {
        let h = |d: f64| gev_loglik_values(&shifted(p, d, 0.0), ys) + normal_ln_pdf(d, tau2);
        let tau = tau2.sqrt();
        let n = ys.len() as f64;
        let s0 = 1.0 / (n / (p.sigma * p.sigma) + 1.0 / tau2).sqrt();

        // the mode sits between the prior centre 0 and the data-implied shift
        let c = stats::mean(ys) - p.mu - EULER_GAMMA * p.sigma;
        let mut a = c.min(0.0) - 8.0 * tau - 8.0 * s0;
        let mut b = c.max(0.0) + 8.0 * tau + 8.0 * s0;
        let bound = if p.xi > XI_ZERO_TOL {
            let ymin = ys.iter().cloned().fold(f64::INFINITY, f64::min);
            let bd = ymin - p.mu + p.sigma / p.xi;
            b = b.min(bd - 1e-12 * (1.0 + bd.abs()));
            Some((bd, -1.0))
        } else if p.xi < -XI_ZERO_TOL {
            let ymax = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let bd = ymax - p.mu + p.sigma / p.xi;
            a = a.max(bd + 1e-12 * (1.0 + bd.abs()));
            Some((bd, 1.0))
        } else {
            None
        };
        let (m, s) = mode_and_scale(&h, a, b, s0)?;
        match bound {
            // a bound within reach of the rule: integrate in t, delta = bd + dir·e^t
            Some((bd, dir)) if (m - bd).abs() < 12.0 * s => {
                let g = |t: f64| h(bd + dir * t.exp()) + t;
                let dist = (m - bd).abs();
                let far = if dir > 0.0 { b - bd } else { bd - a };
                let lo = (1e-12 * far).ln();
                let (mt, st) = mode_and_scale(&g, lo, far.ln(), (s / dist).max(1e-6))?;
                self.refine(&g, mt, st)
            }
            _ => self.refine(&h, m, s),
        }
    }

    /// `log ∫ e^{f}` by Gauss–Hermite centred at `m` with spread `s`,
    /// doubling the order until successive estimates agree.
    fn refine(&self, f: &impl Fn(f64) -> f64, m: f64, s: f64) -> Option<f64> {
        let r = std::f64::consts::SQRT_2 * s;
        let rule = |gh: &GaussHermite| {
            let mut acc = LogSumExp::default();
            for (x, lw) in gh.iter_ln_scaled() {
                acc.add(lw + f(m + r * x));
            }
            acc.value() + r.ln()
        };
        let mut v = rule(&self.gh);
        for gh in &self.refined {
            let next = rule(gh);
            let done = (next - v).abs() <= REFINE_TOL * (1.0 + next.abs());
            v = next;
            if done {
                break;
            }
        }
        v.is_finite().then_some(v)
    }

    /// Marginal log-likelihood over all groups.
    pub fn loglik(&self, p: &GevParams, tau2: f64, groups: &[Vec<f64>]) -> f64 {
        let mut acc = 0.0;
        for ys in groups {
            acc += self.log_group(p, tau2, ys);
            if acc == f64::NEG_INFINITY {
                break;
            }
        }
        acc
    }

    /// Tensor-product rule over the bivariate location/scale effects.
    pub fn loglik_loc_scale(&self, p: &GevParams, hyper: &LocScaleREParams, groups: &[Vec<f64>]) -> f64 {
        let (l11, l21, l22) = hyper.cholesky();
        let r2 = std::f64::consts::SQRT_2;
        let mut total = 0.0;
        for ys in groups {
            let mut acc = LogSumExp::default();
            for (xa, wa) in self.gh.iter() {
                for (xb, wb) in self.gh.iter() {
                    let (za, zb) = (r2 * xa, r2 * xb);
                    let d1 = hyper.theta1 + l11 * za;
                    let d2 = hyper.theta2 + l21 * za + l22 * zb;
                    if p.sigma + d2 <= 0.0 {
                        continue;
                    }
                    acc.add(wa.ln() + wb.ln() + gev_loglik_values(&shifted(p, d1, d2), ys));
                }
            }
            total += acc.value() - LN_PI;
            if total == f64::NEG_INFINITY {
                break;
            }
        }
        total
    }

    /// Marginal (mixture) cdf of one observation under location effects.
    pub fn marginal_cdf(&self, p: &GevParams, tau2: f64, y: f64) -> f64 {
        let scale = (2.0 * tau2).sqrt();
        self.gh
            .iter()
            .map(|(x, w)| w * shifted(p, scale * x, 0.0).cdf(y))
            .sum::<f64>()
            / std::f64::consts::PI.sqrt()
    }

    /// Marginal cdf under location+scale effects.
    pub fn marginal_cdf_loc_scale(&self, p: &GevParams, hyper: &LocScaleREParams, y: f64) -> f64 {
        let (l11, l21, l22) = hyper.cholesky();
        let r2 = std::f64::consts::SQRT_2;
        let mut acc = 0.0;
        let mut mass = 0.0;
        for (xa, wa) in self.gh.iter() {
            for (xb, wb) in self.gh.iter() {
                let (za, zb) = (r2 * xa, r2 * xb);
                let d1 = hyper.theta1 + l11 * za;
                let d2 = hyper.theta2 + l21 * za + l22 * zb;
                if p.sigma + d2 <= 0.0 {
                    continue;
                }
                acc += wa * wb * shifted(p, d1, d2).cdf(y);
                mass += wa * wb;
            }
        }
        acc / mass
    }
}

/// Maximiser of `f` on `[lo, hi]` and the spread `1/sqrt(-f'')` there.
fn mode_and_scale(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, s0: f64) -> Option<(f64, f64)> {
    if !(lo < hi) {
        return None;
    }
    let m = golden_max(f, lo, hi, 1e-8 * s0);
    let fm = f(m);
    if !fm.is_finite() {
        return None;
    }
    let mut s = s0;
    for _ in 0..3 {
        let e = 0.5 * s;
        let d2 = (f(m + e) - 2.0 * fm + f(m - e)) / (e * e);
        if !(d2 < 0.0) || !d2.is_finite() {
            return None;
        }
        s = 1.0 / (-d2).sqrt();
    }
    Some((m, s))
}

/// Golden-section search for the maximiser of `f` on `[a, b]`.
fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..300 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Marginal log-likelihood with location effects integrated out.
pub fn gev_loglik_marginal(
    p: &GevParams,
    hyper: &LocationREParams,
    sample: &ExtremesSample,
    quad_order: usize,
) -> Result<f64> {
    let integ = MarginalIntegrator::new(quad_order)?;
    let groups: Vec<Vec<f64>> = sample.groups().into_iter().map(|(_, v)| v).collect();
    Ok(integ.loglik(p, hyper.tau2, &groups))
}

/// Marginal log-likelihood with location+scale effects integrated out.
pub fn gev_loglik_marginal_loc_scale(
    p: &GevParams,
    hyper: &LocScaleREParams,
    sample: &ExtremesSample,
    quad_order: usize,
) -> Result<f64> {
    let integ = MarginalIntegrator::new(quad_order)?;
    let groups: Vec<Vec<f64>> = sample.groups().into_iter().map(|(_, v)| v).collect();
    Ok(integ.loglik_loc_scale(p, hyper, &groups))
}

/// GPD log-likelihood of the excesses (location pinned at the threshold).
pub fn gpd_loglik(p: &GpdParams, sample: &ExceedanceSample) -> f64 {
    gpd_loglik_values(p.xi, p.sigma, &sample.excesses)
}

fn gpd_loglik_values(xi: f64, sigma: f64, excesses: &[f64]) -> f64 {
    let p = GpdParams { xi, sigma, u: 0.0 };
    let mut acc = 0.0;
    for &y in excesses {
        let l = p.logpdf(y);
        if l == f64::NEG_INFINITY {
            return l;
        }
        acc += l;
    }
    acc
}

// ---------------------------------------------------------------------------
// Sampler targets
// ---------------------------------------------------------------------------

/// GEV block-maxima model over a grouped sample.
#[derive(Debug, Clone)]
pub struct GevModel {
    kind: EffectKind,
    labels: Vec<String>,
    groups: Vec<Vec<f64>>,
    all: Vec<f64>,
}

const FIXED_NAMES: [&str; 3] = ["xi", "mu", "sigma"];
const LOCATION_NAMES: [&str; 4] = ["xi", "mu", "sigma", "tau2"];
const LOC_SCALE_NAMES: [&str; 8] = [
    "xi", "mu", "sigma", "theta1", "theta2", "tau1_2", "tau2_2", "rho",
];

impl GevModel {
    pub fn new(sample: &ExtremesSample, kind: EffectKind) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample("no block maxima to fit".into()));
        }
        let (labels, groups) = sample.groups().into_iter().unzip();
        Ok(Self {
            kind,
            labels,
            groups,
            all: sample.values(),
        })
    }

    pub fn kind(&self) -> EffectKind {
        self.kind
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn groups(&self) -> &[Vec<f64>] {
        &self.groups
    }

    pub fn values(&self) -> &[f64] {
        &self.all
    }

    /// Names of the prior-carrying (non-latent) parameters.
    pub fn param_names(&self) -> &'static [&'static str] {
        match self.kind {
            EffectKind::None => &FIXED_NAMES,
            EffectKind::Location => &LOCATION_NAMES,
            EffectKind::LocationScale => &LOC_SCALE_NAMES,
        }
    }

    /// Shape, population location and scale from a parameter vector.
    pub fn gev_params(&self, theta: &[f64]) -> GevParams {
        GevParams {
            xi: theta[0],
            mu: theta[1],
            sigma: theta[2],
        }
    }

    pub fn loc_scale_hyper(&self, theta: &[f64]) -> Option<LocScaleREParams> {
        (self.kind == EffectKind::LocationScale).then(|| LocScaleREParams {
            theta1: theta[3],
            theta2: theta[4],
            tau1_2: theta[5],
            tau2_2: theta[6],
            rho: theta[7],
        })
    }

    pub fn latent(&self, theta: &[f64]) -> Option<LatentEffects> {
        let k = self.param_names().len();
        match self.kind {
            EffectKind::None => None,
            EffectKind::Location => Some(LatentEffects::Location(theta[k..].to_vec())),
            EffectKind::LocationScale => Some(LatentEffects::LocationScale(
                theta[k..].chunks(2).map(|c| (c[0], c[1])).collect(),
            )),
        }
    }

    /// Log-likelihood with latent effects integrated out (equal to the
    /// conditional one for the fixed model). Only the leading parameters of
    /// `theta` are read.
    pub fn marginal_loglik(&self, theta: &[f64], integ: &MarginalIntegrator) -> f64 {
        let p = self.gev_params(theta);
        match self.kind {
            EffectKind::None => gev_loglik_values(&p, &self.all),
            EffectKind::Location => {
                if !(theta[3] > 0.0) || !(p.sigma > 0.0) {
                    return f64::NEG_INFINITY;
                }
                integ.loglik(&p, theta[3], &self.groups)
            }
            EffectKind::LocationScale => {
                let h = self.loc_scale_hyper(theta).expect("location-scale");
                if !h.is_valid() || !(p.sigma > 0.0) {
                    return f64::NEG_INFINITY;
                }
                integ.loglik_loc_scale(&p, &h, &self.groups)
            }
        }
    }

    /// Moment-based starting point: `mu` at the mean, `sigma = sd·√6/π`,
    /// `xi = 0.1` (or 0 when 0.1 leaves a point outside the support).
    pub fn initial_state(&self) -> Vec<f64> {
        let m = stats::mean(&self.all);
        let sd_all = stats::sd(&self.all).max(1e-3);
        let k = std::f64::consts::PI / 6f64.sqrt();
        let means: Vec<f64> = self.groups.iter().map(|g| stats::mean(g)).collect();
        let deltas: Vec<f64> = means.iter().map(|gm| gm - m).collect();
        let within = {
            let resid: Vec<f64> = self
                .groups
                .iter()
                .zip(&means)
                .flat_map(|(g, gm)| g.iter().map(move |y| y - gm))
                .collect();
            let s = stats::sd(&resid);
            if s > 1e-3 { s } else { sd_all }
        };
        let tau2 = (stats::sd(&deltas).powi(2)).max(0.01);
        let mut theta = match self.kind {
            EffectKind::None => vec![0.1, m, sd_all / k],
            EffectKind::Location => {
                let mut t = vec![0.1, m, within / k, tau2];
                t.extend(&deltas);
                t
            }
            EffectKind::LocationScale => {
                let sigma = within / k;
                let mut t = vec![0.1, m, sigma, 0.0, 0.0, tau2, 0.1 * sigma * sigma, 0.0];
                for d in &deltas {
                    t.push(*d);
                    t.push(0.0);
                }
                t
            }
        };
        if !self.loglik(&theta).is_finite() {
            theta[0] = 0.0;
        }
        theta
    }
}

impl Target for GevModel {
    fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.param_names().iter().map(|s| s.to_string()).collect();
        for i in 1..=self.groups.len() {
            match self.kind {
                EffectKind::None => {}
                EffectKind::Location => names.push(format!("delta[{i}]")),
                EffectKind::LocationScale => {
                    names.push(format!("delta1[{i}]"));
                    names.push(format!("delta2[{i}]"));
                }
            }
        }
        names
    }

    fn n_prior(&self) -> usize {
        self.param_names().len()
    }

    fn loglik(&self, theta: &[f64]) -> f64 {
        let p = self.gev_params(theta);
        if !(p.sigma > 0.0) {
            return f64::NEG_INFINITY;
        }
        match self.kind {
            EffectKind::None => gev_loglik_values(&p, &self.all),
            EffectKind::Location => {
                let mut acc = 0.0;
                for (ys, d) in self.groups.iter().zip(&theta[4..]) {
                    acc += gev_loglik_values(&shifted(&p, *d, 0.0), ys);
                    if acc == f64::NEG_INFINITY {
                        break;
                    }
                }
                acc
            }
            EffectKind::LocationScale => {
                let mut acc = 0.0;
                for (ys, d) in self.groups.iter().zip(theta[8..].chunks(2)) {
                    if !(p.sigma + d[1] > 0.0) {
                        return f64::NEG_INFINITY;
                    }
                    acc += gev_loglik_values(&shifted(&p, d[0], d[1]), ys);
                    if acc == f64::NEG_INFINITY {
                        break;
                    }
                }
                acc
            }
        }
    }

    fn log_latent(&self, theta: &[f64]) -> f64 {
        match self.kind {
            EffectKind::None => 0.0,
            EffectKind::Location => {
                let tau2 = theta[3];
                if !(tau2 > 0.0) {
                    return f64::NEG_INFINITY;
                }
                theta[4..].iter().map(|d| normal_ln_pdf(*d, tau2)).sum()
            }
            EffectKind::LocationScale => {
                let h = self.loc_scale_hyper(theta).expect("location-scale");
                if !h.is_valid() {
                    return f64::NEG_INFINITY;
                }
                theta[8..].chunks(2).map(|d| h.ln_pdf(d[0], d[1])).sum()
            }
        }
    }

    fn joint_moves(&self) -> Vec<Vec<(usize, f64)>> {
        match self.kind {
            // shift mu against every delta: group locations stay put
            EffectKind::Location => {
                let mut dir = vec![(1, 1.0)];
                dir.extend((0..self.groups.len()).map(|i| (4 + i, -1.0)));
                vec![dir]
            }
            _ => Vec::new(),
        }
    }
}

/// GPD model for threshold excesses; parameters `[xi, sigma]`.
#[derive(Debug, Clone)]
pub struct GpdModel {
    excesses: Vec<f64>,
    u: f64,
}

impl GpdModel {
    pub fn new(sample: &ExceedanceSample) -> Result<Self> {
        if sample.excesses.is_empty() {
            return Err(Error::EmptySample("no excesses to fit".into()));
        }
        Ok(Self {
            excesses: sample.excesses.clone(),
            u: sample.u,
        })
    }

    pub fn gpd_params(&self, theta: &[f64]) -> GpdParams {
        GpdParams {
            xi: theta[0],
            sigma: theta[1],
            u: self.u,
        }
    }

    pub fn initial_state(&self) -> Vec<f64> {
        vec![0.1, 0.9 * stats::mean(&self.excesses)]
    }
}

impl Target for GpdModel {
    fn names(&self) -> Vec<String> {
        vec!["xi".into(), "sigma".into()]
    }

    fn n_prior(&self) -> usize {
        2
    }

    fn loglik(&self, theta: &[f64]) -> f64 {
        if !(theta[1] > 0.0) {
            return f64::NEG_INFINITY;
        }
        gpd_loglik_values(theta[0], theta[1], &self.excesses)
    }
}
