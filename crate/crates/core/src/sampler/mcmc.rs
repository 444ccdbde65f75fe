//! Component-wise random-walk Metropolis sampler.
//!
//! Every sweep updates each coordinate in turn with a Gaussian step, then
//! tries each joint move the target declares (a step along a fixed direction
//! in parameter space). Step sizes adapt during burn-in toward an acceptance
//! rate of [`TARGET_ACCEPTANCE`] and are frozen afterwards, so the retained
//! draws come from a fixed, symmetric-proposal Metropolis kernel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::prior::{Prior, PriorSpec};
use crate::error::{Error, Result};

pub const TARGET_ACCEPTANCE: f64 = 0.3;
const ADAPT_BATCH: usize = 50;

/// A posterior target: a likelihood over named coordinates, an optional
/// hierarchical density for latent coordinates, and optional joint moves.
pub trait Target: Sync {
    /// Labels of all coordinates, prior-carrying ones first.
    fn names(&self) -> Vec<String>;

    /// Number of leading coordinates that take their prior from a [`PriorSpec`].
    fn n_prior(&self) -> usize;

    /// Log-likelihood of the data given every coordinate (latent ones included).
    fn loglik(&self, theta: &[f64]) -> f64;

    /// Log-density of the latent coordinates given the hyperparameters.
    fn log_latent(&self, _theta: &[f64]) -> f64 {
        0.0
    }

    /// Directions for extra random-walk moves, as sparse `(index, weight)` lists.
    fn joint_moves(&self) -> Vec<Vec<(usize, f64)>> {
        Vec::new()
    }
}

/// Burn-in, retained-draw and thinning settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub burn_in: usize,
    pub n_draws: usize,
    pub thin: usize,
    pub seed: u64,
    /// Initial step size per coordinate; a scale-aware default when absent.
    #[serde(default)]
    pub proposal_sd: Option<Vec<f64>>,
    pub adapt: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            burn_in: 3000,
            n_draws: 20000,
            thin: 5,
            seed: 1,
            proposal_sd: None,
            adapt: true,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin < 1 || self.n_draws < self.thin {
            return Err(Error::Config(format!(
                "need n_draws >= thin >= 1 (n_draws={}, thin={})",
                self.n_draws, self.thin
            )));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        self.n_draws / self.thin
    }
}

/// Retained MCMC draws, one row per draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub names: Vec<String>,
    pub draws: Vec<Vec<f64>>,
    pub acceptance_rate: Vec<f64>,
    pub seed: u64,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.index_of(name)?;
        Some(self.draws.iter().map(|r| r[j]).collect())
    }

    pub fn column_at(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|r| r[j]).collect()
    }

    /// Coordinate-wise posterior mean.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.draws.len() as f64;
        let mut m = vec![0.0; self.names.len()];
        for row in &self.draws {
            for (a, x) in m.iter_mut().zip(row) {
                *a += x;
            }
        }
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// CSV with a header of parameter names and one draw per row. Numbers
    /// use the shortest representation that round-trips exactly.
    pub fn to_csv(&self) -> String {
        let mut s = self.names.join(",");
        s.push('\n');
        for row in &self.draws {
            let line: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    /// Parses [`Chain::to_csv`] output; lines starting with `#` are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::EmptySample("chain CSV has no header".into()))?;
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut draws = Vec::new();
        for (i, line) in lines {
            let row = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Config(format!("chain CSV line {}: {e}", i + 1)))?;
            if row.len() != names.len() {
                return Err(Error::Config(format!(
                    "chain CSV line {}: expected {} fields, found {}",
                    i + 1,
                    names.len(),
                    row.len()
                )));
            }
            draws.push(row);
        }
        let d = names.len();
        Ok(Self {
            names,
            draws,
            acceptance_rate: vec![f64::NAN; d],
            seed: 0,
        })
    }
}

fn default_step(x: f64) -> f64 {
    (0.1 * x.abs()).max(0.05)
}

struct Posterior<'a, T: Target + ?Sized> {
    target: &'a T,
    priors: Vec<Prior>,
}

impl<T: Target + ?Sized> Posterior<'_, T> {
    fn log_density(&self, theta: &[f64]) -> f64 {
        let mut lp = 0.0;
        for (p, &x) in self.priors.iter().zip(theta) {
            lp += p.ln_pdf(x);
        }
        if lp == f64::NEG_INFINITY || lp.is_nan() {
            return f64::NEG_INFINITY;
        }
        let latent = self.target.log_latent(theta);
        if latent == f64::NEG_INFINITY || latent.is_nan() {
            return f64::NEG_INFINITY;
        }
        let ll = self.target.loglik(theta);
        if ll.is_nan() {
            return f64::NEG_INFINITY;
        }
        lp + latent + ll
    }
}

/// Metropolis accept/reject for a log-density difference. A NaN difference
/// rejects; `+inf` accepts.
fn accept<R: Rng + ?Sized>(rng: &mut R, delta: f64) -> bool {
    if delta.is_nan() {
        return false;
    }
    if delta >= 0.0 {
        return true;
    }
    let u: f64 = rng.random();
    u.ln() < delta
}

struct Step {
    scale: f64,
    batch_accepts: usize,
    batch_tries: usize,
    accepts: usize,
    tries: usize,
}

impl Step {
    fn new(scale: f64) -> Self {
        Self {
            scale,
            batch_accepts: 0,
            batch_tries: 0,
            accepts: 0,
            tries: 0,
        }
    }

    fn record(&mut self, accepted: bool, counting: bool) {
        self.batch_tries += 1;
        self.batch_accepts += usize::from(accepted);
        if counting {
            self.tries += 1;
            self.accepts += usize::from(accepted);
        }
    }

    fn adapt(&mut self, batch_no: usize) {
        let rate = self.batch_accepts as f64 / self.batch_tries.max(1) as f64;
        let delta = (1.0 / (batch_no as f64).sqrt()).clamp(0.02, 0.5);
        if rate > TARGET_ACCEPTANCE {
            self.scale *= delta.exp();
        } else {
            self.scale /= delta.exp();
        }
        self.batch_accepts = 0;
        self.batch_tries = 0;
    }

    fn rate(&self) -> f64 {
        if self.tries == 0 {
            0.0
        } else {
            self.accepts as f64 / self.tries as f64
        }
    }
}

/// Runs the sampler from `init`, discarding `burn_in` sweeps and keeping
/// every `thin`-th of the following `n_draws` sweeps.
pub fn metropolis_run<T, R>(
    target: &T,
    priors: &PriorSpec,
    init: &[f64],
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Chain>
where
    T: Target + ?Sized,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let names = target.names();
    let d = names.len();
    if init.len() != d {
        return Err(Error::Config(format!(
            "initial state has {} coordinates, target has {d}",
            init.len()
        )));
    }
    let post = Posterior {
        target,
        priors: priors.aligned(&names[..target.n_prior()])?,
    };

    let mut cur = init.to_vec();
    let mut cur_lp = post.log_density(&cur);
    if !cur_lp.is_finite() {
        return Err(Error::Infeasible(format!(
            "log posterior at the initial state is {cur_lp}"
        )));
    }

    let mut steps: Vec<Step> = match &cfg.proposal_sd {
        Some(sd) if sd.len() == d => sd.iter().map(|&s| Step::new(s)).collect(),
        Some(sd) => {
            return Err(Error::Config(format!(
                "proposal_sd has {} entries, target has {d}",
                sd.len()
            )))
        }
        None => cur.iter().map(|&x| Step::new(default_step(x))).collect(),
    };
    let moves = target.joint_moves();
    let mut move_steps: Vec<Step> = moves.iter().map(|_| Step::new(0.1)).collect();

    let total = cfg.burn_in + cfg.n_draws;
    let mut draws = Vec::with_capacity(cfg.retained());
    let mut batch_no = 0;
    let mut saved = Vec::new();

    for it in 0..total {
        let sampling = it >= cfg.burn_in;

        for j in 0..d {
            let old = cur[j];
            let eps: f64 = rng.sample(StandardNormal);
            cur[j] = old + steps[j].scale * eps;
            let lp = post.log_density(&cur);
            let ok = accept(rng, lp - cur_lp);
            if ok {
                cur_lp = lp;
            } else {
                cur[j] = old;
            }
            steps[j].record(ok, sampling);
        }

        for (dir, step) in moves.iter().zip(move_steps.iter_mut()) {
            let eps: f64 = rng.sample::<f64, _>(StandardNormal) * step.scale;
            saved.clear();
            for &(j, w) in dir {
                saved.push(cur[j]);
                cur[j] += eps * w;
            }
            let lp = post.log_density(&cur);
            let ok = accept(rng, lp - cur_lp);
            if ok {
                cur_lp = lp;
            } else {
                for (&(j, _), &v) in dir.iter().zip(&saved) {
                    cur[j] = v;
                }
            }
            step.record(ok, sampling);
        }

        if !sampling && cfg.adapt && (it + 1) % ADAPT_BATCH == 0 {
            batch_no += 1;
            steps.iter_mut().for_each(|s| s.adapt(batch_no));
            move_steps.iter_mut().for_each(|s| s.adapt(batch_no));
        }

        if sampling && (it - cfg.burn_in + 1).is_multiple_of(cfg.thin) {
            draws.push(cur.clone());
        }
    }

    Ok(Chain {
        names,
        draws,
        acceptance_rate: steps.iter().map(Step::rate).collect(),
        seed: cfg.seed,
    })
}

/// [`metropolis_run`] with a ChaCha8 generator seeded from `cfg.seed`.
pub fn run_seeded<T: Target + ?Sized>(
    target: &T,
    priors: &PriorSpec,
    init: &[f64],
    cfg: &SamplerConfig,
) -> Result<Chain> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    metropolis_run(target, priors, init, cfg, &mut rng)
}
