//! End-to-end fitting: build the target, run the sampler, summarise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{ExceedanceSample, ExtremesSample};
use crate::model::{EffectKind, GevModel, GpdModel, MarginalIntegrator, DEFAULT_QUAD_ORDER};
use crate::sampler::{
    default_priors, dic, run_seeded, summarize, Chain, ModelKind, PosteriorSummary, PriorSpec,
    SamplerConfig, Target,
};

/// Sampler settings plus summary options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub sampler: SamplerConfig,
    pub quad_order: usize,
    /// Credible level of the HPD intervals.
    pub level: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            sampler: SamplerConfig::default(),
            quad_order: DEFAULT_QUAD_ORDER,
            level: 0.95,
        }
    }
}

/// Chain and summary of one fit.
#[derive(Debug, Clone)]
pub struct Fit {
    pub chain: Chain,
    pub summary: PosteriorSummary,
    pub priors: PriorSpec,
}

impl Fit {
    /// Chain restricted to the prior-carrying parameters.
    pub fn param_chain(&self) -> Chain {
        let k = self.summary.params.len();
        Chain {
            names: self.chain.names[..k].to_vec(),
            draws: self.chain.draws.iter().map(|d| d[..k].to_vec()).collect(),
            acceptance_rate: self.chain.acceptance_rate[..k].to_vec(),
            seed: self.chain.seed,
        }
    }
}

pub fn model_kind(kind: EffectKind) -> ModelKind {
    match kind {
        EffectKind::None => ModelKind::GevFixed,
        EffectKind::Location => ModelKind::GevLocation,
        EffectKind::LocationScale => ModelKind::GevLocationScale,
    }
}

/// Priors for `kind`: entries of `given` where present, flat defaults for
/// the rest. Entries for parameters the model lacks are an error.
pub fn resolve_priors(given: Option<&PriorSpec>, kind: ModelKind) -> Result<PriorSpec> {
    let defaults = default_priors(kind);
    let Some(given) = given else {
        return Ok(defaults);
    };
    if let Some(extra) = given.names().find(|n| defaults.get(n).is_none()) {
        return Err(Error::Config(format!(
            "prior given for '{extra}', which this model does not have"
        )));
    }
    let mut out = PriorSpec::new();
    for (name, flat) in defaults.iter() {
        out.insert(name, *given.get(name).unwrap_or(flat));
    }
    Ok(out)
}

fn run_with_fallback<T: Target>(
    target: &T,
    priors: &PriorSpec,
    init: Vec<f64>,
    cfg: &SamplerConfig,
) -> Result<Chain> {
    match run_seeded(target, priors, &init, cfg) {
        Err(Error::Infeasible(msg)) => {
            log::warn!("initial state infeasible ({msg}); retrying with xi = 0");
            let mut alt = init;
            alt[0] = 0.0;
            run_seeded(target, priors, &alt, cfg)
        }
        other => other,
    }
}

/// Fits a GEV model with the given random-effect structure.
pub fn fit_gev(
    sample: &ExtremesSample,
    kind: EffectKind,
    priors: Option<&PriorSpec>,
    opts: &FitOptions,
) -> Result<Fit> {
    let model = GevModel::new(sample, kind)?;
    let priors = resolve_priors(priors, model_kind(kind))?;
    let chain = run_with_fallback(&model, &priors, model.initial_state(), &opts.sampler)?;
    let mut summary = summarize(&chain, model.n_prior(), opts.level)?;
    summary.dic = Some(dic(&chain, &model)?);
    let integ = MarginalIntegrator::new(opts.quad_order)?;
    summary.loglik_at_mean = Some(model.marginal_loglik(&chain.mean(), &integ));
    Ok(Fit {
        chain,
        summary,
        priors,
    })
}

/// Fits a GPD to threshold excesses.
pub fn fit_gpd(sample: &ExceedanceSample, priors: Option<&PriorSpec>, opts: &FitOptions) -> Result<Fit> {
    let model = GpdModel::new(sample)?;
    let priors = resolve_priors(priors, ModelKind::Gpd)?;
    let chain = run_with_fallback(&model, &priors, model.initial_state(), &opts.sampler)?;
    let mut summary = summarize(&chain, 2, opts.level)?;
    summary.dic = Some(dic(&chain, &model)?);
    summary.loglik_at_mean = Some(model.loglik(&chain.mean()));
    Ok(Fit {
        chain,
        summary,
        priors,
    })
}
