//! Random-walk Metropolis sampling, priors and posterior summaries.

mod mcmc;
mod prior;
mod summary;

pub use mcmc::{metropolis_run, run_seeded, Chain, SamplerConfig, Target, TARGET_ACCEPTANCE};
pub use prior::{
    default_priors, log_prior, ModelKind, Prior, PriorSpec, FLAT_LOCATION, FLAT_SCALE,
    FLAT_VARIANCE,
};
pub use summary::{
    dic, dic_verdict, dic_with, equal_tailed_interval, hpd_interval, posterior_to_prior,
    summarize, Dic, DicComparison, DicVerdict, ParamSummary, PosteriorSummary, Which,
};
