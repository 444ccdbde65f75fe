//! Seeded data generators and replication studies: heterogeneous block
//! maxima with and without location effects, prior transfer between an
//! earlier and a later stretch of data, and threshold-based VaR/ES.
//!
//! Replications run in parallel. Each one draws from its own ChaCha8 stream
//! whose seed is derived from the study seed and the replication index, so a
//! report depends only on its configuration.

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evd::GevParams;
use crate::extract::{
    block_maxima, empirical_return_level_ci, empirical_return_level_values,
    empirical_var_es_values, BlockSpec, ExceedanceSample, ExtremesSample, GroupSpec, TimeSeries,
};
use crate::fit::{fit_gev, fit_gpd, Fit, FitOptions};
use crate::model::EffectKind;
use crate::risk::{
    return_level, return_level_posterior, var_es_posterior, DerivedSummary, ReturnPeriod,
    TailProb,
};
use crate::sampler::{posterior_to_prior, PosteriorSummary, PriorSpec, SamplerConfig};
use crate::stats::{self, MeanCi};

/// SplitMix64 finaliser applied to `seed` and `index`; gives independent
/// sub-seeds for replications and fits.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Daily normal returns over periods whose mean is shifted by a period
/// effect `e_i ~ N(0, tau^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioBM {
    pub periods: usize,
    pub years_per_period: usize,
    pub obs_per_year: usize,
    pub base_mean: f64,
    pub base_sd: f64,
    pub tau: f64,
    pub seed: u64,
}

impl Default for ScenarioBM {
    fn default() -> Self {
        Self {
            periods: 10,
            years_per_period: 5,
            obs_per_year: 3600,
            base_mean: 0.02,
            base_sd: 1.24,
            tau: 1.0,
            seed: 1,
        }
    }
}

impl ScenarioBM {
    pub fn validate(&self) -> Result<()> {
        if self.periods < 1 || self.years_per_period < 1 || self.obs_per_year < 1 {
            return Err(Error::Config("scenario counts must be at least 1".into()));
        }
        if !(self.base_sd > 0.0) || !(self.tau >= 0.0) {
            return Err(Error::Config("need base_sd > 0 and tau >= 0".into()));
        }
        Ok(())
    }
}

/// Draws straight from a GEV, split into an earlier and a later part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioGEVDirect {
    pub n: usize,
    pub params: GevParams,
    pub split: (usize, usize),
    pub seed: u64,
}

impl Default for ScenarioGEVDirect {
    fn default() -> Self {
        Self {
            n: 58,
            params: GevParams {
                xi: 0.18,
                mu: 2.41,
                sigma: 1.01,
            },
            split: (43, 15),
            seed: 1,
        }
    }
}

/// Daily normal observations analysed above a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioPOT {
    pub years: usize,
    pub obs_per_year: usize,
    pub mean: f64,
    pub sd: f64,
    pub u: f64,
    pub p: f64,
    pub split: (usize, usize),
    pub replications: usize,
    pub seed: u64,
}

impl Default for ScenarioPOT {
    fn default() -> Self {
        Self {
            years: 65,
            obs_per_year: 365,
            mean: 2.0,
            sd: 1.0,
            u: 4.0,
            p: 0.05,
            split: (60, 5),
            replications: 25,
            seed: 1,
        }
    }
}

/// One simulated block-maxima data set.
#[derive(Debug, Clone)]
pub struct BmData {
    /// Daily values, indexed consecutively.
    pub series: TimeSeries,
    /// Yearly maxima labelled by period `"1"`, `"2"`, ...
    pub sample: ExtremesSample,
    /// The period shifts `e_i`.
    pub effects: Vec<f64>,
}

/// Generates daily values period by period and extracts yearly maxima.
pub fn generate_bm<R: Rng + ?Sized>(s: &ScenarioBM, rng: &mut R) -> Result<BmData> {
    s.validate()?;
    let per_period = s.years_per_period * s.obs_per_year;
    let mut values = Vec::with_capacity(s.periods * per_period);
    let mut effects = Vec::with_capacity(s.periods);
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    for _ in 0..s.periods {
        let e = s.tau * std.sample(rng);
        effects.push(e);
        let mean = s.base_mean + e;
        values.extend((0..per_period).map(|_| mean + s.base_sd * std.sample(rng)));
    }
    let series = TimeSeries::from_values("simulated", &values)?;
    let sample = block_maxima(
        std::slice::from_ref(&series),
        BlockSpec::FixedLength { n: s.obs_per_year },
        GroupSpec::EveryBlocks {
            m: s.years_per_period,
        },
        1,
    )?;
    Ok(BmData {
        series,
        sample,
        effects,
    })
}

/// Outcome of one fit inside a replication.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitRecord {
    pub label: String,
    pub summary: Option<PosteriorSummary>,
    pub derived: IndexMap<String, DerivedSummary>,
    pub error: Option<String>,
}

impl FitRecord {
    fn failed(label: &str, err: &Error) -> Self {
        Self {
            label: label.to_string(),
            summary: None,
            derived: IndexMap::new(),
            error: Some(err.to_string()),
        }
    }

    /// Posterior mean of a parameter or derived quantity, or the model-level
    /// `"ll"` / `"DIC"` statistic.
    pub fn value(&self, name: &str) -> Option<f64> {
        let s = self.summary.as_ref()?;
        match name {
            "ll" => s.loglik_at_mean,
            "DIC" => s.dic.map(|d| d.dic),
            _ => s
                .get(name)
                .map(|p| p.mean)
                .or_else(|| self.derived.get(name).map(|d| d.mean)),
        }
    }
}

/// Everything recorded for one replication.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub index: usize,
    pub seed: u64,
    pub fits: Vec<FitRecord>,
    /// Empirical or true reference values.
    pub benchmarks: IndexMap<String, f64>,
    pub notes: Vec<String>,
}

impl ReplicationRecord {
    pub fn fit(&self, label: &str) -> Option<&FitRecord> {
        self.fits.iter().find(|f| f.label == label)
    }
}

/// Cross-replication mean, SD and 95% interval of one reported quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggRow {
    pub label: String,
    pub parameter: String,
    pub stat: MeanCi,
}

/// Per-replication records plus their aggregate table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub study: String,
    pub config: serde_json::Value,
    pub replications: Vec<ReplicationRecord>,
    pub table: Vec<AggRow>,
    pub failures: Vec<String>,
}

impl ReplicationReport {
    fn new(study: &str, config: serde_json::Value, replications: Vec<ReplicationRecord>) -> Self {
        let table = aggregate(&replications);
        let failures = replications
            .iter()
            .flat_map(|r| {
                r.fits.iter().filter_map(move |f| {
                    f.error
                        .as_ref()
                        .map(|e| format!("replication {} / {}: {e}", r.index, f.label))
                })
            })
            .collect();
        Self {
            study: study.to_string(),
            config,
            replications,
            table,
            failures,
        }
    }

    pub fn row(&self, label: &str, parameter: &str) -> Option<&MeanCi> {
        self.table
            .iter()
            .find(|r| r.label == label && r.parameter == parameter)
            .map(|r| &r.stat)
    }

    /// Per-replication values of `parameter` for fit `label` (missing fits skipped).
    pub fn values(&self, label: &str, parameter: &str) -> Vec<f64> {
        self.replications
            .iter()
            .filter_map(|r| r.fit(label).and_then(|f| f.value(parameter)))
            .collect()
    }

    pub fn benchmark_values(&self, name: &str) -> Vec<f64> {
        self.replications
            .iter()
            .filter_map(|r| r.benchmarks.get(name).copied())
            .collect()
    }

    /// Aggregate table as CSV: `label,parameter,mean,sd,lo,hi,n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,parameter,mean,sd,lo,hi,n\n");
        for r in &self.table {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.label, r.parameter, r.stat.mean, r.stat.sd, r.stat.lo, r.stat.hi, r.stat.n
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

fn aggregate(reps: &[ReplicationRecord]) -> Vec<AggRow> {
    let mut order: IndexMap<(String, String), Vec<f64>> = IndexMap::new();
    for r in reps {
        for f in &r.fits {
            let Some(s) = &f.summary else { continue };
            let names = s
                .params
                .keys()
                .cloned()
                .chain(f.derived.keys().cloned())
                .chain(["ll".to_string(), "DIC".to_string()]);
            for name in names {
                if let Some(v) = f.value(&name).filter(|v| v.is_finite()) {
                    order.entry((f.label.clone(), name)).or_default().push(v);
                }
            }
        }
    }
    for r in reps {
        for (k, v) in &r.benchmarks {
            if v.is_finite() {
                order
                    .entry(("empirical".to_string(), k.clone()))
                    .or_default()
                    .push(*v);
            }
        }
    }
    order
        .into_iter()
        .map(|((label, parameter), xs)| AggRow {
            label,
            parameter,
            stat: stats::mean_ci(&xs),
        })
        .collect()
}

fn opts_with_seed(opts: &FitOptions, seed: u64) -> FitOptions {
    FitOptions {
        sampler: SamplerConfig {
            seed,
            ..opts.sampler.clone()
        },
        ..opts.clone()
    }
}

/// Runs `f` with a derived seed; on failure retries once with another.
fn with_retry<T>(seed: u64, f: impl Fn(u64) -> Result<T>) -> Result<T> {
    f(seed).or_else(|e| {
        log::warn!("fit failed ({e}); retrying with a fresh seed");
        f(sub_seed(seed, 1_000_003))
    })
}

const R10: u32 = 10;

fn gev_record(
    label: &str,
    sample: &ExtremesSample,
    kind: EffectKind,
    priors: Option<&PriorSpec>,
    opts: &FitOptions,
    seed: u64,
    ks: &[u32],
) -> (FitRecord, Option<Fit>) {
    let res = with_retry(seed, |s| {
        let fit = fit_gev(sample, kind, priors, &opts_with_seed(opts, s))?;
        let mut derived = IndexMap::new();
        for &k in ks {
            let d = return_level_posterior(&fit.chain, ReturnPeriod::new(k)?, opts.level)?;
            derived.insert(format!("R{k}"), d);
        }
        Ok((fit, derived))
    });
    match res {
        Ok((fit, derived)) => (
            FitRecord {
                label: label.to_string(),
                summary: Some(fit.summary.clone()),
                derived,
                error: None,
            },
            Some(fit),
        ),
        Err(e) => (FitRecord::failed(label, &e), None),
    }
}

fn period_benchmarks(sample: &ExtremesSample, prefix: &str) -> Result<IndexMap<String, f64>> {
    let mut b = IndexMap::new();
    let mut per = Vec::new();
    for (label, ys) in sample.groups() {
        let r = empirical_return_level_values(&ys, R10)?;
        b.insert(format!("{prefix}R10_period_{label}"), r);
        per.push(r);
    }
    b.insert(format!("{prefix}R10"), stats::mean(&per));
    b.insert(
        format!("{prefix}R10_pooled"),
        empirical_return_level_values(&sample.values(), R10)?,
    );
    Ok(b)
}

/// Repeated block-maxima simulation, fitting each requested effect
/// structure to every replicate.
///
/// Benchmarks per replication: the empirical `R^10` of every period, their
/// mean (`R10`), the pooled empirical `R^10` and its bootstrap interval.
pub fn run_bm_study(
    s: &ScenarioBM,
    models: &[EffectKind],
    replications: usize,
    opts: &FitOptions,
) -> Result<ReplicationReport> {
    s.validate()?;
    if replications < 1 || models.is_empty() {
        return Err(Error::Config("need at least one replication and one model".into()));
    }
    let reps: Vec<ReplicationRecord> = (0..replications)
        .into_par_iter()
        .map(|i| -> Result<ReplicationRecord> {
            let seed = sub_seed(s.seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = generate_bm(s, &mut rng)?;
            let mut benchmarks = period_benchmarks(&data.sample, "")?;
            let (lo, hi) = empirical_return_level_ci(&data.sample.values(), R10, 1000, 0.95, &mut rng)?;
            benchmarks.insert("R10_pooled_ci_lo".into(), lo);
            benchmarks.insert("R10_pooled_ci_hi".into(), hi);
            let fits = models
                .iter()
                .enumerate()
                .map(|(j, &kind)| {
                    gev_record(kind.as_str(), &data.sample, kind, None, opts, sub_seed(seed, j as u64 + 1), &[R10]).0
                })
                .collect();
            Ok(ReplicationRecord {
                index: i,
                seed,
                fits,
                benchmarks,
                notes: Vec::new(),
            })
        })
        .collect::<Result<_>>()?;
    let config = serde_json::json!({
        "scenario": s,
        "models": models,
        "replications": replications,
        "fit": opts,
    });
    Ok(ReplicationReport::new("bm", config, reps))
}

/// [`run_bm_study`] repeated over a grid of effect standard deviations.
pub fn run_tau_sweep(
    s: &ScenarioBM,
    taus: &[f64],
    models: &[EffectKind],
    replications: usize,
    opts: &FitOptions,
) -> Result<Vec<(f64, ReplicationReport)>> {
    taus.iter()
        .map(|&tau| {
            let sc = ScenarioBM { tau, ..s.clone() };
            Ok((tau, run_bm_study(&sc, models, replications, opts)?))
        })
        .collect()
}

/// `tau,model,empirical_lo,empirical_hi,estimated_lo,estimated_hi` rows
/// comparing the empirical and fitted `R^10` across the sweep.
pub fn tau_sweep_csv(sweep: &[(f64, ReplicationReport)]) -> String {
    let mut out = String::from("tau,model,empirical_lo,empirical_hi,estimated_lo,estimated_hi\n");
    for (tau, rep) in sweep {
        let emp = rep.row("empirical", "R10");
        let models: Vec<String> = rep.replications[0].fits.iter().map(|f| f.label.clone()).collect();
        for m in models {
            let est = rep.row(&m, "R10");
            let f = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{tau},{m},{},{},{},{}\n",
                f(emp.map(|e| e.lo)),
                f(emp.map(|e| e.hi)),
                f(est.map(|e| e.lo)),
                f(est.map(|e| e.hi)),
            ));
        }
    }
    out
}

/// Return periods reported by the prior-transfer studies.
pub const K_GRID: [u32; 7] = [2, 5, 10, 20, 50, 100, 200];

/// Fit the first part with flat priors, turn its posterior into priors, then
/// fit the second part with and without them. Fits are labelled `part1`,
/// `part2/informative` and `part2/uninformative`; benchmarks hold the true
/// return levels `true_R<k>`.
pub fn run_prior_transfer_gev(
    s: &ScenarioGEVDirect,
    replications: usize,
    opts: &FitOptions,
) -> Result<ReplicationReport> {
    if s.split.0 + s.split.1 != s.n || s.split.0 == 0 {
        return Err(Error::Config(format!(
            "split {:?} must sum to n = {} with a nonempty first part",
            s.split, s.n
        )));
    }
    if replications < 1 {
        return Err(Error::Config("need at least one replication".into()));
    }
    let truth = GevParams::new(s.params.xi, s.params.mu, s.params.sigma)?;
    let reps: Vec<ReplicationRecord> = (0..replications)
        .into_par_iter()
        .map(|i| -> Result<ReplicationRecord> {
            let seed = sub_seed(s.seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ys = truth.sample(&mut rng, s.n);
            let part1 = ExtremesSample::from_values(&ys[..s.split.0]);
            let mut benchmarks = IndexMap::new();
            for k in K_GRID {
                benchmarks.insert(format!("true_R{k}"), return_level(&truth, ReturnPeriod::new(k)?));
            }
            let (rec1, fit1) = gev_record("part1", &part1, EffectKind::None, None, opts, sub_seed(seed, 1), &K_GRID);
            let mut fits = vec![rec1];
            let mut notes = Vec::new();
            if s.split.1 == 0 {
                notes.push("second part is empty; its fits were skipped".to_string());
            } else if let Some(fit1) = fit1 {
                let part2 = ExtremesSample::from_values(&ys[s.split.0..]);
                match posterior_to_prior(&fit1.param_chain()) {
                    Ok(prior) => {
                        fits.push(gev_record("part2/informative", &part2, EffectKind::None, Some(&prior), opts, sub_seed(seed, 2), &K_GRID).0);
                    }
                    Err(e) => fits.push(FitRecord::failed("part2/informative", &e)),
                }
                fits.push(gev_record("part2/uninformative", &part2, EffectKind::None, None, opts, sub_seed(seed, 3), &K_GRID).0);
            } else {
                notes.push("first-part fit failed; no prior to transfer".to_string());
            }
            Ok(ReplicationRecord {
                index: i,
                seed,
                fits,
                benchmarks,
                notes,
            })
        })
        .collect::<Result<_>>()?;
    let config = serde_json::json!({
        "scenario": s,
        "replications": replications,
        "fit": opts,
    });
    Ok(ReplicationReport::new("gev-transfer", config, reps))
}

/// Block-maxima prior transfer: the first `split_periods` periods are fitted
/// with flat priors, the remaining ones with and without the transferred
/// priors, for each effect structure. Labels are `<model>/part1`,
/// `<model>/informative` and `<model>/uninformative`; benchmark `part2_R10`
/// is the mean empirical `R^10` over the later periods.
pub fn run_prior_transfer_bm(
    s: &ScenarioBM,
    split_periods: usize,
    models: &[EffectKind],
    replications: usize,
    opts: &FitOptions,
) -> Result<ReplicationReport> {
    s.validate()?;
    if split_periods == 0 || split_periods > s.periods {
        return Err(Error::Config(format!(
            "split_periods must lie in 1..={}, got {split_periods}",
            s.periods
        )));
    }
    if replications < 1 || models.is_empty() {
        return Err(Error::Config("need at least one replication and one model".into()));
    }
    let first: Vec<String> = (1..=split_periods).map(|i| i.to_string()).collect();
    let second: Vec<String> = (split_periods + 1..=s.periods).map(|i| i.to_string()).collect();
    let reps: Vec<ReplicationRecord> = (0..replications)
        .into_par_iter()
        .map(|i| -> Result<ReplicationRecord> {
            let seed = sub_seed(s.seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = generate_bm(s, &mut rng)?;
            let part1 = data.sample.select_groups(&first);
            let part2 = data.sample.select_groups(&second);
            let mut benchmarks = period_benchmarks(&part1, "part1_")?;
            let mut notes = Vec::new();
            if !part2.is_empty() {
                benchmarks.extend(period_benchmarks(&part2, "part2_")?);
            } else {
                notes.push("second part is empty; its fits were skipped".to_string());
            }
            let mut fits = Vec::new();
            for (j, &kind) in models.iter().enumerate() {
                let m = kind.as_str();
                let base = sub_seed(seed, 10 * j as u64 + 1);
                let (rec1, fit1) = gev_record(&format!("{m}/part1"), &part1, kind, None, opts, base, &[R10]);
                fits.push(rec1);
                if part2.is_empty() {
                    continue;
                }
                match fit1.map(|f| posterior_to_prior(&f.param_chain())) {
                    Some(Ok(prior)) => fits.push(
                        gev_record(&format!("{m}/informative"), &part2, kind, Some(&prior), opts, sub_seed(base, 2), &[R10]).0,
                    ),
                    Some(Err(e)) => fits.push(FitRecord::failed(&format!("{m}/informative"), &e)),
                    None => notes.push(format!("{m}: first-part fit failed; no prior to transfer")),
                }
                fits.push(gev_record(&format!("{m}/uninformative"), &part2, kind, None, opts, sub_seed(base, 3), &[R10]).0);
            }
            Ok(ReplicationRecord {
                index: i,
                seed,
                fits,
                benchmarks,
                notes,
            })
        })
        .collect::<Result<_>>()?;
    let config = serde_json::json!({
        "scenario": s,
        "split_periods": split_periods,
        "models": models,
        "replications": replications,
        "fit": opts,
    });
    Ok(ReplicationReport::new("bm-transfer", config, reps))
}

fn pot_record(
    label: &str,
    obs: &[f64],
    s: &ScenarioPOT,
    priors: Option<&PriorSpec>,
    opts: &FitOptions,
    seed: u64,
) -> (FitRecord, Option<Fit>) {
    let res = ExceedanceSample::from_values(obs, s.u).and_then(|ex| {
        with_retry(seed, |sd| {
            let fit = fit_gpd(&ex, priors, &opts_with_seed(opts, sd))?;
            let tail = TailProb::new(s.p)?;
            let (var, es) = var_es_posterior(&fit.chain, s.u, ex.n_total, ex.n_exceed, tail, opts.level)?;
            let mut derived = IndexMap::new();
            derived.insert("VaR".to_string(), var);
            match es {
                Ok(es) => {
                    derived.insert("ES".to_string(), es);
                }
                Err(e) => log::warn!("{label}: ES not reported ({e})"),
            }
            Ok((fit, derived))
        })
    });
    match res {
        Ok((fit, derived)) => (
            FitRecord {
                label: label.to_string(),
                summary: Some(fit.summary.clone()),
                derived,
                error: None,
            },
            Some(fit),
        ),
        Err(e) => (FitRecord::failed(label, &e), None),
    }
}

/// Threshold prior-transfer study. The first `split.0` years are fitted with
/// flat priors; the posterior becomes the prior for the remaining years
/// (`later/...`) and for the first later year alone (`first-year/...`), each
/// also fitted with flat priors. Benchmarks hold the empirical VaR and ES of
/// both slices.
pub fn run_pot_study(s: &ScenarioPOT, opts: &FitOptions) -> Result<ReplicationReport> {
    if s.split.0 + s.split.1 != s.years || s.split.0 == 0 {
        return Err(Error::Config(format!(
            "split {:?} must sum to years = {} with a nonempty first part",
            s.split, s.years
        )));
    }
    if s.obs_per_year < 1 || !(s.sd > 0.0) || s.replications < 1 {
        return Err(Error::Config("need obs_per_year >= 1, sd > 0 and replications >= 1".into()));
    }
    TailProb::new(s.p)?;
    let dist = Normal::new(s.mean, s.sd).map_err(|e| Error::Config(e.to_string()))?;
    let reps: Vec<ReplicationRecord> = (0..s.replications)
        .into_par_iter()
        .map(|i| -> Result<ReplicationRecord> {
            let seed = sub_seed(s.seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let obs: Vec<f64> = (0..s.years * s.obs_per_year).map(|_| dist.sample(&mut rng)).collect();
            let cut = s.split.0 * s.obs_per_year;
            let (hist, later) = obs.split_at(cut);
            let first_year = &later[..later.len().min(s.obs_per_year)];

            let (rec1, fit1) = pot_record("history", hist, s, None, opts, sub_seed(seed, 1));
            let mut fits = vec![rec1];
            let mut notes = Vec::new();
            let mut benchmarks = IndexMap::new();
            if later.is_empty() {
                notes.push("no later years; slice fits skipped".to_string());
            } else {
                let prior = fit1.map(|f| posterior_to_prior(&f.param_chain()));
                for (j, (name, slice)) in [("later", later), ("first-year", first_year)].into_iter().enumerate() {
                    match empirical_var_es_values(slice, s.p) {
                        Ok(v) => {
                            benchmarks.insert(format!("{name}/VaR"), v.var);
                            benchmarks.insert(format!("{name}/ES"), v.es);
                        }
                        Err(e) => notes.push(format!("{name}: empirical VaR/ES unavailable ({e})")),
                    }
                    let base = sub_seed(seed, 10 * j as u64 + 2);
                    let label = format!("{name}/informative");
                    match &prior {
                        Some(Ok(p)) => fits.push(pot_record(&label, slice, s, Some(p), opts, base).0),
                        Some(Err(e)) => fits.push(FitRecord::failed(&label, e)),
                        None => notes.push(format!("{label}: history fit failed; no prior")),
                    }
                    fits.push(pot_record(&format!("{name}/uninformative"), slice, s, None, opts, sub_seed(base, 1)).0);
                }
            }
            Ok(ReplicationRecord {
                index: i,
                seed,
                fits,
                benchmarks,
                notes,
            })
        })
        .collect::<Result<_>>()?;
    let config = serde_json::json!({
        "scenario": s,
        "fit": opts,
    });
    Ok(ReplicationReport::new("pot", config, reps))
}

/// A study as read from a scenario JSON file, tagged by `"study"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "study", rename_all = "kebab-case")]
pub enum StudySpec {
    Bm {
        #[serde(default)]
        scenario: ScenarioBM,
        #[serde(default = "default_models")]
        models: Vec<EffectKind>,
        #[serde(default = "default_replications")]
        replications: usize,
        /// When present, the study is repeated for each effect SD.
        #[serde(default)]
        taus: Option<Vec<f64>>,
    },
    GevTransfer {
        #[serde(default)]
        scenario: ScenarioGEVDirect,
        #[serde(default = "default_replications")]
        replications: usize,
    },
    BmTransfer {
        #[serde(default)]
        scenario: ScenarioBM,
        split_periods: usize,
        #[serde(default = "default_models")]
        models: Vec<EffectKind>,
        #[serde(default = "default_replications")]
        replications: usize,
    },
    Pot {
        #[serde(default)]
        scenario: ScenarioPOT,
    },
}

fn default_models() -> Vec<EffectKind> {
    vec![EffectKind::None, EffectKind::Location]
}

fn default_replications() -> usize {
    5
}

/// Runs a study; a tau sweep yields one report per tau.
pub fn run_study(spec: &StudySpec, opts: &FitOptions) -> Result<Vec<ReplicationReport>> {
    match spec {
        StudySpec::Bm {
            scenario,
            models,
            replications,
            taus: None,
        } => Ok(vec![run_bm_study(scenario, models, *replications, opts)?]),
        StudySpec::Bm {
            scenario,
            models,
            replications,
            taus: Some(taus),
        } => Ok(run_tau_sweep(scenario, taus, models, *replications, opts)?
            .into_iter()
            .map(|(_, r)| r)
            .collect()),
        StudySpec::GevTransfer {
            scenario,
            replications,
        } => Ok(vec![run_prior_transfer_gev(scenario, *replications, opts)?]),
        StudySpec::BmTransfer {
            scenario,
            split_periods,
            models,
            replications,
        } => Ok(vec![run_prior_transfer_bm(
            scenario,
            *split_periods,
            models,
            *replications,
            opts,
        )?]),
        StudySpec::Pot { scenario } => Ok(vec![run_pot_study(scenario, opts)?]),
    }
}
