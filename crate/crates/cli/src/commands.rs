//! Command implementations. Each writes its artifacts under the output
//! directory and returns the paths written.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use bevt::extract::{
    block_maxima, empirical_return_level_values, BlockSpec, ExceedanceSample, ExtremesSample,
    GroupSpec, TimeSeries,
};
use bevt::fit::{fit_gev, fit_gpd, model_kind, Fit, FitOptions};
use bevt::model::EffectKind;
use bevt::risk::{
    plug_in_gev, plug_in_gpd, return_level, return_level_posterior, var_es_posterior, ReturnPeriod,
    TailProb,
};
use bevt::sampler::{posterior_to_prior, Chain, ModelKind, PriorSpec, SamplerConfig};
use bevt::simlab::{generate_bm, run_study, run_tau_sweep, tau_sweep_csv, ScenarioBM, StudySpec, K_GRID};
use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{
    Command, ExtractArgs, ExtractMethod, FitArgs, FitFamily, GenerateArgs, PriorArgs, ReportArgs,
    RiskArgs, RiskMeasure, SimulateArgs,
};
use crate::artifact::{read_csv, read_json, read_provenance, write_csv, write_json, Provenance};
use crate::ingest::{ingest_csv, InputError};

/// Credible level of every reported interval.
const LEVEL: f64 = 0.95;

pub fn run(cmd: &Command) -> anyhow::Result<Vec<PathBuf>> {
    match cmd {
        Command::Extract(a) => extract(cmd, a),
        Command::Fit(a) => fit(cmd, a),
        Command::Risk(a) => risk(cmd, a),
        Command::Prior(a) => prior(cmd, a),
        Command::Simulate(a) => simulate(cmd, a),
        Command::Generate(a) => generate(cmd, a),
        Command::Report(a) => report(cmd, a),
        Command::Replay(a) => {
            let prov = read_provenance(&a.artifact)?;
            let mut inner = prov.invocation;
            inner.set_out_dir(a.out.out.clone());
            run(&inner)
        }
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

fn parse_block(s: &str) -> anyhow::Result<BlockSpec> {
    if s == "year" {
        return Ok(BlockSpec::CalendarYear);
    }
    let n = s
        .strip_prefix("n:")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| usage(format!("--block must be 'year' or 'n:<int>', got '{s}'")))?;
    Ok(BlockSpec::FixedLength { n })
}

fn parse_years(s: &str) -> anyhow::Result<(i32, i32)> {
    let bad = || usage(format!("--years must look like 'A:B', got '{s}'"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

/// Resolves `--group-by` and `--group-col` into the column to split series
/// on and the grouping of blocks.
fn grouping(a: &ExtractArgs) -> anyhow::Result<(Option<String>, GroupSpec)> {
    match a.group_by.as_deref() {
        None => Ok((a.group_col.clone(), GroupSpec::None)),
        Some(g) if g.starts_with("every:") => {
            let m = g["every:".len()..]
                .parse()
                .map_err(|_| usage(format!("--group-by every:<M> needs an integer, got '{g}'")))?;
            Ok((a.group_col.clone(), GroupSpec::EveryBlocks { m }))
        }
        Some(col) => match a.group_col.as_deref() {
            Some(gc) if gc != col => Err(usage(format!(
                "--group-by '{col}' conflicts with --group-col '{gc}'"
            ))),
            _ => Ok((Some(col.to_string()), GroupSpec::SeriesLabel)),
        },
    }
}

fn extract(cmd: &Command, a: &ExtractArgs) -> anyhow::Result<Vec<PathBuf>> {
    let (group_col, group) = grouping(a)?;
    let mut series = ingest_csv(&a.input, &a.value_col, &a.date_col, group_col.as_deref())?;
    if let Some(y) = &a.years {
        let (from, to) = parse_years(y)?;
        series = series.iter().map(|s| s.years(from, to)).filter(|s| !s.is_empty()).collect();
        if series.is_empty() {
            bail!(InputError(format!("no observations in years {from}..={to}")));
        }
    }
    let prov = Provenance::new(cmd, None);
    let dir = &a.out.out;
    match a.method {
        ExtractMethod::Bm => {
            let sign = if a.minima { -1 } else { 1 };
            let sample = block_maxima(&series, parse_block(&a.block)?, group, sign)?;
            Ok(vec![write_json(dir, "sample.json", &prov, &sample)?])
        }
        ExtractMethod::Pot => {
            let u = a.threshold.ok_or_else(|| usage("extract pot needs --threshold"))?;
            let sign = if a.minima { -1.0 } else { 1.0 };
            let values: Vec<f64> = series.iter().flat_map(TimeSeries::values).map(|v| sign * v).collect();
            let sample = ExceedanceSample::from_values(&values, u)?;
            Ok(vec![write_json(dir, "exceedances.json", &prov, &sample)?])
        }
    }
}

fn load_prior(arg: &str) -> anyhow::Result<Option<PriorSpec>> {
    if arg == "flat" {
        return Ok(None);
    }
    let (_, spec): (_, PriorSpec) = read_json(arg.as_ref())?;
    for (name, p) in spec.iter() {
        p.validate().with_context(|| format!("prior for '{name}'"))?;
    }
    Ok(Some(spec))
}

fn sampler_config(s: &crate::args::SamplingArgs) -> SamplerConfig {
    SamplerConfig {
        burn_in: s.burn_in,
        n_draws: s.draws,
        thin: s.thin,
        seed: s.seed,
        ..SamplerConfig::default()
    }
}

/// What `summary.json` holds besides the posterior summary itself.
#[derive(Serialize)]
struct FitResult<'a> {
    family: FitFamily,
    effects: EffectKind,
    model: ModelKind,
    priors: &'a PriorSpec,
    summary: &'a bevt::sampler::PosteriorSummary,
}

/// Facts about a GPD fit's sample that VaR and ES need.
#[derive(Debug, Serialize, Deserialize)]
struct TailContext {
    u: f64,
    n_total: usize,
    n_exceed: usize,
}

fn fit(cmd: &Command, a: &FitArgs) -> anyhow::Result<Vec<PathBuf>> {
    let priors = load_prior(&a.prior)?;
    let opts = FitOptions {
        sampler: sampler_config(&a.sampling),
        ..FitOptions::default()
    };
    let mut prov = Provenance::new(cmd, Some(a.sampling.seed));
    let (fit, effects, model): (Fit, EffectKind, ModelKind) = match a.family {
        FitFamily::Gev => {
            let (_, sample): (_, ExtremesSample) = read_json(&a.input)?;
            let kind = EffectKind::from(a.re);
            (fit_gev(&sample, kind, priors.as_ref(), &opts)?, kind, model_kind(kind))
        }
        FitFamily::Gpd => {
            if a.re != crate::args::ReKind::None {
                return Err(usage("random effects apply to GEV fits only"));
            }
            let (_, sample): (_, ExceedanceSample) = read_json(&a.input)?;
            prov = prov.with_context(serde_json::to_value(TailContext {
                u: sample.u,
                n_total: sample.n_total,
                n_exceed: sample.n_exceed,
            })?);
            (fit_gpd(&sample, priors.as_ref(), &opts)?, EffectKind::None, ModelKind::Gpd)
        }
    };
    let dir = &a.out.out;
    let mut out = vec![write_csv(dir, "chain.csv", &prov, &fit.param_chain().to_csv())?];
    if fit.chain.names.len() > fit.summary.params.len() {
        let k = fit.summary.params.len();
        let latent = Chain {
            names: fit.chain.names[k..].to_vec(),
            draws: fit.chain.draws.iter().map(|d| d[k..].to_vec()).collect(),
            acceptance_rate: fit.chain.acceptance_rate[k..].to_vec(),
            seed: fit.chain.seed,
        };
        out.push(write_csv(dir, "latent.csv", &prov, &latent.to_csv())?);
    }
    let result = FitResult {
        family: a.family,
        effects,
        model,
        priors: &fit.priors,
        summary: &fit.summary,
    };
    out.push(write_json(dir, "summary.json", &prov, &result)?);
    Ok(out)
}

fn load_chain(path: &std::path::Path) -> anyhow::Result<(Option<Provenance>, Chain)> {
    let (prov, text) = read_csv(path)?;
    let chain = Chain::from_csv(&text).with_context(|| format!("reading chain {}", path.display()))?;
    if chain.is_empty() {
        bail!(InputError(format!("{}: chain has no draws", path.display())));
    }
    Ok((prov, chain))
}

fn risk(cmd: &Command, a: &RiskArgs) -> anyhow::Result<Vec<PathBuf>> {
    let (fit_prov, chain) = load_chain(&a.input)?;
    let prov = Provenance::new(cmd, fit_prov.as_ref().and_then(|p| p.seed));
    let dir = &a.out.out;
    match a.measure {
        RiskMeasure::Rl => {
            let plug = plug_in_gev(&chain)?;
            let rows = a
                .k
                .iter()
                .map(|&k| {
                    let rp = ReturnPeriod::new(k)?;
                    Ok(json!({
                        "k": k,
                        "posterior": return_level_posterior(&chain, rp, LEVEL)?,
                        "plug_in": return_level(&plug, rp),
                    }))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            Ok(vec![write_json(dir, "return_levels.json", &prov, &json!({ "level": LEVEL, "return_levels": rows }))?])
        }
        RiskMeasure::Var | RiskMeasure::Es => {
            let ctx: TailContext = fit_prov
                .as_ref()
                .and_then(|p| serde_json::from_value(p.context.clone()).ok())
                .ok_or_else(|| usage(format!("{}: not a GPD chain written by 'fit gpd'", a.input.display())))?;
            let tail = TailProb::new(a.p)?;
            let ratio = ctx.n_total as f64 / ctx.n_exceed as f64;
            if ratio * a.p > 1.0 {
                log::warn!("(n/N_u)·p = {} exceeds 1; the VaR lies below the threshold", ratio * a.p);
            }
            let (var, es) = var_es_posterior(&chain, ctx.u, ctx.n_total, ctx.n_exceed, tail, LEVEL)?;
            let plug = plug_in_gpd(&chain, ctx.u)?;
            let var_plug = bevt::risk::var_pot_ratio(&plug, ratio, a.p);
            let mut result = json!({
                "level": LEVEL,
                "p": a.p,
                "threshold": ctx.u,
                "var": { "posterior": var, "plug_in": var_plug },
            });
            let name = if a.measure == RiskMeasure::Es {
                result["es"] = json!({
                    "posterior": es?,
                    "plug_in": bevt::risk::es_pot(var_plug, &plug),
                });
                "es.json"
            } else {
                "var.json"
            };
            Ok(vec![write_json(dir, name, &prov, &result)?])
        }
    }
}

fn prior(cmd: &Command, a: &PriorArgs) -> anyhow::Result<Vec<PathBuf>> {
    let (fit_prov, chain) = load_chain(&a.input)?;
    let spec = posterior_to_prior(&chain)?;
    let prov = Provenance::new(cmd, fit_prov.and_then(|p| p.seed));
    Ok(vec![write_json(&a.out.out, "prior.json", &prov, &spec)?])
}

fn read_study(path: &std::path::Path) -> anyhow::Result<StudySpec> {
    let (_, spec): (_, StudySpec) = read_json(path)?;
    Ok(spec)
}

fn reseed(spec: &mut StudySpec, seed: u64) {
    match spec {
        StudySpec::Bm { scenario, .. } | StudySpec::BmTransfer { scenario, .. } => scenario.seed = seed,
        StudySpec::GevTransfer { scenario, .. } => scenario.seed = seed,
        StudySpec::Pot { scenario } => scenario.seed = seed,
    }
}

fn study_seed(spec: &StudySpec) -> u64 {
    match spec {
        StudySpec::Bm { scenario, .. } | StudySpec::BmTransfer { scenario, .. } => scenario.seed,
        StudySpec::GevTransfer { scenario, .. } => scenario.seed,
        StudySpec::Pot { scenario } => scenario.seed,
    }
}

fn simulate(cmd: &Command, a: &SimulateArgs) -> anyhow::Result<Vec<PathBuf>> {
    let mut spec = read_study(&a.scenario)?;
    if let Some(seed) = a.seed {
        reseed(&mut spec, seed);
    }
    let seed = study_seed(&spec);
    let d = SamplerConfig::default();
    let opts = FitOptions {
        sampler: SamplerConfig {
            burn_in: a.burn_in.unwrap_or(d.burn_in),
            n_draws: a.draws.unwrap_or(d.n_draws),
            thin: a.thin.unwrap_or(d.thin),
            seed,
            ..d
        },
        ..FitOptions::default()
    };
    let prov = Provenance::new(cmd, Some(seed)).with_context(serde_json::to_value(&spec)?);
    let dir = &a.out.out;
    let mut out = Vec::new();
    if let StudySpec::Bm {
        scenario,
        models,
        replications,
        taus: Some(taus),
    } = &spec
    {
        let sweep = run_tau_sweep(scenario, taus, models, *replications, &opts)?;
        out.push(write_csv(dir, "tau_sweep.csv", &prov, &tau_sweep_csv(&sweep))?);
        for (tau, rep) in &sweep {
            out.push(write_json(dir, &format!("report_tau{tau}.json"), &prov, rep)?);
            out.push(write_csv(dir, &format!("report_tau{tau}.csv"), &prov, &rep.to_csv())?);
        }
        return Ok(out);
    }
    for rep in run_study(&spec, &opts)? {
        out.push(write_json(dir, &format!("report_{}.json", rep.study), &prov, &rep)?);
        out.push(write_csv(dir, &format!("report_{}.csv", rep.study), &prov, &rep.to_csv())?);
    }
    Ok(out)
}

fn generate(cmd: &Command, a: &GenerateArgs) -> anyhow::Result<Vec<PathBuf>> {
    let mut s: ScenarioBM = match read_study(&a.scenario) {
        Ok(StudySpec::Bm { scenario, .. }) => scenario,
        Ok(_) => return Err(usage("generate needs a block-maxima scenario")),
        Err(_) => read_json(&a.scenario)?.1,
    };
    if let Some(seed) = a.seed {
        s.seed = seed;
    }
    s.validate()?;
    if s.obs_per_year > 365 {
        return Err(usage(format!(
            "dated output allows at most 365 observations per year, scenario has {}",
            s.obs_per_year
        )));
    }
    let data = generate_bm(&s, &mut ChaCha8Rng::seed_from_u64(s.seed))?;
    let mut body = String::from("date,value,period\n");
    for (i, v) in data.series.values().iter().enumerate() {
        let year = i / s.obs_per_year;
        let day = (i % s.obs_per_year) as u32 + 1;
        let date = NaiveDate::from_yo_opt(a.first_year + year as i32, day)
            .ok_or_else(|| anyhow!("no calendar date for year {} day {day}", a.first_year + year as i32))?;
        body.push_str(&format!("{date},{v},{}\n", year / s.years_per_period + 1));
    }
    let prov = Provenance::new(cmd, Some(s.seed)).with_context(json!({
        "scenario": s,
        "effects": data.effects,
    }));
    Ok(vec![write_csv(&a.out.out, "series.csv", &prov, &body)?])
}

type QuantileFn = Box<dyn Fn(f64) -> bevt::Result<f64>>;

fn report(cmd: &Command, a: &ReportArgs) -> anyhow::Result<Vec<PathBuf>> {
    let (fit_prov, chain) = load_chain(&a.chain)?;
    let prov = Provenance::new(cmd, fit_prov.as_ref().and_then(|p| p.seed));
    let dir = &a.out.out;
    let gev = chain.index_of("mu").is_some();

    let (mut values, quantile): (Vec<f64>, QuantileFn) = if gev {
        let (_, sample): (_, ExtremesSample) = read_json(&a.input)?;
        let p = plug_in_gev(&chain)?;
        (sample.values(), Box::new(move |q| p.quantile(q)))
    } else {
        let (_, sample): (_, ExceedanceSample) = read_json(&a.input)?;
        let p = plug_in_gpd(&chain, 0.0)?;
        (sample.excesses.clone(), Box::new(move |q| p.quantile(q)))
    };
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mut qq = String::from("rank,probability,empirical,model\n");
    for (i, v) in values.iter().enumerate() {
        let prob = (i + 1) as f64 / (n + 1.0);
        qq.push_str(&format!("{},{prob},{v},{}\n", i + 1, quantile(prob)?));
    }
    let mut out = vec![write_csv(dir, "quantile_plot.csv", &prov, &qq)?];

    if gev {
        let mut rl = String::from("k,mean,hpd_lo,hpd_hi,empirical\n");
        for k in K_GRID {
            let s = return_level_posterior(&chain, ReturnPeriod::new(k)?, LEVEL)?;
            let emp = empirical_return_level_values(&values, k)?;
            rl.push_str(&format!("{k},{},{},{},{emp}\n", s.mean, s.hpd_lo, s.hpd_hi));
        }
        out.push(write_csv(dir, "return_level_plot.csv", &prov, &rl)?);
    }
    Ok(out)
}
