//! Extremes extraction: block maxima and threshold exceedances, plus the
//! empirical return level / VaR / ES estimators used as benchmarks.

use chrono::{Datelike, NaiveDate};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

/// Ordering key of an observation. Calendar blocking needs dates; synthetic
/// series use plain positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Stamp {
    Index(u64),
    Date(NaiveDate),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub stamp: Stamp,
    pub value: f64,
}

/// An ordered, complete series of observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    name: String,
    points: Vec<Point>,
}

impl TimeSeries {
    /// Validates that stamps are strictly increasing and values finite.
    pub fn new(name: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        let name = name.into();
        for (i, p) in points.iter().enumerate() {
            if !p.value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "series '{name}': non-finite value at position {i}"
                )));
            }
            if i > 0 && points[i - 1].stamp >= p.stamp {
                return Err(Error::InvalidParameter(format!(
                    "series '{name}': stamps not strictly increasing at position {i}"
                )));
            }
        }
        Ok(Self { name, points })
    }

    /// Series indexed by position.
    pub fn from_values(name: impl Into<String>, values: &[f64]) -> Result<Self> {
        let points = values
            .iter()
            .enumerate()
            .map(|(i, &value)| Point {
                stamp: Stamp::Index(i as u64),
                value,
            })
            .collect();
        Self::new(name, points)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Points whose calendar year lies in `[from, to]`.
    pub fn years(&self, from: i32, to: i32) -> Self {
        let points = self
            .points
            .iter()
            .filter(|p| matches!(p.stamp, Stamp::Date(d) if d.year() >= from && d.year() <= to))
            .copied()
            .collect();
        Self {
            name: self.name.clone(),
            points,
        }
    }
}

/// How observations are cut into blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BlockSpec {
    CalendarYear,
    FixedLength { n: usize },
}

/// How blocks are assigned to random-effect groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroupSpec {
    None,
    /// Contiguous runs of `m` blocks, aligned across series.
    EveryBlocks { m: usize },
    /// One group per input series.
    SeriesLabel,
}

/// One block maximum with its labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extreme {
    pub value: f64,
    pub block: i64,
    pub group: String,
    pub series: String,
}

/// Block maxima (or negated minima when `sign = -1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremesSample {
    pub maxima: Vec<Extreme>,
    pub block_spec: BlockSpec,
    pub group_spec: GroupSpec,
    pub sign: i8,
}

impl ExtremesSample {
    /// Wraps plain values as a single-group sample.
    pub fn from_values(values: &[f64]) -> Self {
        Self::from_grouped(&[("all".to_string(), values.to_vec())])
    }

    /// Builds a sample from explicit groups, one block per value.
    pub fn from_grouped(groups: &[(String, Vec<f64>)]) -> Self {
        let mut maxima = Vec::new();
        let mut block = 0;
        for (label, values) in groups {
            for &value in values {
                maxima.push(Extreme {
                    value,
                    block,
                    group: label.clone(),
                    series: "series".to_string(),
                });
                block += 1;
            }
        }
        let group_spec = if groups.len() > 1 {
            GroupSpec::SeriesLabel
        } else {
            GroupSpec::None
        };
        Self {
            maxima,
            block_spec: BlockSpec::FixedLength { n: 1 },
            group_spec,
            sign: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.maxima.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maxima.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.maxima.iter().map(|e| e.value).collect()
    }

    /// Values split by group label, groups in order of first appearance.
    pub fn groups(&self) -> Vec<(String, Vec<f64>)> {
        let mut out: Vec<(String, Vec<f64>)> = Vec::new();
        for e in &self.maxima {
            match out.iter_mut().find(|(g, _)| *g == e.group) {
                Some((_, v)) => v.push(e.value),
                None => out.push((e.group.clone(), vec![e.value])),
            }
        }
        out
    }

    /// Keeps only the maxima whose group is in `labels`.
    pub fn select_groups(&self, labels: &[String]) -> Self {
        Self {
            maxima: self
                .maxima
                .iter()
                .filter(|e| labels.contains(&e.group))
                .cloned()
                .collect(),
            ..self.clone()
        }
    }
}

fn block_id(stamp: Stamp, pos: usize, block: BlockSpec) -> Result<i64> {
    match (block, stamp) {
        (BlockSpec::CalendarYear, Stamp::Date(d)) => Ok(d.year() as i64),
        (BlockSpec::CalendarYear, Stamp::Index(_)) => Err(Error::Config(
            "calendar-year blocks need dated observations".into(),
        )),
        (BlockSpec::FixedLength { n }, _) => Ok((pos / n) as i64),
    }
}

/// Block maxima of `sign * value` for each nonempty block of each series.
pub fn block_maxima(
    series: &[TimeSeries],
    block: BlockSpec,
    group: GroupSpec,
    sign: i8,
) -> Result<ExtremesSample> {
    if let BlockSpec::FixedLength { n } = block {
        if n < 1 {
            return Err(Error::Config("block length must be at least 1".into()));
        }
    }
    if let GroupSpec::EveryBlocks { m } = group {
        if m < 1 {
            return Err(Error::Config("group size must be at least 1 block".into()));
        }
    }
    if sign != 1 && sign != -1 {
        return Err(Error::Config(format!("sign must be +1 or -1, got {sign}")));
    }
    if series.iter().all(TimeSeries::is_empty) {
        return Err(Error::EmptySample("series has no observations".into()));
    }
    let s = f64::from(sign);

    // (series index, block id, maximum)
    let mut raw: Vec<(usize, i64, f64)> = Vec::new();
    for (si, ts) in series.iter().enumerate() {
        let mut current: Option<(i64, f64)> = None;
        for (pos, p) in ts.points.iter().enumerate() {
            let b = block_id(p.stamp, pos, block)?;
            let v = s * p.value;
            current = match current {
                Some((cb, m)) if cb == b => Some((cb, m.max(v))),
                Some((cb, m)) => {
                    raw.push((si, cb, m));
                    Some((b, v))
                }
                None => Some((b, v)),
            };
        }
        if let Some((cb, m)) = current {
            raw.push((si, cb, m));
        }
    }

    let first_block = raw.iter().map(|r| r.1).min().unwrap_or(0);
    let maxima = raw
        .into_iter()
        .map(|(si, b, value)| {
            let label = match group {
                GroupSpec::None => "all".to_string(),
                GroupSpec::EveryBlocks { m } => ((b - first_block) / m as i64 + 1).to_string(),
                GroupSpec::SeriesLabel => series[si].name.clone(),
            };
            Extreme {
                value,
                block: b,
                group: label,
                series: series[si].name.clone(),
            }
        })
        .collect();

    Ok(ExtremesSample {
        maxima,
        block_spec: block,
        group_spec: group,
        sign,
    })
}

/// Threshold excesses `x - u` of all observations above `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceSample {
    pub excesses: Vec<f64>,
    pub u: f64,
    pub n_total: usize,
    pub n_exceed: usize,
}

impl ExceedanceSample {
    pub fn from_values(values: &[f64], u: f64) -> Result<Self> {
        if !u.is_finite() {
            return Err(Error::Domain(format!("threshold must be finite, got {u}")));
        }
        let excesses: Vec<f64> = values.iter().filter(|&&x| x > u).map(|x| x - u).collect();
        if excesses.is_empty() {
            return Err(Error::EmptySample(format!(
                "no observation exceeds the threshold {u}"
            )));
        }
        Ok(Self {
            n_exceed: excesses.len(),
            excesses,
            u,
            n_total: values.len(),
        })
    }

    /// Fraction of observations above the threshold.
    pub fn exceedance_rate(&self) -> f64 {
        self.n_exceed as f64 / self.n_total as f64
    }
}

pub fn exceedances(series: &TimeSeries, u: f64) -> Result<ExceedanceSample> {
    ExceedanceSample::from_values(&series.values(), u)
}

/// Empirical `k`-period return level: the type-7 `(1 - 1/k)` quantile.
pub fn empirical_return_level_values(values: &[f64], k: u32) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!("return period must be >= 2, got {k}")));
    }
    if values.is_empty() {
        return Err(Error::EmptySample("no maxima".into()));
    }
    Ok(stats::quantile(values, 1.0 - 1.0 / f64::from(k)))
}

pub fn empirical_return_level(sample: &ExtremesSample, k: u32) -> Result<f64> {
    empirical_return_level_values(&sample.values(), k)
}

/// Percentile-bootstrap interval for the empirical return level.
pub fn empirical_return_level_ci<R: Rng + ?Sized>(
    values: &[f64],
    k: u32,
    n_boot: usize,
    level: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    empirical_return_level_values(values, k)?;
    if n_boot == 0 || !(0.0..1.0).contains(&level) {
        return Err(Error::Config("need n_boot >= 1 and level in (0, 1)".into()));
    }
    let n = values.len();
    let mut resample = vec![0.0; n];
    let mut stats_: Vec<f64> = (0..n_boot)
        .map(|_| {
            for r in resample.iter_mut() {
                *r = values[rng.random_range(0..n)];
            }
            stats::quantile(&resample, 1.0 - 1.0 / f64::from(k))
        })
        .collect();
    stats_.sort_by(f64::total_cmp);
    let a = (1.0 - level) / 2.0;
    Ok((
        stats::quantile_sorted(&stats_, a),
        stats::quantile_sorted(&stats_, 1.0 - a),
    ))
}

/// Empirical value-at-risk and expected shortfall at tail probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarEs {
    pub var: f64,
    pub es: f64,
}

pub fn empirical_var_es_values(values: &[f64], p: f64) -> Result<VarEs> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("tail probability must lie in (0, 1), got {p}")));
    }
    if values.is_empty() {
        return Err(Error::EmptySample("no observations".into()));
    }
    let var = stats::quantile(values, 1.0 - p);
    let tail: Vec<f64> = values.iter().copied().filter(|&x| x > var).collect();
    if tail.is_empty() {
        return Err(Error::Degenerate(
            "no observation lies above the empirical VaR; ES undefined".into(),
        ));
    }
    Ok(VarEs {
        var,
        es: stats::mean(&tail),
    })
}

pub fn empirical_var_es(series: &TimeSeries, p: f64) -> Result<VarEs> {
    empirical_var_es_values(&series.values(), p)
}
