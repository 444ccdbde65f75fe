//! Prior families and per-parameter prior specifications.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evd::ln_gamma;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A univariate prior density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Prior {
    Uniform {
        #[serde(alias = "a")]
        lower: f64,
        #[serde(alias = "b")]
        upper: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Density `x^(shape-1) e^(-x/scale) / (Γ(shape) scale^shape)`.
    Gamma {
        shape: f64,
        scale: f64,
    },
    /// Density `scale^shape x^(-shape-1) e^(-scale/x) / Γ(shape)`.
    InverseGamma {
        shape: f64,
        scale: f64,
    },
}

impl Prior {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Prior::Uniform { lower, upper } => lower.is_finite() && upper.is_finite() && lower < upper,
            Prior::Normal { mean, sd } => mean.is_finite() && sd > 0.0 && sd.is_finite(),
            Prior::Gamma { shape, scale } | Prior::InverseGamma { shape, scale } => {
                shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid prior {self:?}")))
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            Prior::Uniform { lower, upper } => {
                if x >= lower && x <= upper {
                    -(upper - lower).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Prior::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * LN_2PI - sd.ln() - 0.5 * z * z
            }
            Prior::Gamma { shape, scale } => {
                if x > 0.0 {
                    (shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Prior::InverseGamma { shape, scale } => {
                if x > 0.0 {
                    shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}

/// One prior per named parameter, kept in insertion order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriorSpec {
    entries: IndexMap<String, Prior>,
}

impl PriorSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, prior: Prior) -> Self {
        self.entries.insert(name.to_string(), prior);
        self
    }

    pub fn insert(&mut self, name: &str, prior: Prior) {
        self.entries.insert(name.to_string(), prior);
    }

    pub fn get(&self, name: &str) -> Option<&Prior> {
        self.entries.get(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Prior)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Priors reordered to match `names`; every name needs exactly one entry
    /// and no entry may be left over.
    pub fn aligned(&self, names: &[String]) -> Result<Vec<Prior>> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let p = self
                .entries
                .get(n)
                .ok_or_else(|| Error::Config(format!("no prior given for parameter '{n}'")))?;
            p.validate()?;
            out.push(*p);
        }
        if let Some(extra) = self.entries.keys().find(|k| !names.contains(k)) {
            return Err(Error::Config(format!(
                "prior given for unknown parameter '{extra}'"
            )));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("prior spec serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s)
            .map_err(|e| Error::Config(format!("cannot parse prior JSON: {e}")))?;
        for (_, p) in spec.iter() {
            p.validate()?;
        }
        Ok(spec)
    }
}

/// Sum of the per-parameter log prior densities, `theta` in spec order.
pub fn log_prior(spec: &PriorSpec, theta: &[f64]) -> f64 {
    assert_eq!(spec.len(), theta.len(), "parameter vector does not match prior spec");
    let mut acc = 0.0;
    for ((_, p), &x) in spec.iter().zip(theta) {
        acc += p.ln_pdf(x);
        if acc == f64::NEG_INFINITY {
            break;
        }
    }
    acc
}

/// Which model a default prior set is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    GevFixed,
    GevLocation,
    GevLocationScale,
    Gpd,
}

pub const FLAT_LOCATION: Prior = Prior::Uniform {
    lower: -10000.0,
    upper: 10000.0,
};
pub const FLAT_SCALE: Prior = Prior::Gamma {
    shape: 0.0001,
    scale: 10000.0,
};
pub const FLAT_VARIANCE: Prior = Prior::InverseGamma {
    shape: 0.0001,
    scale: 0.0001,
};

/// Flat priors: uniform(-1e4, 1e4) for shape/location, gamma(1e-4, 1e4) for
/// the scale and inverse-gamma(1e-4, 1e-4) for variances.
pub fn default_priors(kind: ModelKind) -> PriorSpec {
    let base = PriorSpec::new().with("xi", FLAT_LOCATION);
    match kind {
        ModelKind::Gpd => base.with("sigma", FLAT_SCALE),
        ModelKind::GevFixed => base.with("mu", FLAT_LOCATION).with("sigma", FLAT_SCALE),
        ModelKind::GevLocation => base
            .with("mu", FLAT_LOCATION)
            .with("sigma", FLAT_SCALE)
            .with("tau2", FLAT_VARIANCE),
        ModelKind::GevLocationScale => base
            .with("mu", FLAT_LOCATION)
            .with("sigma", FLAT_SCALE)
            .with("theta1", FLAT_LOCATION)
            .with("theta2", FLAT_LOCATION)
            .with("tau1_2", FLAT_VARIANCE)
            .with("tau2_2", FLAT_VARIANCE)
            .with("rho", Prior::Uniform { lower: -1.0, upper: 1.0 }),
    }
}
