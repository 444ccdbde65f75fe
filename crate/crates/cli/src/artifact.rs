//! Artifact files. JSON artifacts wrap their payload as
//! `{"provenance": ..., "result": ...}`; CSV artifacts carry the same
//! provenance as a single leading `# {...}` line.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::Command;
use crate::ingest::InputError;

/// The resolved invocation behind an artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: Option<u64>,
    pub invocation: Command,
    /// Facts about the inputs that downstream commands need.
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub context: Value,
}

impl Provenance {
    pub fn new(invocation: &Command, seed: Option<u64>) -> Self {
        Self {
            tool: "bevt".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            invocation: invocation.clone(),
            context: Value::Null,
        }
    }

    pub fn with_context(mut self, context: Value) -> Self {
        self.context = context;
        self
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    provenance: Provenance,
    result: T,
}

fn target(dir: &Path, name: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(name))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, prov: &Provenance, result: &T) -> anyhow::Result<PathBuf> {
    let path = target(dir, name)?;
    let env = Envelope {
        provenance: prov.clone(),
        result,
    };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

pub fn write_csv(dir: &Path, name: &str, prov: &Provenance, body: &str) -> anyhow::Result<PathBuf> {
    let path = target(dir, name)?;
    let text = format!("# {}\n{body}", serde_json::to_string(prov)?);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Payload of a JSON artifact, or the whole file when it has no envelope.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<(Option<Provenance>, T)> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| InputError(format!("{}: invalid JSON: {e}", path.display())))?;
    let bad = |e: serde_json::Error| InputError(format!("{}: unexpected layout: {e}", path.display()));
    if v.get("provenance").is_some() && v.get("result").is_some() {
        let env: Envelope<T> = serde_json::from_value(v).map_err(bad)?;
        Ok((Some(env.provenance), env.result))
    } else {
        Ok((None, serde_json::from_value(v).map_err(bad)?))
    }
}

/// Provenance line (if any) and full text of a CSV artifact.
pub fn read_csv(path: &Path) -> anyhow::Result<(Option<Provenance>, String)> {
    let text = read(path)?;
    let prov = match text.lines().next().and_then(|l| l.strip_prefix('#')) {
        Some(line) => serde_json::from_str(line.trim()).ok(),
        None => None,
    };
    Ok((prov, text))
}

/// Provenance of any artifact, for replay.
pub fn read_provenance(path: &Path) -> anyhow::Result<Provenance> {
    let text = read(path)?;
    let prov = if text.starts_with('#') {
        read_csv(path)?.0
    } else {
        read_json::<Value>(path)?.0
    };
    prov.ok_or_else(|| InputError(format!("{}: no embedded provenance", path.display())).into())
}
