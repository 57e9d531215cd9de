//! Experiment configuration.
//!
//! Settings come from three layers, later ones winning: a flat TOML file
//! (`--config`), `SEMSUB_<KEY>` environment variables, and command-line
//! flags. Relative paths in the file are resolved against the file's
//! directory; paths from the environment or flags against the working
//! directory. Environment values use TOML syntax (`[10, 50]`, `true`, `3`),
//! and anything that does not parse as TOML is taken as a bare string.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, Result};

pub const ENV_PREFIX: &str = "SEMSUB_";

/// Keys that hold file-system paths.
const PATH_KEYS: [&str; 8] = [
    "embeddings",
    "sentence_embeddings",
    "pairs",
    "tasks",
    "subspace",
    "output",
    "words",
    "out_dir",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Word vectors in text format; pair entries are tokens.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    /// Sentence embeddings (JSON lines); pair entries are sentence ids.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentence_embeddings: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tasks: Option<Vec<PathBuf>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positive_label: Option<String>,

    /// `RAW` or `NORM`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Fixed number of components; cross-validated when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_folds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kinds: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalize_inputs: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centered_projection: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform_priors: Option<bool>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub subspace: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub words: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_neighbors: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclude_variants: Option<bool>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench_pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench_task: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench_topic_shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench_noise: Option<f64>,
}

impl ExperimentConfig {
    /// Merges the file at `path` (if any), the environment, and `flags`.
    pub fn resolve(path: Option<&Path>, flags: &ExperimentConfig) -> Result<ExperimentConfig> {
        let vars: Vec<(String, String)> = std::env::vars().collect();
        Self::resolve_with_env(path, flags, &vars)
    }

    pub fn resolve_with_env(
        path: Option<&Path>,
        flags: &ExperimentConfig,
        vars: &[(String, String)],
    ) -> Result<ExperimentConfig> {
        let mut table = match path {
            Some(p) => file_table(p)?,
            None => Table::new(),
        };
        table.extend(env_table(vars));
        let flag_table = Table::try_from(flags).map_err(|e| CliError::Internal(e.to_string()))?;
        table.extend(flag_table);
        Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))
    }

    /// The configuration as TOML, without settings that cannot change results.
    pub fn to_reproducible_toml(&self) -> String {
        let mut copy = self.clone();
        copy.threads = None;
        toml::to_string(&copy).expect("configuration serializes")
    }

    pub fn require<T: Clone>(value: &Option<T>, key: &'static str) -> Result<T> {
        value.clone().ok_or(CliError::Missing(key))
    }
}

fn file_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    for key in PATH_KEYS {
        if let Some(v) = table.get_mut(key) {
            rebase(v, base);
        }
    }
    Ok(table)
}

fn rebase(value: &mut Value, base: &Path) {
    match value {
        Value::String(s) => {
            let p = Path::new(s.as_str());
            if p.is_relative() {
                *s = base.join(p).to_string_lossy().into_owned();
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| rebase(v, base)),
        _ => {}
    }
}

fn env_table(vars: &[(String, String)]) -> Table {
    let mut table = Table::new();
    for (name, raw) in vars {
        let Some(key) = name.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let key = key.to_ascii_lowercase();
        let value = format!("v = {raw}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.clone()));
        // Path lists may be given as a bare comma-separated string.
        let value = match (key.as_str(), value) {
            ("tasks", Value::String(s)) => {
                Value::Array(s.split(',').map(|p| Value::String(p.trim().to_string())).collect())
            }
            (_, v) => v,
        };
        table.insert(key, value);
    }
    table
}
