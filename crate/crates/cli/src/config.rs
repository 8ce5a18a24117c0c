//! Pipeline configuration as JSON, plus month-list parsing.
//!
//! The config file mirrors `PipelineConfig` field for field; every field
//! is optional and missing ones take the library defaults. Months are
//! written `YYYY-MM` everywhere (config keys, month lists, result files).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use somkm_core::calendar::MonthKey;
use somkm_core::pipeline::{
    default_cluster_split, default_months, PipelineConfig, DEFAULT_TOTAL_SOM_CLUSTERS,
};
use somkm_core::Error;

use crate::error::{CliError, Result};

/// `--months` shorthand for the built-in twelve-month default window.
pub const DEFAULT_MONTHS_TOKEN: &str = "paper-default";

/// Parses a strict `YYYY-MM` month (zero-padded, four-digit year).
pub fn parse_month(value: &str) -> Option<MonthKey> {
    let b = value.as_bytes();
    if b.len() != 7 || b[4] != b'-' || !b.iter().enumerate().all(|(i, c)| i == 4 || c.is_ascii_digit())
    {
        return None;
    }
    let year: i32 = value[0..4].parse().ok()?;
    let month: u8 = value[5..7].parse().ok()?;
    MonthKey::new(year, month)
}

/// Parses a `--months` value: either the default-window token or a
/// comma-separated `YYYY-MM` list. The `String` error suits a clap value
/// parser.
pub fn parse_month_spec(spec: &str) -> std::result::Result<Vec<MonthKey>, String> {
    if spec == DEFAULT_MONTHS_TOKEN {
        return Ok(default_months());
    }
    spec.split(',')
        .map(|token| {
            parse_month(token).ok_or_else(|| format!("`{token}` is not a YYYY-MM month"))
        })
        .collect()
}

fn invalid(detail: String) -> CliError {
    CliError::Core(Error::InvalidConfig { detail })
}

/// JSON shape of a config file. Unknown fields are rejected so typos
/// surface instead of silently falling back to defaults.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub months: Option<Vec<String>>,
    pub som_clusters_per_month: Option<BTreeMap<String, usize>>,
    pub som: Option<SomSection>,
    pub pca_q: Option<usize>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub kmeans: Option<KMeansSection>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SomSection {
    pub epochs: Option<usize>,
    pub lr_start: Option<f64>,
    pub lr_end: Option<f64>,
    /// Absent or null: derived per month as half the longer grid side.
    pub sigma_start: Option<f64>,
    pub sigma_end: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KMeansSection {
    pub max_iters: Option<usize>,
    pub n_restarts: Option<usize>,
}

impl ConfigFile {
    /// Applies the file over the library defaults.
    ///
    /// A `months` override re-derives the per-month SOM node split (88
    /// spread near-evenly) unless `som_clusters_per_month` overrides that
    /// too.
    pub fn into_pipeline_config(self) -> Result<PipelineConfig> {
        let mut config = PipelineConfig::default();
        if let Some(month_strings) = self.months {
            let mut months = Vec::with_capacity(month_strings.len());
            for s in &month_strings {
                months.push(
                    parse_month(s)
                        .ok_or_else(|| invalid(format!("months: `{s}` is not a YYYY-MM month")))?,
                );
            }
            config.som_clusters_per_month =
                default_cluster_split(&months, DEFAULT_TOTAL_SOM_CLUSTERS);
            config.months = months;
        }
        if let Some(splits) = self.som_clusters_per_month {
            let mut map = BTreeMap::new();
            for (key, nodes) in splits {
                let month = parse_month(&key).ok_or_else(|| {
                    invalid(format!("som_clusters_per_month: `{key}` is not a YYYY-MM month"))
                })?;
                map.insert(month, nodes);
            }
            config.som_clusters_per_month = map;
        }
        if let Some(som) = self.som {
            if let Some(epochs) = som.epochs {
                config.som.epochs = epochs;
            }
            if let Some(lr_start) = som.lr_start {
                config.som.lr_start = lr_start;
            }
            if let Some(lr_end) = som.lr_end {
                config.som.lr_end = lr_end;
            }
            if som.sigma_start.is_some() {
                config.som.sigma_start = som.sigma_start;
            }
            if let Some(sigma_end) = som.sigma_end {
                config.som.sigma_end = sigma_end;
            }
        }
        if let Some(pca_q) = self.pca_q {
            config.pca_q = pca_q;
        }
        if let Some(k_min) = self.k_min {
            config.k_min = k_min;
        }
        if let Some(k_max) = self.k_max {
            config.k_max = k_max;
        }
        if let Some(kmeans) = self.kmeans {
            if let Some(max_iters) = kmeans.max_iters {
                config.kmeans.max_iters = max_iters;
            }
            if let Some(n_restarts) = kmeans.n_restarts {
                config.kmeans.n_restarts = n_restarts;
            }
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        Ok(config)
    }
}

/// Loads a config file, or the pure defaults when no path is given.
pub fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    let Some(path) = path else {
        return Ok(PipelineConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: ConfigFile = serde_json::from_str(&text)
        .map_err(|e| invalid(format!("config file {}: {e}", path.display())))?;
    file.into_pipeline_config()
}
