//! Experiment configuration from flags, JSON files and named presets.
//!
//! A JSON config is an object with any subset of the [`ExperimentConfig`]
//! fields; missing fields fall back to defaults, except `seed` and the
//! topology, which must come from somewhere. Serializing a resolved config
//! gives a file that parses back to the identical config.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::Alpha;
use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, ExperimentKind, InitialState};
use crate::graph::TopologySpec;

/// Every field optional; merged over defaults by [`PartialConfig::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub kind: Option<ExperimentKind>,
    pub topologies: Option<Vec<TopologySpec>>,
    pub alphas: Option<Vec<Alpha>>,
    pub runs: Option<usize>,
    pub graphs: Option<usize>,
    pub seed: Option<u64>,
    pub max_steps: Option<u64>,
    pub record_every: Option<u64>,
    pub block: Option<usize>,
    pub snapshots: Option<Vec<u64>>,
    pub rho0: Option<f64>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub initial: Option<InitialState>,
}

impl PartialConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config JSON: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `other` win.
    pub fn overlay(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            kind: other.kind.or(self.kind),
            topologies: other.topologies.or(self.topologies),
            alphas: other.alphas.or(self.alphas),
            runs: other.runs.or(self.runs),
            graphs: other.graphs.or(self.graphs),
            seed: other.seed.or(self.seed),
            max_steps: other.max_steps.or(self.max_steps),
            record_every: other.record_every.or(self.record_every),
            block: other.block.or(self.block),
            snapshots: other.snapshots.or(self.snapshots),
            rho0: other.rho0.or(self.rho0),
            dt: other.dt.or(self.dt),
            t_max: other.t_max.or(self.t_max),
            initial: other.initial.or(self.initial),
        }
    }

    /// Fills defaults for `kind` and validates the result.
    pub fn resolve(self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        if let Some(k) = self.kind.filter(|&k| k != kind) {
            return Err(Error::Config(format!("config is for `{k:?}` but `{kind:?}` was requested")));
        }
        let seed =
            self.seed.ok_or_else(|| Error::Config("a seed is required (--seed or \"seed\" in the config)".into()))?;
        let topologies = match (self.topologies, kind) {
            (Some(t), _) => t,
            (None, ExperimentKind::MeanField) => Vec::new(),
            (None, _) => return Err(Error::Config("a topology is required (--topology)".into())),
        };
        let alphas = self.alphas.ok_or_else(|| Error::Config("an alpha grid is required (--alpha)".into()))?;
        let d = ExperimentConfig::new(kind, topologies, alphas, seed);
        let cfg = ExperimentConfig {
            runs: self.runs.unwrap_or(d.runs),
            graphs: self.graphs.unwrap_or(d.graphs),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            record_every: self.record_every.unwrap_or(d.record_every),
            block: self.block.unwrap_or(d.block),
            snapshots: self.snapshots.unwrap_or(d.snapshots.clone()),
            rho0: self.rho0.unwrap_or(d.rho0),
            dt: self.dt.unwrap_or(d.dt),
            t_max: self.t_max.unwrap_or(d.t_max),
            initial: self.initial.unwrap_or(d.initial),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `a:b:step` (inclusive range) or a comma list such as `1.0,1.1,inf`.
pub fn parse_alpha_grid(text: &str) -> Result<Vec<Alpha>> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, end, step] = parts[..] else {
            return Err(Error::Config(format!("alpha range `{text}` must be start:end:step")));
        };
        let num = |s: &str| {
            s.trim().parse::<f64>().map_err(|_| Error::Config(format!("`{s}` in alpha range is not a number")))
        };
        let (start, end, step) = (num(start)?, num(end)?, num(step)?);
        if step.is_nan() || step <= 0.0 || end < start {
            return Err(Error::Config(format!("alpha range `{text}` needs step > 0 and end >= start")));
        }
        let span = (end - start) / step;
        let count = span.round();
        if (span - count).abs() > 1e-6 {
            return Err(Error::Config(format!("alpha range `{text}`: step does not divide the interval")));
        }
        (0..=count as usize).map(|i| Alpha::new(((start + i as f64 * step) * 1e12).round() / 1e12)).collect()
    } else {
        let grid = text.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<Vec<Alpha>>>()?;
        if grid.is_empty() {
            return Err(Error::Config("alpha grid is empty".into()));
        }
        Ok(grid)
    }
}

/// Comma separated nonnegative integers.
pub fn parse_u64_list(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| Error::Config(format!("`{s}` is not a nonnegative integer"))))
        .collect()
}

const PRESETS: &[(&str, &str)] = &[
    ("series", include_str!("../../presets/series.json")),
    ("sweep", include_str!("../../presets/sweep.json")),
    ("stripes", include_str!("../../presets/stripes.json")),
    ("block", include_str!("../../presets/block.json")),
    ("networks", include_str!("../../presets/networks.json")),
    ("meanfield", include_str!("../../presets/meanfield.json")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn preset(name: &str) -> Result<PartialConfig> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        Error::Config(format!("unknown preset `{name}` (available: {})", preset_names().collect::<Vec<_>>().join(", ")))
    })?;
    PartialConfig::from_json(text)
}

pub fn to_json(cfg: &ExperimentConfig) -> String {
    serde_json::to_string(cfg).expect("config serializes")
}
