//! Experiment configuration: one JSON document, with CLI flags layered on top.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::GridConfig;
use crate::searchers::{Policy, SearchConfig};
use crate::template::TemplateParams;
use crate::visibility::VisibilityParams;

/// Where the per-cell prior comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum PriorSpec {
    Flat,
    Center,
    Noise,
    /// Density of the humans' third fixations on the same image.
    Human,
    /// A saliency map listed under this name in the manifest.
    Saliency(String),
}

impl From<String> for PriorSpec {
    fn from(s: String) -> Self {
        match s.as_str() {
            "flat" => PriorSpec::Flat,
            "center" => PriorSpec::Center,
            "noise" => PriorSpec::Noise,
            "human" => PriorSpec::Human,
            _ => PriorSpec::Saliency(s),
        }
    }
}

impl From<PriorSpec> for String {
    fn from(p: PriorSpec) -> String {
        p.name().to_string()
    }
}

impl PriorSpec {
    pub fn name(&self) -> &str {
        match self {
            PriorSpec::Flat => "flat",
            PriorSpec::Center => "center",
            PriorSpec::Noise => "noise",
            PriorSpec::Human => "human",
            PriorSpec::Saliency(s) => s,
        }
    }
}

fn default_budgets() -> Vec<usize> {
    vec![2, 4, 8, 12]
}
fn default_mc() -> usize {
    64
}
fn default_ior() -> usize {
    1
}
fn default_kernel() -> f64 {
    25.0
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_prior() -> PriorSpec {
    PriorSpec::Center
}
fn default_policy() -> Policy {
    Policy::Cibs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Stimulus manifest (JSON).
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    /// Human scanpath table (CSV).
    #[serde(default)]
    pub scanpaths: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub visibility: VisibilityParams,
    #[serde(default)]
    pub template: TemplateParams,
    #[serde(default = "default_policy")]
    pub policy: Policy,
    #[serde(default = "default_prior")]
    pub prior: PriorSpec,
    #[serde(default = "default_budgets")]
    pub budgets: Vec<usize>,
    #[serde(default = "default_mc")]
    pub mc_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default = "default_ior")]
    pub ior_radius: usize,
    /// Width of the center-bias prior; a quarter of the smaller image side
    /// when unset.
    #[serde(default)]
    pub center_sigma_px: Option<f64>,
    #[serde(default = "default_kernel")]
    pub human_kernel_sigma_px: f64,
    #[serde(default)]
    pub exec: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl RunConfig {
    /// Reads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::file(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.manifest, &mut cfg.scanpaths].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.visibility.validate()?;
        self.template.validate()?;
        if self.mc_samples == 0 {
            return Err(Error::domain("mc_samples must be at least 1"));
        }
        if self.budgets.is_empty() || self.budgets.contains(&0) {
            return Err(Error::domain("budgets must be a non-empty list of positive integers"));
        }
        if !(self.human_kernel_sigma_px > 0.0) {
            return Err(Error::domain("human_kernel_sigma_px must be positive"));
        }
        Ok(())
    }

    /// Budgets sorted ascending without duplicates.
    pub fn sorted_budgets(&self) -> Vec<usize> {
        let mut b = self.budgets.clone();
        b.sort_unstable();
        b.dedup();
        b
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            policy: self.policy,
            mc_samples: self.mc_samples,
            seed: self.seed,
            response_mode: self.template.mode,
            ior_radius: self.ior_radius,
            exec: self.exec,
        }
    }

    pub fn manifest_path(&self) -> Result<&Path> {
        self.manifest
            .as_deref()
            .ok_or_else(|| Error::domain("no manifest given (config key 'manifest')"))
    }

    pub fn scanpaths_path(&self) -> Result<&Path> {
        self.scanpaths
            .as_deref()
            .ok_or_else(|| Error::domain("no scanpath table given (config key 'scanpaths')"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_defaults() {
        let c = RunConfig::default();
        assert_eq!(c.grid.cell_size(), 32);
        assert_eq!((c.grid.cols(), c.grid.rows()), (32, 24));
        assert_eq!((c.template.a, c.template.b), (3.0, 4.0));
        assert_eq!((c.visibility.sigma_x_sq, c.visibility.sigma_y_sq), (2600.0, 4000.0));
        assert_eq!(c.budgets, vec![2, 4, 8, 12]);
        assert_eq!(c.mc_samples, 64);
    }

    #[test]
    fn parses_and_rejects() {
        let c: RunConfig = serde_json::from_str(
            r#"{"grid": {"cell_size": 16, "image_width": 320, "image_height": 240},
                "policy": "saliency_ior", "prior": "deepgaze2", "budgets": [12, 2]}"#,
        )
        .unwrap();
        assert_eq!(c.grid.cols(), 20);
        assert_eq!(c.policy, Policy::SaliencyIor);
        assert_eq!(c.prior, PriorSpec::Saliency("deepgaze2".into()));
        assert_eq!(c.sorted_budgets(), vec![2, 12]);
        assert!(serde_json::from_str::<RunConfig>(r#"{"polcy": "ibs"}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"grid": {"cell_size": 0, "image_width": 3, "image_height": 3}}"#).is_err());
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), c);
    }
}
