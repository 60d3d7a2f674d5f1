//! Versioned TOML experiment configs. Unknown keys are hard errors so a
//! typo cannot silently fall back to a default in a long-running sweep.

use std::path::Path;

use boolmodel::analysis::{MarginPolicy, SweepPlan};
use boolmodel::grains::{GrainLaw, LawDoc};
use serde::Deserialize;

use crate::CliError;

pub const CONFIG_VERSION: &str = "boolmodel/config/1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: String,
    /// Must agree with the law's own dimension; catches copy-paste slips.
    pub dimension: usize,
    pub law: LawDoc,
    pub sweep: SweepDoc,
    pub margin: MarginDoc,
    #[serde(default)]
    pub output: OutputDoc,
    pub probe: Option<ProbeDoc>,
    pub paths: Option<PathsDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDoc {
    pub intensities: Vec<f64>,
    pub sides: Vec<f64>,
    pub replicas: u64,
    pub root_seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MarginDoc {
    Fixed { value: f64 },
    Auto { miss_prob: f64 },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDoc {
    pub dir: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeDoc {
    pub spacing: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsDoc {
    pub n_max: usize,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if cfg.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "unrecognized config version {:?} (expected {:?})",
                cfg.version, CONFIG_VERSION
            )));
        }
        cfg.law()?; // validate the law itself before anything runs
        Ok(cfg)
    }

    pub fn law(&self) -> Result<GrainLaw, CliError> {
        let law = GrainLaw::from_doc(&self.law).map_err(|e| CliError::Config(e.to_string()))?;
        if law.dim() != self.dimension {
            return Err(CliError::Config(format!(
                "config dimension {} does not match law dimension {}",
                self.dimension,
                law.dim()
            )));
        }
        Ok(law)
    }

    /// Intensity-major cartesian product of the sweep axes.
    pub fn plan(&self) -> Result<SweepPlan, CliError> {
        let law = self.law()?;
        let mut grid = Vec::with_capacity(self.sweep.intensities.len() * self.sweep.sides.len());
        for &u in &self.sweep.intensities {
            for &l in &self.sweep.sides {
                grid.push((u, l));
            }
        }
        let margin = match self.margin {
            MarginDoc::Fixed { value } => MarginPolicy::Fixed(value),
            MarginDoc::Auto { miss_prob } => MarginPolicy::Auto { miss_prob },
        };
        let plan = SweepPlan {
            law,
            grid,
            replicas: self.sweep.replicas,
            root_seed: self.sweep.root_seed,
            margin,
        };
        plan.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(plan)
    }

    pub fn probe_spacing(&self) -> Result<f64, CliError> {
        self.probe
            .as_ref()
            .map(|p| p.spacing)
            .ok_or_else(|| CliError::Config("missing [probe] spacing".into()))
    }

    pub fn n_max(&self) -> Result<usize, CliError> {
        self.paths
            .as_ref()
            .map(|p| p.n_max)
            .ok_or_else(|| CliError::Config("missing [paths] n_max".into()))
    }
}
