//! Run configuration: a JSON file, overridden field by field by flags.

use std::path::{Path, PathBuf};

use jumppat::algebra::{Field, Param, Tolerances};
use jumppat::io::{model_from_json, ModelJson};
use jumppat::model::{build_xy_chain, ChainSpec, OpenSystemModel};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    #[default]
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Chain {
    Xx,
    Xy,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Probability,
    Trace,
}

/// Either a builtin chain or a model file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub chain: Option<Chain>,
    pub length: Option<usize>,
    pub gamma: Option<Value>,
    pub kappa: Option<Value>,
    pub hopping: Option<Value>,
    /// Path to a model JSON, relative to the config file.
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolerancesSection {
    pub tol_rank: Option<f64>,
    pub cond_max: Option<f64>,
    pub tol_psd: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub order: Option<usize>,
    pub mi_max: Option<usize>,
    pub two_point_max: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub steps: Option<usize>,
    pub burn_in: Option<usize>,
    pub trajectories: Option<usize>,
    /// Occupation string such as `"110"`; defaults to the jump steady state.
    pub initial: Option<String>,
    pub keep_states: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternsSection {
    pub trials: Option<usize>,
    pub steps: Option<usize>,
    pub max_states: Option<usize>,
    pub tol_match: Option<f64>,
    pub bit_cap: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSection {
    pub samples: Option<usize>,
    pub burn_in: Option<usize>,
    pub horizon: Option<usize>,
    pub nc: Option<Vec<usize>>,
    pub weight_min: Option<f64>,
    pub backend: Option<Backend>,
    pub dump_distances: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LikelihoodSection {
    pub string: Option<String>,
    /// Alternative models; each missing field falls back to `model`.
    pub candidates: Option<Vec<ModelSection>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub monitored: Option<Vec<String>>,
    pub mode: Option<Mode>,
    pub tolerances: TolerancesSection,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub stats: StatsSection,
    pub simulate: SimulateSection,
    pub patterns: PatternsSection,
    pub cluster: ClusterSection,
    pub likelihood: LikelihoodSection,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    pub fn tolerances(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            tol_rank: self.tolerances.tol_rank.unwrap_or(d.tol_rank),
            cond_max: self.tolerances.cond_max.unwrap_or(d.cond_max),
            tol_psd: self.tolerances.tol_psd.unwrap_or(d.tol_psd),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Config("this command is stochastic and needs --seed".into()))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if path.is_relative() => base.join(path),
            _ => path.to_path_buf(),
        }
    }

    pub fn build_model<T: Field>(&self, section: &ModelSection) -> Result<OpenSystemModel<T>, CliError> {
        let model = if let Some(file) = &section.file {
            let path = self.resolve(file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("cannot read model {}: {e}", path.display())))?;
            let json: ModelJson =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("model {}: {e}", path.display())))?;
            model_from_json::<T>(&json)?
        } else {
            // A bare length selects the xx chain.
            let chain = section
                .chain
                .or(section.length.map(|_| Chain::Xx))
                .ok_or_else(|| CliError::Config("no model: give --L, --chain or a model file".into()))?;
            let length = section.length.ok_or_else(|| CliError::Config("chain length --L is required".into()))?;
            let gamma = param(section.gamma.as_ref(), "gamma")?.unwrap_or_else(|| Param::from(1));
            let hopping = param(section.hopping.as_ref(), "hopping")?.unwrap_or_else(|| Param::from(1));
            let kappa = match chain {
                Chain::Xx => match param(section.kappa.as_ref(), "kappa")? {
                    Some(k) if !k.is_zero() => {
                        return Err(CliError::Config("the xx chain has kappa = 0; use --chain xy".into()))
                    }
                    _ => Param::from(0),
                },
                Chain::Xy => param(section.kappa.as_ref(), "kappa")?
                    .ok_or_else(|| CliError::Config("the xy chain needs --kappa".into()))?,
            };
            build_xy_chain::<T>(&ChainSpec { length, hopping, gamma, kappa })?
        };
        Ok(match &self.monitored {
            Some(labels) => model.with_monitored(labels.iter().cloned())?,
            None => model,
        })
    }
}

/// Numbers and strings like `"1/2"` are both parsed exactly from their
/// decimal text.
fn param(value: Option<&Value>, name: &str) -> Result<Option<Param>, CliError> {
    let Some(value) = value else { return Ok(None) };
    let text = match value {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(CliError::Config(format!("{name} must be a number or a \"p/q\" string"))),
    };
    text.parse::<Param>().map(Some).map_err(|e| CliError::Config(format!("{name}: {e}")))
}

/// Overlays `over` onto `base`: fields present in `over` win.
pub fn overlay_model(base: &ModelSection, over: &ModelSection) -> ModelSection {
    ModelSection {
        chain: over.chain.or(base.chain),
        length: over.length.or(base.length),
        gamma: over.gamma.clone().or_else(|| base.gamma.clone()),
        kappa: over.kappa.clone().or_else(|| base.kappa.clone()),
        hopping: over.hopping.clone().or_else(|| base.hopping.clone()),
        file: over.file.clone().or_else(|| base.file.clone()),
    }
}

pub fn describe(section: &ModelSection) -> String {
    if let Some(file) = &section.file {
        return file.display().to_string();
    }
    let mut out = match section.chain {
        Some(Chain::Xy) => "xy".to_string(),
        Some(Chain::Xx) => "xx".to_string(),
        None if section.length.is_some() => "xx".to_string(),
        None => "model".to_string(),
    };
    if let Some(l) = section.length {
        out.push_str(&format!(" L={l}"));
    }
    for (name, v) in [("gamma", &section.gamma), ("kappa", &section.kappa), ("hopping", &section.hopping)] {
        match v {
            Some(Value::String(s)) => out.push_str(&format!(" {name}={s}")),
            Some(v) => out.push_str(&format!(" {name}={v}")),
            None => {}
        }
    }
    out
}
