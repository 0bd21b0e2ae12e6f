//! TOML configuration for utility models and experiments.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use utilsearch_core::mau::CurveKind;
use utilsearch_core::{
    calibrate_multiplicative, Attribute, AttributeUtility, AttributeValues, Form, LookaheadDepth, ResourceLimits,
    UnitConversion, UtilityModel,
};

use crate::Error;

/// Multiplicative model calibrated so that 20 moves / 8 min, 68 moves /
/// 6 min and 93 moves / 4 min (all under 9 MB) are equally good, with caps
/// of 100 moves, 10 minutes and 10 MB.
pub const DEFAULT_UTILITY: &str = include_str!("../configs/utility_default.toml");
pub const DEFAULT_EXPERIMENT: &str = include_str!("../configs/experiment_default.toml");
pub const FULL_EXPERIMENT: &str = include_str!("../configs/experiment_full.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeConfig {
    pub name: String,
    #[serde(default)]
    pub best: f64,
    pub bound: f64,
    pub curve: CurveKind,
    /// Breakpoints `[value, utility]` for piecewise curves.
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    Additive,
    Multiplicative,
    Multilinear,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityConfig {
    pub name: String,
    pub form: FormKind,
    #[serde(rename = "attribute")]
    pub attributes: Vec<AttributeConfig>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// Master constant of the multiplicative form.
    #[serde(default)]
    pub k: Option<f64>,
    /// `[i, j, k_ij]` terms of the multilinear form.
    #[serde(default)]
    pub interactions: Vec<(usize, usize, f64)>,
    /// Outcomes judged equivalent, values in attribute order. Triggers
    /// calibration of a multiplicative model at load time.
    #[serde(default)]
    pub equivalence_rows: Vec<Vec<f64>>,
}

impl AttributeConfig {
    fn build(&self) -> Result<AttributeUtility, Error> {
        let attribute = Attribute::parse(&self.name);
        let a = match self.curve {
            CurveKind::Linear => AttributeUtility::linear(attribute, self.best, self.bound)?,
            CurveKind::Free => AttributeUtility::free(attribute, self.bound)?,
            CurveKind::Piecewise => {
                AttributeUtility::piecewise(attribute, self.points.iter().map(|p| (p[0], p[1])).collect(), self.bound)?
            }
        };
        Ok(a)
    }
}

impl UtilityConfig {
    pub fn parse(text: &str) -> Result<UtilityConfig, Error> {
        Ok(toml::from_str(text)?)
    }

    pub fn build(&self) -> Result<UtilityModel, Error> {
        let attrs = self.attributes.iter().map(AttributeConfig::build).collect::<Result<Vec<_>, _>>()?;
        if !self.equivalence_rows.is_empty() {
            if self.form != FormKind::Multiplicative {
                return Err(Error::Config("equivalence_rows calibrate a multiplicative model only".into()));
            }
            let rows = self
                .equivalence_rows
                .iter()
                .map(|r| {
                    if r.len() != attrs.len() {
                        return Err(Error::Config("equivalence row length differs from attribute count".into()));
                    }
                    let mut v = AttributeValues::new();
                    for (a, x) in attrs.iter().zip(r) {
                        v.set(a.attribute.clone(), *x);
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(calibrate_multiplicative(self.name.clone(), &rows, attrs)?);
        }
        let weights = self.weights.clone().ok_or_else(|| Error::Config("weights required".into()))?;
        let form = match self.form {
            FormKind::Additive => Form::Additive { weights },
            FormKind::Multiplicative => Form::Multiplicative {
                weights,
                k: self.k.ok_or_else(|| Error::Config("multiplicative form needs k".into()))?,
            },
            FormKind::Multilinear => Form::Multilinear { weights, interactions: self.interactions.clone() },
        };
        Ok(UtilityModel::new(self.name.clone(), attrs, form)?)
    }
}

pub fn load_utility(path: Option<&Path>) -> Result<UtilityModel, Error> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
        None => DEFAULT_UTILITY.to_string(),
    };
    UtilityConfig::parse(&text)?.build()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Markov,
    Empirical,
}

/// Which depth the selector is told about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthSource {
    /// The verified optimal depth.
    True,
    /// Manhattan distance of the initial state.
    Manhattan,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub width: usize,
    pub depths: Vec<u32>,
    pub instances_per_depth: usize,
    pub levels: Vec<u32>,
    pub seed: u64,
    pub max_moves: u32,
    pub node_budget: u64,
    pub model_kind: ModelKind,
    /// Instances per depth used to fit the model, drawn from their own
    /// seed stream.
    pub training_per_depth: usize,
    pub markov_samples: usize,
    pub generations_per_minute: f64,
    pub nodes_per_megabyte: f64,
    pub depth_source: DepthSource,
    pub generation_attempts: u32,
    /// Utility config file; the built-in default when absent.
    #[serde(default)]
    pub utility: Option<PathBuf>,
    /// Previously fitted model; fitted afresh when absent.
    #[serde(default)]
    pub model: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, Error> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<ExperimentConfig, Error> {
        match path {
            Some(p) => ExperimentConfig::parse(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
            None => ExperimentConfig::parse(DEFAULT_EXPERIMENT),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let positive = [
            ("instances_per_depth", self.instances_per_depth as u64),
            ("training_per_depth", self.training_per_depth as u64),
            ("markov_samples", self.markov_samples as u64),
            ("max_moves", self.max_moves as u64),
            ("node_budget", self.node_budget),
            ("generation_attempts", self.generation_attempts as u64),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if self.depths.is_empty() || self.levels.is_empty() {
            return Err(Error::Config("depths and levels must be nonempty".into()));
        }
        let max = utilsearch_core::exact::max_depth(self.width);
        if let Some(d) = self.depths.iter().find(|&&d| d > max) {
            return Err(Error::Config(format!("depth {d} unreachable on width {}", self.width)));
        }
        if !(self.generations_per_minute > 0.0 && self.nodes_per_megabyte > 0.0) {
            return Err(Error::Config("unit conversions must be positive".into()));
        }
        self.lookahead_levels()?;
        Ok(())
    }

    pub fn lookahead_levels(&self) -> Result<Vec<LookaheadDepth>, Error> {
        let mut levels = self.levels.iter().map(|&l| LookaheadDepth::new(l)).collect::<Result<Vec<_>, _>>()?;
        levels.sort();
        levels.dedup();
        Ok(levels)
    }

    pub fn limits(&self) -> ResourceLimits {
        ResourceLimits { max_moves: self.max_moves, node_budget: self.node_budget }
    }

    pub fn units(&self) -> UnitConversion {
        UnitConversion { generations_per_minute: self.generations_per_minute, nodes_per_megabyte: self.nodes_per_megabyte }
    }
}

/// Parses `1-12`, `1,2,5` or combinations such as `1-4,8`.
pub fn parse_levels(text: &str) -> Result<Vec<u32>, Error> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::Config(format!("bad level list '{text}'"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(Error::Config("empty level list".into()));
    }
    Ok(out)
}
