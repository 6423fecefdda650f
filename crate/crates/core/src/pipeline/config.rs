use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{HiddenRule, LabelScheme, ENSEMBLE_SIZE};
use crate::error::{Error, Result};
use crate::features::{NormalReference, RATE};
use crate::preprocess::FilterSpec;
use crate::selection::{Objective, VALIDATION_FRACTION};

/// Records per split in quick mode.
pub const QUICK_RECORDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub data_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub annotator: String,
    pub seed: u64,
    pub target_rate: f64,
    pub filter: FilterSpec,
    pub normal_reference: NormalReference,
    pub scheme: LabelScheme,
    pub objective: Objective,
    pub min_improvement: f64,
    pub max_features: usize,
    pub validation_fraction: f64,
    pub wrapper_mlp_epochs: usize,
    pub ensemble_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub balanced: bool,
    pub hidden_grid: Vec<HiddenRule>,
    pub learning_rate_grid: Vec<f64>,
    pub init_variance_grid: Vec<f64>,
    /// Restrict to these record ids; `None` means every DS1/DS2 record.
    pub records: Option<Vec<String>>,
    pub quick: bool,
    pub paper_subsets: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data/mitdb"),
            cache_dir: PathBuf::from(".ecgbeat-cache"),
            annotator: "atr".into(),
            seed: 0,
            target_rate: RATE,
            filter: FilterSpec::default(),
            normal_reference: NormalReference::Proxy,
            scheme: LabelScheme::FiveClass,
            objective: Objective::MeanF,
            min_improvement: 0.001,
            max_features: crate::features::N_FEATURES,
            validation_fraction: VALIDATION_FRACTION,
            wrapper_mlp_epochs: 30,
            ensemble_size: ENSEMBLE_SIZE,
            max_epochs: 200,
            patience: 10,
            balanced: false,
            hidden_grid: vec![HiddenRule::SumOver2, HiddenRule::SumOver3],
            learning_rate_grid: vec![0.1, 0.2, 0.3],
            init_variance_grid: vec![0.1, 0.2, 0.3],
            records: None,
            quick: false,
            paper_subsets: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::InvalidParameter(format!("config key `{key}`: cannot parse `{v}`")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse(key, s)).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::InvalidParameter(format!("config key `{key}`: `{v}` is not a boolean"))),
    }
}

impl PipelineConfig {
    /// Apply `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("config line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "data_dir" => self.data_dir = v.into(),
            "cache_dir" => self.cache_dir = v.into(),
            "annotator" => self.annotator = v.into(),
            "seed" => self.seed = parse(key, v)?,
            "target_rate" => self.target_rate = parse(key, v)?,
            "median_window_1_ms" => self.filter.median_window_1_ms = parse(key, v)?,
            "median_window_2_ms" => self.filter.median_window_2_ms = parse(key, v)?,
            "notch_center_hz" => self.filter.notch_center_hz = parse(key, v)?,
            "notch_q" => self.filter.notch_q = parse(key, v)?,
            "normal_reference" => {
                self.normal_reference = match v {
                    "proxy" => NormalReference::Proxy,
                    "labels" => NormalReference::Labels,
                    _ => return Err(Error::InvalidParameter(format!("normal_reference `{v}` is not proxy or labels"))),
                }
            }
            "scheme" => self.scheme = v.parse()?,
            "objective" => self.objective = v.parse()?,
            "min_improvement" => self.min_improvement = parse(key, v)?,
            "max_features" => self.max_features = parse(key, v)?,
            "validation_fraction" => self.validation_fraction = parse(key, v)?,
            "wrapper_mlp_epochs" => self.wrapper_mlp_epochs = parse(key, v)?,
            "ensemble_size" => self.ensemble_size = parse(key, v)?,
            "max_epochs" => self.max_epochs = parse(key, v)?,
            "patience" => self.patience = parse(key, v)?,
            "balanced" => self.balanced = parse_bool(key, v)?,
            "hidden_grid" => self.hidden_grid = parse_list(key, v)?,
            "learning_rate_grid" => self.learning_rate_grid = parse_list(key, v)?,
            "init_variance_grid" => self.init_variance_grid = parse_list(key, v)?,
            "records" => self.records = Some(parse_list(key, v)?),
            "quick" => self.quick = parse_bool(key, v)?,
            "paper_subsets" => self.paper_subsets = parse_bool(key, v)?,
            _ => return Err(Error::InvalidParameter(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_rate != RATE {
            return Err(Error::InvalidParameter(format!(
                "target_rate {} is not supported; the resampler and feature windows are fixed at {RATE} Hz",
                self.target_rate
            )));
        }
        if self.ensemble_size == 0 {
            return Err(Error::InvalidParameter("ensemble_size must be at least 1".into()));
        }
        if self.hidden_grid.is_empty() || self.learning_rate_grid.is_empty() || self.init_variance_grid.is_empty() {
            return Err(Error::InvalidParameter("hyperparameter grids must be non-empty".into()));
        }
        let (lo, hi) = crate::classifiers::mlp::LEARNING_RATE_RANGE;
        if let Some(eta) = self.learning_rate_grid.iter().find(|e| !(lo..=hi).contains(*e)) {
            return Err(Error::InvalidParameter(format!("learning rate {eta} outside [{lo}, {hi}]")));
        }
        let (lo, hi) = crate::classifiers::mlp::INIT_VARIANCE_RANGE;
        if let Some(v) = self.init_variance_grid.iter().find(|v| !(lo..=hi).contains(*v)) {
            return Err(Error::InvalidParameter(format!("init variance {v} outside [{lo}, {hi}]")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        PipelineConfig::default().validate().unwrap();
    }

    #[test]
    fn key_value_file() {
        let mut c = PipelineConfig::default();
        c.apply_text("# comment\nseed = 7\n\nhidden_grid = sum/3, 6\nrecords = 100,101 # inline\nquick=yes\n")
            .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.hidden_grid, vec![HiddenRule::SumOver3, HiddenRule::Explicit(6)]);
        assert_eq!(c.records, Some(vec!["100".to_string(), "101".to_string()]));
        assert!(c.quick);
        assert!(c.apply_text("bogus = 1").is_err());
        assert!(c.apply_text("seed").is_err());
        assert!(c.apply_text("seed = x").is_err());
        c.learning_rate_grid = vec![0.5];
        assert!(c.validate().is_err());
    }
}
