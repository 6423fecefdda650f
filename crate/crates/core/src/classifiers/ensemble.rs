use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mlp::{mlp_train, Dataset, HiddenRule, Mlp, TrainConfig, TrainOutcome};
use super::Classifier;
use crate::error::{Error, Result};

pub const ENSEMBLE_SIZE: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub hidden: HiddenRule,
    pub init_variance: f64,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
}

impl EnsembleConfig {
    /// `count` consecutive seeds from `base`.
    pub fn with_seeds(hidden: HiddenRule, init_variance: f64, train: TrainConfig, base: u64, count: usize) -> Self {
        Self { hidden, init_variance, train, seeds: (0..count as u64).map(|k| base + k).collect() }
    }
}

/// MLPs sharing a topology, combined by averaging their outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    members: Vec<Mlp>,
}

fn check_distinct(seeds: impl IntoIterator<Item = u64>) -> Result<()> {
    let mut seen = HashSet::new();
    for s in seeds {
        if !seen.insert(s) {
            return Err(Error::InvalidParameter(format!("ensemble seed {s} appears twice")));
        }
    }
    Ok(())
}

impl Ensemble {
    pub fn new(members: Vec<Mlp>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::InvalidParameter("empty ensemble".into()))?;
        let shape = (first.n_inputs, first.n_hidden, first.n_outputs);
        if members.iter().any(|m| (m.n_inputs, m.n_hidden, m.n_outputs) != shape) {
            return Err(Error::InvalidParameter("ensemble members differ in topology".into()));
        }
        check_distinct(members.iter().map(|m| m.seed))?;
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Mlp] {
        &self.members
    }
}

impl Classifier for Ensemble {
    fn dim(&self) -> usize {
        self.members[0].n_inputs
    }

    fn n_classes(&self) -> usize {
        self.members[0].n_outputs
    }

    fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.n_classes()];
        for m in &self.members {
            for (a, v) in acc.iter_mut().zip(m.forward(x)?) {
                *a += v;
            }
        }
        let k = self.members.len() as f64;
        Ok(acc.into_iter().map(|a| a / k).collect())
    }
}

/// Train one member per seed in parallel. Per-member outcomes are returned
/// in seed order for per-run reporting.
pub fn ensemble_train(
    cfg: &EnsembleConfig,
    n_outputs: usize,
    train: &Dataset<'_>,
    valid: &Dataset<'_>,
) -> Result<(Ensemble, Vec<TrainOutcome>)> {
    check_distinct(cfg.seeds.iter().copied())?;
    let n_inputs = train.x.ncols();
    let outcomes: Vec<TrainOutcome> = cfg
        .seeds
        .par_iter()
        .enumerate()
        .map(|(k, &seed)| {
            let init = Mlp::new(n_inputs, n_outputs, cfg.hidden, seed, cfg.init_variance)?;
            mlp_train(&init, train, valid, &cfg.train)
                .map_err(|e| Error::Numeric(format!("ensemble member {k} (seed {seed}): {e}")))
        })
        .collect::<Result<_>>()?;
    let ensemble = Ensemble::new(outcomes.iter().map(|o| o.model.clone()).collect())?;
    Ok((ensemble, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn duplicate_seeds_rejected() {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let y = [0, 1];
        let d = Dataset { x: &x, y: &y };
        let mut cfg = EnsembleConfig::with_seeds(HiddenRule::Explicit(2), 0.2, TrainConfig::default(), 1, 3);
        cfg.seeds[2] = 1;
        assert!(ensemble_train(&cfg, 2, &d, &d).is_err());
    }

    #[test]
    fn copies_of_one_model_predict_like_it() {
        let m = Mlp::new(3, 4, HiddenRule::SumOver2, 9, 0.3).unwrap();
        let copies: Vec<Mlp> = (0..5).map(|k| Mlp { seed: 100 + k, ..m.clone() }).collect();
        let e = Ensemble::new(copies).unwrap();
        let x = [0.2, -0.4, 1.1];
        let a = e.scores(&x).unwrap();
        let b = m.forward(&x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-15);
        }
        assert_eq!(e.predict(&x).unwrap(), m.predict(&x).unwrap());
    }

    #[test]
    fn default_size() {
        let cfg = EnsembleConfig::with_seeds(HiddenRule::SumOver2, 0.2, TrainConfig::default(), 0, ENSEMBLE_SIZE);
        assert_eq!(cfg.seeds.len(), 20);
        assert!(check_distinct(cfg.seeds.iter().copied()).is_ok());
    }
}
