//! Forward stepwise feature selection with a classifier in the loop.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{
    fit_model, labelled_rows, Classifier, Dataset, FitSpec, HiddenRule, LabelScheme, ModelKind, TrainConfig,
};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_predictions, BinaryMetrics, Evaluation};
use crate::features::{FeatureMatrix, Standardizer};
use crate::wfdb::AamiClass;

pub const VALIDATION_FRACTION: f64 = 0.25;

/// What the wrapper maximizes. F-measures enter on a 0..1 scale and an
/// undefined F counts as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    MeanF,
    SvebF,
    VebF,
}

impl Objective {
    pub fn score(self, e: &Evaluation) -> f64 {
        let f = |m: &BinaryMetrics| m.f_measure.unwrap_or(0.0) / 100.0;
        match self {
            Objective::MeanF => 0.5 * (f(&e.sveb) + f(&e.veb)),
            Objective::SvebF => f(&e.sveb),
            Objective::VebF => f(&e.veb),
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean-f" => Ok(Objective::MeanF),
            "sveb-f" => Ok(Objective::SvebF),
            "veb-f" => Ok(Objective::VebF),
            other => Err(Error::InvalidParameter(format!("unknown objective `{other}`"))),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::MeanF => "mean-f",
            Objective::SvebF => "sveb-f",
            Objective::VebF => "veb-f",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrapperConfig {
    pub classifier: ModelKind,
    pub scheme: LabelScheme,
    pub objective: Objective,
    pub max_features: usize,
    pub min_improvement: f64,
    pub seed: u64,
    /// Settings for MLP candidates. One seed, capped epochs, no early stopping set.
    pub hidden: HiddenRule,
    pub init_variance: f64,
    pub learning_rate: f64,
    pub mlp_max_epochs: usize,
}

impl WrapperConfig {
    pub fn new(classifier: ModelKind) -> Self {
        Self {
            classifier,
            scheme: LabelScheme::FiveClass,
            objective: Objective::MeanF,
            max_features: crate::features::N_FEATURES,
            min_improvement: 0.001,
            seed: 0,
            hidden: HiddenRule::SumOver2,
            init_variance: 0.2,
            learning_rate: 0.1,
            mlp_max_epochs: 30,
        }
    }

    fn validate(&self) -> Result<()> {
        if !matches!(self.classifier, ModelKind::Lda | ModelKind::Qda | ModelKind::Mlp) {
            return Err(Error::InvalidParameter(format!("wrapper cannot drive a `{}` classifier", self.classifier)));
        }
        if self.min_improvement.is_nan() || self.min_improvement < 0.0 {
            return Err(Error::InvalidParameter(format!("min_improvement {} must be >= 0", self.min_improvement)));
        }
        if self.max_features == 0 {
            return Err(Error::InvalidParameter("max_features must be at least 1".into()));
        }
        Ok(())
    }

    fn fit_spec(&self) -> FitSpec {
        let mut spec = FitSpec::new(self.classifier, self.seed);
        spec.hidden = self.hidden;
        spec.init_variance = self.init_variance;
        spec.train = TrainConfig { learning_rate: self.learning_rate, max_epochs: self.mlp_max_epochs, ..TrainConfig::default() };
        spec
    }
}

/// Split by record: a seeded shuffle of the record ids puts
/// `round(fraction * n)` records (at least one, leaving at least one) into
/// validation. Returns (train, validation).
pub fn validation_split(m: &FeatureMatrix, fraction: f64, seed: u64) -> Result<(FeatureMatrix, FeatureMatrix)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!("validation fraction {fraction} outside [0, 1)")));
    }
    let mut ids = m.record_ids();
    if ids.len() < 2 {
        return Err(Error::InvalidInput("record-level split needs at least two records".into()));
    }
    ids.sort();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = ((fraction * ids.len() as f64).round() as usize).clamp(1, ids.len() - 1);
    let held: std::collections::HashSet<&String> = ids[..k].iter().collect();
    let (mut tr, mut va) = (Vec::new(), Vec::new());
    for (i, meta) in m.meta().iter().enumerate() {
        if held.contains(&meta.record_id) {
            va.push(i);
        } else {
            tr.push(i);
        }
    }
    Ok((m.select_rows(&tr), m.select_rows(&va)))
}

/// Standardized train and validation data for all columns, computed once
/// per selection run. Column-wise z-scoring commutes with column selection.
pub struct Prepared {
    columns: Vec<String>,
    x_train: DMatrix<f64>,
    y_train: Vec<usize>,
    x_valid: DMatrix<f64>,
    truth_valid: Vec<AamiClass>,
}

impl Prepared {
    pub fn new(train: &FeatureMatrix, valid: &FeatureMatrix, scheme: LabelScheme) -> Result<Self> {
        if train.columns() != valid.columns() {
            return Err(Error::InvalidInput("train and validation have different columns".into()));
        }
        if valid.n_rows() == 0 {
            return Err(Error::InvalidInput("empty validation set".into()));
        }
        let (rows, y_train) = labelled_rows(train, scheme)?;
        let raw = train.select_rows(&rows).to_dmatrix_all();
        let s = Standardizer::fit(&raw);
        Ok(Self {
            columns: train.columns().to_vec(),
            x_train: s.transform(&raw)?,
            y_train,
            x_valid: s.transform(&valid.to_dmatrix_all())?,
            truth_valid: valid.labels(),
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetScore {
    pub score: f64,
    pub sveb: BinaryMetrics,
    pub veb: BinaryMetrics,
}

fn select_cols(x: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), cols.len(), |i, j| x[(i, cols[j])])
}

/// Train a fresh classifier on the `subset` columns and score it on the
/// validation rows.
pub fn evaluate_subset(subset: &[usize], data: &Prepared, cfg: &WrapperConfig) -> Result<SubsetScore> {
    cfg.validate()?;
    if subset.is_empty() {
        return Err(Error::InvalidInput("empty feature subset".into()));
    }
    if let Some(&bad) = subset.iter().find(|&&c| c >= data.columns.len()) {
        return Err(Error::InvalidInput(format!("feature column {bad} out of range")));
    }
    let xt = select_cols(&data.x_train, subset);
    let xv = select_cols(&data.x_valid, subset);
    let train = Dataset { x: &xt, y: &data.y_train };
    let empty = DMatrix::zeros(0, subset.len());
    let none = Dataset { x: &empty, y: &[] };
    let fitted = fit_model(&cfg.fit_spec(), cfg.scheme.n_classes(), &train, &none)?;
    let pred = fitted.model.predict_rows(&xv)?;
    let e = evaluate_predictions(&data.truth_valid, &pred, cfg.scheme)?;
    Ok(SubsetScore { score: cfg.objective.score(&e), sveb: e.sveb, veb: e.veb })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub feature: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub feature: String,
    pub score: f64,
    pub sveb: BinaryMetrics,
    pub veb: BinaryMetrics,
    /// Every candidate tried in this round, in column order.
    pub candidates: Vec<CandidateScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StopReason {
    /// The best candidate of the last round gained less than `min_improvement`.
    NoImprovement { candidates: Vec<CandidateScore> },
    MaxFeatures,
    Exhausted,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::NoImprovement { .. } => "no improvement",
            StopReason::MaxFeatures => "feature limit reached",
            StopReason::Exhausted => "all features selected",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub config: WrapperConfig,
    pub steps: Vec<SelectionStep>,
    pub final_subset: Vec<String>,
    pub stop: StopReason,
}

impl SelectionTrace {
    pub fn final_score(&self) -> Option<f64> {
        self.steps.last().map(|s| s.score)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn forward_select(data: &Prepared, cfg: &WrapperConfig) -> Result<SelectionTrace> {
    let all: Vec<usize> = (0..data.columns.len()).collect();
    forward_select_from(data, cfg, &all)
}

/// Forward selection over the given candidate columns. The order of
/// `candidates` does not matter: ties go to the lowest column index.
pub fn forward_select_from(data: &Prepared, cfg: &WrapperConfig, candidates: &[usize]) -> Result<SelectionTrace> {
    cfg.validate()?;
    let mut remaining: Vec<usize> = candidates.to_vec();
    remaining.sort_unstable();
    remaining.dedup();
    let mut chosen: Vec<usize> = Vec::new();
    let mut steps: Vec<SelectionStep> = Vec::new();
    let stop = loop {
        if chosen.len() >= cfg.max_features {
            break StopReason::MaxFeatures;
        }
        if remaining.is_empty() {
            break StopReason::Exhausted;
        }
        let scored: Vec<(usize, SubsetScore)> = remaining
            .par_iter()
            .map(|&c| {
                let mut subset = chosen.clone();
                subset.push(c);
                evaluate_subset(&subset, data, cfg).map(|s| (c, s))
            })
            .collect::<Result<_>>()?;
        let round: Vec<CandidateScore> =
            scored.iter().map(|(c, s)| CandidateScore { feature: data.columns[*c].clone(), score: s.score }).collect();
        // `scored` is in ascending column order, so the first maximum wins ties
        let best = scored.iter().enumerate().fold(0, |b, (k, (_, s))| if s.score > scored[b].1.score { k } else { b });
        let (col, best_score) = (scored[best].0, &scored[best].1);
        if let Some(prev) = steps.last() {
            if best_score.score - prev.score < cfg.min_improvement {
                break StopReason::NoImprovement { candidates: round };
            }
        }
        log::debug!("selected {} (score {:.4})", data.columns[col], best_score.score);
        steps.push(SelectionStep {
            feature: data.columns[col].clone(),
            score: best_score.score,
            sveb: best_score.sveb,
            veb: best_score.veb,
            candidates: round,
        });
        chosen.push(col);
        remaining.retain(|&c| c != col);
    };
    Ok(SelectionTrace {
        config: cfg.clone(),
        final_subset: steps.iter().map(|s| s.feature.clone()).collect(),
        steps,
        stop,
    })
}
