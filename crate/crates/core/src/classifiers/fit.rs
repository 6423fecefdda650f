use serde::{Deserialize, Serialize};

use super::ensemble::{ensemble_train, EnsembleConfig, ENSEMBLE_SIZE};
use super::gaussian::{lda_fit, DiscriminantKind, GaussianDiscriminant};
use super::mlp::{mlp_train, Dataset, HiddenRule, Mlp, TrainConfig, TrainOutcome, INIT_VARIANCE_RANGE};
use super::moe::MixtureOfExperts;
use super::{LabelScheme, Model, ModelKind};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Everything needed to train one model of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub kind: ModelKind,
    pub hidden: HiddenRule,
    pub init_variance: f64,
    pub train: TrainConfig,
    /// One seed for a single MLP, one per member for an ensemble.
    pub seeds: Vec<u64>,
    pub class_weights: Option<Vec<f64>>,
}

impl FitSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        let n = if kind == ModelKind::Ensemble { ENSEMBLE_SIZE } else { 1 };
        Self {
            kind,
            hidden: HiddenRule::SumOver2,
            init_variance: 0.2,
            train: TrainConfig::default(),
            seeds: (0..n as u64).map(|k| seed.wrapping_add(k)).collect(),
            class_weights: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(self.kind, ModelKind::Mlp | ModelKind::Ensemble) {
            let (lo, hi) = INIT_VARIANCE_RANGE;
            if !(lo..=hi).contains(&self.init_variance) {
                return Err(Error::InvalidParameter(format!(
                    "init_variance {} outside [{lo}, {hi}]",
                    self.init_variance
                )));
            }
            if self.seeds.is_empty() {
                return Err(Error::InvalidParameter("no seeds given".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Fitted {
    pub model: Model,
    /// Loss curves of every trained MLP, in seed order. Empty for LDA/QDA.
    pub outcomes: Vec<TrainOutcome>,
}

/// Train a model. `valid` drives early stopping for the MLP kinds and is
/// ignored otherwise.
pub fn fit_model(spec: &FitSpec, n_classes: usize, train: &Dataset<'_>, valid: &Dataset<'_>) -> Result<Fitted> {
    spec.validate()?;
    let weights = spec.class_weights.as_deref();
    Ok(match spec.kind {
        ModelKind::Lda => Fitted { model: Model::Lda(lda_fit(train.x, train.y, n_classes, weights)?), outcomes: vec![] },
        ModelKind::Qda => Fitted { model: Model::Qda(qda_fit_weighted(train, n_classes, weights)?), outcomes: vec![] },
        ModelKind::Moe => {
            let lda = lda_fit(train.x, train.y, n_classes, weights)?;
            let qda = qda_fit_weighted(train, n_classes, weights)?;
            Fitted { model: Model::Moe(MixtureOfExperts::new(lda, qda)?), outcomes: vec![] }
        }
        ModelKind::Mlp => {
            let init = Mlp::new(train.x.ncols(), n_classes, spec.hidden, spec.seeds[0], spec.init_variance)?;
            let out = mlp_train(&init, train, valid, &spec.train)?;
            Fitted { model: Model::Mlp(out.model.clone()), outcomes: vec![out] }
        }
        ModelKind::Ensemble => {
            let cfg = EnsembleConfig {
                hidden: spec.hidden,
                init_variance: spec.init_variance,
                train: spec.train,
                seeds: spec.seeds.clone(),
            };
            let (e, outcomes) = ensemble_train(&cfg, n_classes, train, valid)?;
            Fitted { model: Model::Ensemble(e), outcomes }
        }
    })
}

fn qda_fit_weighted(train: &Dataset<'_>, n_classes: usize, weights: Option<&[f64]>) -> Result<GaussianDiscriminant> {
    GaussianDiscriminant::fit(DiscriminantKind::Qda, train.x, train.y, n_classes, weights)
}

/// Rows of `m` usable for training under `scheme`, with their class indices.
/// Beats the scheme has no slot for are skipped, and so are classes with a
/// single beat, which no Gaussian model can fit.
pub fn labelled_rows(m: &FeatureMatrix, scheme: LabelScheme) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rows = Vec::with_capacity(m.n_rows());
    let mut y = Vec::with_capacity(m.n_rows());
    for (i, meta) in m.meta().iter().enumerate() {
        if let Some(c) = scheme.class_of(meta.label, meta.sveb_subclass)? {
            rows.push(i);
            y.push(c);
        }
    }
    let mut counts = vec![0usize; scheme.n_classes()];
    y.iter().for_each(|&c| counts[c] += 1);
    let keep: Vec<bool> = counts.iter().map(|&c| c != 1).collect();
    for (c, _) in counts.iter().enumerate().filter(|(_, &n)| n == 1) {
        log::warn!("dropping class {} with a single training beat", scheme.class_names()[c]);
    }
    let (rows, y): (Vec<usize>, Vec<usize>) = rows.into_iter().zip(y).filter(|&(_, c)| keep[c]).unzip();
    let present = counts.iter().zip(&keep).filter(|&(&n, &k)| n > 0 && k).count();
    if present < 2 {
        return Err(Error::InvalidInput(format!("training data has {present} usable class(es), need 2")));
    }
    Ok((rows, y))
}
