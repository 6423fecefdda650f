//! Gaussian discriminants, MLPs, the MLP ensemble and the LDA/QDA mixture.

pub mod ensemble;
pub mod fit;
pub mod gaussian;
pub mod labels;
pub mod mlp;
pub mod moe;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use ensemble::{ensemble_train, Ensemble, EnsembleConfig, ENSEMBLE_SIZE};
pub use fit::{fit_model, labelled_rows, FitSpec, Fitted};
pub use gaussian::{lda_fit, qda_fit, DiscriminantKind, GaussianDiscriminant};
pub use labels::{argmax, consolidate_to_binary_labels, LabelScheme, Target};
pub use mlp::{mlp_train, Dataset, HiddenRule, Mlp, TrainConfig, TrainOutcome};
pub use moe::MixtureOfExperts;

use crate::error::{Error, Result};
use crate::features::Standardizer;

pub trait Classifier {
    fn dim(&self) -> usize;
    fn n_classes(&self) -> usize;
    /// Per-class scores whose argmax is the prediction.
    fn scores(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Scores rescaled to sum to one.
    fn posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        let s = self.scores(x)?;
        let total: f64 = s.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Numeric(format!("class scores sum to {total}")));
        }
        Ok(s.into_iter().map(|v| v / total).collect())
    }

    fn predict(&self, x: &[f64]) -> Result<usize> {
        let s = self.scores(x)?;
        if let Some(v) = s.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite class score {v}")));
        }
        Ok(argmax(&s))
    }

    /// Predictions for every row.
    fn predict_rows(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        let mut row = vec![0.0; x.ncols()];
        (0..x.nrows())
            .map(|i| {
                row.iter_mut().enumerate().for_each(|(j, v)| *v = x[(i, j)]);
                self.predict(&row)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Lda,
    Qda,
    Mlp,
    Ensemble,
    Moe,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Lda => "lda",
            ModelKind::Qda => "qda",
            ModelKind::Mlp => "mlp",
            ModelKind::Ensemble => "ensemble",
            ModelKind::Moe => "moe",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lda" => Ok(ModelKind::Lda),
            "qda" => Ok(ModelKind::Qda),
            "mlp" => Ok(ModelKind::Mlp),
            "ensemble" => Ok(ModelKind::Ensemble),
            "moe" => Ok(ModelKind::Moe),
            other => Err(Error::InvalidParameter(format!("unknown model kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum Model {
    Lda(GaussianDiscriminant),
    Qda(GaussianDiscriminant),
    Mlp(Mlp),
    Ensemble(Ensemble),
    Moe(MixtureOfExperts),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Lda(_) => ModelKind::Lda,
            Model::Qda(_) => ModelKind::Qda,
            Model::Mlp(_) => ModelKind::Mlp,
            Model::Ensemble(_) => ModelKind::Ensemble,
            Model::Moe(_) => ModelKind::Moe,
        }
    }

    fn inner(&self) -> &dyn Classifier {
        match self {
            Model::Lda(m) | Model::Qda(m) => m,
            Model::Mlp(m) => m,
            Model::Ensemble(m) => m,
            Model::Moe(m) => m,
        }
    }
}

impl Classifier for Model {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn n_classes(&self) -> usize {
        self.inner().n_classes()
    }

    fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inner().scores(x)
    }
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A model with everything needed to apply it to a feature matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub scheme: LabelScheme,
    pub features: Vec<String>,
    pub standardizer: Option<Standardizer>,
    pub model: Model,
}

impl TrainedModel {
    pub fn new(scheme: LabelScheme, features: Vec<String>, standardizer: Option<Standardizer>, model: Model) -> Self {
        Self { format_version: MODEL_FORMAT_VERSION, scheme, features, standardizer, model }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: TrainedModel = serde_json::from_str(&text)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::format(
                path.display().to_string(),
                format!("model format version {} (expected {MODEL_FORMAT_VERSION})", m.format_version),
            ));
        }
        Ok(m)
    }

    /// Predict from raw (unstandardized) feature columns.
    pub fn predict_rows(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        match &self.standardizer {
            Some(s) => self.model.predict_rows(&s.transform(x)?),
            None => self.model.predict_rows(x),
        }
    }
}
