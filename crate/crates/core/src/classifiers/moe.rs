use serde::{Deserialize, Serialize};

use super::gaussian::{DiscriminantKind, GaussianDiscriminant};
use super::Classifier;
use crate::error::{Error, Result};

/// LDA and QDA on the same features, combined by averaging posteriors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureOfExperts {
    lda: GaussianDiscriminant,
    qda: GaussianDiscriminant,
}

impl MixtureOfExperts {
    pub fn new(lda: GaussianDiscriminant, qda: GaussianDiscriminant) -> Result<Self> {
        if lda.kind() != DiscriminantKind::Lda || qda.kind() != DiscriminantKind::Qda {
            return Err(Error::InvalidParameter("mixture needs one LDA and one QDA expert".into()));
        }
        if lda.dim() != qda.dim() {
            return Err(Error::DimensionMismatch { expected: lda.dim(), got: qda.dim() });
        }
        if lda.n_classes() != qda.n_classes() {
            return Err(Error::DimensionMismatch { expected: lda.n_classes(), got: qda.n_classes() });
        }
        Ok(Self { lda, qda })
    }

    pub fn experts(&self) -> (&GaussianDiscriminant, &GaussianDiscriminant) {
        (&self.lda, &self.qda)
    }
}

/// Elementwise mean of two posterior vectors.
pub fn combine(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect())
}

impl Classifier for MixtureOfExperts {
    fn dim(&self) -> usize {
        self.lda.dim()
    }

    fn n_classes(&self) -> usize {
        self.lda.n_classes()
    }

    fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        combine(&self.lda.posterior(x)?, &self.qda.posterior(x)?)
    }
}
