//! Linear and quadratic Gaussian discriminants.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::error::{Error, Result};

/// Ridge added to covariance diagonals, relative to the mean variance.
pub const RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiscriminantKind {
    Lda,
    Qda,
}

/// One class's Gaussian. Covariances are stored row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassGaussian {
    pub class: usize,
    pub mean: Vec<f64>,
    pub covariance: Vec<f64>,
    pub prior: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GaussianParams", into = "GaussianParams")]
pub struct GaussianDiscriminant {
    kind: DiscriminantKind,
    dim: usize,
    n_classes: usize,
    class_weights: Option<Vec<f64>>,
    classes: Vec<ClassGaussian>,
    factors: Vec<Factor>,
}

#[derive(Debug, Clone)]
struct Factor {
    chol: Cholesky<f64, Dyn>,
    half_log_det: f64,
}

#[derive(Serialize, Deserialize)]
struct GaussianParams {
    kind: DiscriminantKind,
    dim: usize,
    n_classes: usize,
    class_weights: Option<Vec<f64>>,
    classes: Vec<ClassGaussian>,
}

impl TryFrom<GaussianParams> for GaussianDiscriminant {
    type Error = Error;

    fn try_from(p: GaussianParams) -> Result<Self> {
        Self::from_parts(p.kind, p.dim, p.n_classes, p.class_weights, p.classes)
    }
}

impl From<GaussianDiscriminant> for GaussianParams {
    fn from(m: GaussianDiscriminant) -> Self {
        GaussianParams {
            kind: m.kind,
            dim: m.dim,
            n_classes: m.n_classes,
            class_weights: m.class_weights,
            classes: m.classes,
        }
    }
}

fn regularize(mut cov: DMatrix<f64>) -> DMatrix<f64> {
    let p = cov.nrows();
    let lambda = RIDGE * cov.trace() / p as f64;
    for i in 0..p {
        cov[(i, i)] += lambda;
    }
    cov
}

fn factor(cov: &DMatrix<f64>, class: usize) -> Result<Factor> {
    let chol = Cholesky::new(cov.clone())
        .ok_or_else(|| Error::Numeric(format!("covariance of class {class} is singular after regularization")))?;
    let half_log_det = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    Ok(Factor { chol, half_log_det })
}

impl GaussianDiscriminant {
    /// Fit on rows of `x` with class indices `y` in `0..n_classes`.
    ///
    /// Classes with no rows are absent from the model and always get posterior 0.
    pub fn fit(
        kind: DiscriminantKind,
        x: &DMatrix<f64>,
        y: &[usize],
        n_classes: usize,
        class_weights: Option<&[f64]>,
    ) -> Result<Self> {
        let (n, p) = x.shape();
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: y.len() });
        }
        if p == 0 {
            return Err(Error::InvalidInput("no features".into()));
        }
        if let Some(w) = class_weights {
            if w.len() != n_classes {
                return Err(Error::DimensionMismatch { expected: n_classes, got: w.len() });
            }
            if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidParameter("class weights must be positive".into()));
            }
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return Err(Error::InvalidInput(format!("class index {bad} out of range for {n_classes} classes")));
        }
        let mut counts = vec![0usize; n_classes];
        y.iter().for_each(|&c| counts[c] += 1);
        if let Some(c) = counts.iter().position(|&k| k == 1) {
            return Err(Error::InvalidInput(format!("class {c} has a single training sample")));
        }
        let present: Vec<usize> = (0..n_classes).filter(|&c| counts[c] > 0).collect();
        if present.len() < 2 {
            return Err(Error::InvalidInput("training data holds fewer than two classes".into()));
        }

        let mut means = vec![DVector::zeros(p); n_classes];
        for (row, &c) in x.row_iter().zip(y) {
            means[c] += row.transpose();
        }
        for &c in &present {
            means[c] /= counts[c] as f64;
        }
        let mut scatter = vec![DMatrix::zeros(p, p); n_classes];
        for (row, &c) in x.row_iter().zip(y) {
            let d = row.transpose() - &means[c];
            scatter[c].ger(1.0, &d, &d, 1.0);
        }
        let mut pooled = DMatrix::zeros(p, p);
        for &c in &present {
            pooled += &scatter[c];
        }
        pooled /= (n - present.len()) as f64;

        let weight_sum: f64 = present.iter().map(|&c| class_weights.map_or(counts[c] as f64, |w| w[c])).sum();
        let mut classes = Vec::with_capacity(present.len());
        for &c in &present {
            let cov = match kind {
                DiscriminantKind::Lda => pooled.clone(),
                DiscriminantKind::Qda => {
                    let own = &scatter[c] / (counts[c] - 1) as f64;
                    if counts[c] > p {
                        own
                    } else {
                        // Too few rows for a full-rank estimate: shrink toward the pooled one.
                        let w = counts[c] as f64 / (counts[c] + p) as f64;
                        own * w + &pooled * (1.0 - w)
                    }
                }
            };
            classes.push(ClassGaussian {
                class: c,
                mean: means[c].iter().copied().collect(),
                covariance: regularize(cov).transpose().iter().copied().collect(),
                prior: class_weights.map_or(counts[c] as f64, |w| w[c]) / weight_sum,
            });
        }
        Self::from_parts(kind, p, n_classes, class_weights.map(<[f64]>::to_vec), classes)
    }

    fn from_parts(
        kind: DiscriminantKind,
        dim: usize,
        n_classes: usize,
        class_weights: Option<Vec<f64>>,
        classes: Vec<ClassGaussian>,
    ) -> Result<Self> {
        let mut factors = Vec::with_capacity(classes.len());
        for g in &classes {
            if g.mean.len() != dim || g.covariance.len() != dim * dim || g.class >= n_classes {
                return Err(Error::format("discriminant model", "class parameters do not match the model dimension"));
            }
            let cov = DMatrix::from_row_slice(dim, dim, &g.covariance);
            factors.push(factor(&cov, g.class)?);
        }
        Ok(Self { kind, dim, n_classes, class_weights, classes, factors })
    }

    pub fn kind(&self) -> DiscriminantKind {
        self.kind
    }

    pub fn classes(&self) -> &[ClassGaussian] {
        &self.classes
    }

    /// Posterior class probabilities, with absent classes at 0.
    pub fn posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let xv = DVector::from_column_slice(x);
        let logs: Vec<f64> = self
            .classes
            .iter()
            .zip(&self.factors)
            .map(|(g, f)| {
                let d = &xv - DVector::from_column_slice(&g.mean);
                let z = f.chol.l_dirty().solve_lower_triangular(&d).expect("Cholesky factor is nonsingular");
                g.prior.ln() - f.half_log_det - 0.5 * z.norm_squared()
            })
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = exps.iter().sum();
        let mut out = vec![0.0; self.n_classes];
        for (g, e) in self.classes.iter().zip(exps) {
            out[g.class] = e / total;
        }
        Ok(out)
    }
}

impl Classifier for GaussianDiscriminant {
    fn dim(&self) -> usize {
        self.dim
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.posterior(x)
    }
}

pub fn lda_fit(x: &DMatrix<f64>, y: &[usize], n_classes: usize, class_weights: Option<&[f64]>) -> Result<GaussianDiscriminant> {
    GaussianDiscriminant::fit(DiscriminantKind::Lda, x, y, n_classes, class_weights)
}

pub fn qda_fit(x: &DMatrix<f64>, y: &[usize], n_classes: usize) -> Result<GaussianDiscriminant> {
    GaussianDiscriminant::fit(DiscriminantKind::Qda, x, y, n_classes, None)
}
