//! Shared generators and oracles for the integration tests.
#![allow(dead_code)]

use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ecg_arrhythmia::features::{BeatMeta, FeatureMatrix, N_FEATURES};
use ecg_arrhythmia::synth::write_synthetic_database;
use ecg_arrhythmia::wfdb::AamiClass;

/// A 2-D Gaussian given by its mean and covariance entries `[sxx, sxy, syy]`.
#[derive(Debug, Clone, Copy)]
pub struct Gauss2 {
    pub mean: [f64; 2],
    pub cov: [f64; 3],
}

impl Gauss2 {
    pub fn sample(&self, rng: &mut impl Rng) -> [f64; 2] {
        // Closed-form 2x2 Cholesky.
        let [a, b, c] = self.cov;
        let l11 = a.sqrt();
        let l21 = b / l11;
        let l22 = (c - l21 * l21).sqrt();
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        [self.mean[0] + l11 * z0, self.mean[1] + l21 * z0 + l22 * z1]
    }

    pub fn log_density(&self, x: [f64; 2]) -> f64 {
        let [a, b, c] = self.cov;
        let det = a * c - b * b;
        let dx = x[0] - self.mean[0];
        let dy = x[1] - self.mean[1];
        let q = (c * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det;
        -0.5 * q - 0.5 * det.ln() - (2.0 * std::f64::consts::PI).ln()
    }
}

/// `n` draws with equal priors, alternating classes.
pub fn gaussian_sample(classes: &[Gauss2; 2], n: usize, seed: u64) -> (DMatrix<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::zeros(n, 2);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let k = i % 2;
        let p = classes[k].sample(&mut rng);
        x[(i, 0)] = p[0];
        x[(i, 1)] = p[1];
        y.push(k);
    }
    (x, y)
}

/// Error rate of the true-density decision rule on a sample.
pub fn bayes_error(classes: &[Gauss2; 2], x: &DMatrix<f64>, y: &[usize]) -> f64 {
    let wrong = (0..x.nrows())
        .filter(|&i| {
            let p = [x[(i, 0)], x[(i, 1)]];
            let k = usize::from(classes[1].log_density(p) > classes[0].log_density(p));
            k != y[i]
        })
        .count();
    wrong as f64 / x.nrows() as f64
}

pub fn error_rate(pred: &[usize], y: &[usize]) -> f64 {
    pred.iter().zip(y).filter(|(p, t)| p != t).count() as f64 / y.len() as f64
}

/// The four XOR corners at +-1, each repeated `copies` times.
pub fn xor(copies: usize) -> (DMatrix<f64>, Vec<usize>) {
    let corners = [(-1.0, -1.0, 0), (-1.0, 1.0, 1), (1.0, -1.0, 1), (1.0, 1.0, 0)];
    let n = 4 * copies;
    let mut x = DMatrix::zeros(n, 2);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b, k) = corners[i % 4];
        x[(i, 0)] = a;
        x[(i, 1)] = b;
        y.push(k);
    }
    (x, y)
}

/// `n` points from `k` isotropic Gaussian blobs in `dim` dimensions whose
/// centres are drawn once from `centre_seed`.
pub fn blobs(k: usize, dim: usize, n: usize, spread: f64, centre_seed: u64, seed: u64) -> (DMatrix<f64>, Vec<usize>) {
    let mut crng = ChaCha8Rng::seed_from_u64(centre_seed);
    let centres: Vec<Vec<f64>> = (0..k).map(|_| (0..dim).map(|_| crng.random_range(-1.5..1.5)).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::zeros(n, dim);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % k;
        for j in 0..dim {
            let z: f64 = rng.sample(StandardNormal);
            x[(i, j)] = centres[c][j] + spread * z;
        }
        y.push(c);
    }
    (x, y)
}

/// A 31-column matrix of standard normal noise in which only the columns in
/// `informative` drive the labels: V when the first exceeds 1, otherwise S
/// when the sum of the other two exceeds 1.2, otherwise N.
pub fn informative_matrix(n_records: usize, per_record: usize, informative: [usize; 3], seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = FeatureMatrix::new();
    let mut row = vec![0.0; N_FEATURES];
    for r in 0..n_records {
        for b in 0..per_record {
            row.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            let [a, s1, s2] = informative.map(|j| row[j]);
            let label = if a > 1.0 {
                AamiClass::V
            } else if s1 + s2 > 1.2 {
                AamiClass::S
            } else {
                AamiClass::N
            };
            let meta = BeatMeta { record_id: format!("r{r:02}"), beat_index: b, label, sveb_subclass: None };
            m.push(meta, &row).unwrap();
        }
    }
    m
}

/// Three distinct columns drawn uniformly.
pub fn pick_three(rng: &mut impl Rng) -> [usize; 3] {
    let mut out = [0usize; 3];
    let mut k = 0;
    while k < 3 {
        let c = rng.random_range(0..N_FEATURES);
        if !out[..k].contains(&c) {
            out[k] = c;
            k += 1;
        }
    }
    out
}

/// Records used by quick mode: the first three of each split.
pub const QUICK_IDS: [&str; 6] = ["101", "106", "108", "100", "103", "105"];

pub fn synthetic_db(dir: &Path, ids: &[&str], seconds: f64) {
    std::fs::create_dir_all(dir).unwrap();
    write_synthetic_database(dir, ids, 11, seconds).unwrap();
}

/// Natural cubic spline through (xs, ys), evaluated at `at`.
pub fn natural_spline(xs: &[f64], ys: &[f64], at: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    // Tridiagonal system for second derivatives, M[0] = M[n-1] = 0.
    let mut m = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 1..n - 1 {
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
    }
    for i in 2..n - 1 {
        let w = h[i - 1] / diag[i - 1];
        diag[i] -= w * h[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for i in (1..n - 1).rev() {
        let upper = if i + 1 < n - 1 { h[i] * m[i + 1] } else { 0.0 };
        m[i] = (rhs[i] - upper) / diag[i];
    }
    at.iter()
        .map(|&t| {
            let k = xs.partition_point(|&x| x <= t).clamp(1, n - 1) - 1;
            let (a, b) = (xs[k + 1] - t, t - xs[k]);
            m[k] * a.powi(3) / (6.0 * h[k])
                + m[k + 1] * b.powi(3) / (6.0 * h[k])
                + (ys[k] / h[k] - m[k] * h[k] / 6.0) * a
                + (ys[k + 1] / h[k] - m[k + 1] * h[k] / 6.0) * b
        })
        .collect()
}
