use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts indexed `[predicted][true]` over a fixed class order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(class_order: &[&str]) -> Self {
        let k = class_order.len();
        Self { classes: class_order.iter().map(|s| s.to_string()).collect(), counts: vec![0; k * k] }
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.classes.iter().position(|c| c == name).ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn get(&self, predicted: usize, truth: usize) -> u64 {
        self.counts[predicted * self.k() + truth]
    }

    pub fn add(&mut self, predicted: usize, truth: usize) {
        let k = self.k();
        self.counts[predicted * k + truth] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Elementwise sum; both matrices must share the class order.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if self.classes != other.classes {
            return Err(Error::InvalidInput("confusion matrices have different class orders".into()));
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        Ok(())
    }
}

pub fn confusion<S: AsRef<str>, T: AsRef<str>>(
    true_labels: &[S],
    predicted_labels: &[T],
    class_order: &[&str],
) -> Result<ConfusionMatrix> {
    if true_labels.len() != predicted_labels.len() {
        return Err(Error::DimensionMismatch { expected: true_labels.len(), got: predicted_labels.len() });
    }
    let mut cm = ConfusionMatrix::zeros(class_order);
    for (t, p) in true_labels.iter().zip(predicted_labels) {
        let (ti, pi) = (cm.index_of(t.as_ref())?, cm.index_of(p.as_ref())?);
        cm.add(pi, ti);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl BinaryCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }
}

/// One-vs-rest counts for `target`.
pub fn binary_consolidate(cm: &ConfusionMatrix, target: &str) -> Result<BinaryCounts> {
    let c = cm.index_of(target)?;
    let tp = cm.get(c, c);
    let fn_: u64 = (0..cm.k()).filter(|&p| p != c).map(|p| cm.get(p, c)).sum();
    let fp: u64 = (0..cm.k()).filter(|&t| t != c).map(|t| cm.get(c, t)).sum();
    Ok(BinaryCounts { tp, fn_, fp, tn: cm.total() - tp - fn_ - fp })
}

/// Percentages. `None` marks a metric whose denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub counts: BinaryCounts,
    pub se: Option<f64>,
    pub sp: Option<f64>,
    pub ppv: Option<f64>,
    pub fpr: Option<f64>,
    pub f_measure: Option<f64>,
}

fn pct(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

/// Harmonic mean of sensitivity and PPV, both in percent.
pub fn f_measure(se: f64, ppv: f64) -> Option<f64> {
    (se + ppv > 0.0).then(|| 2.0 * se * ppv / (se + ppv))
}

pub fn compute_metrics(counts: BinaryCounts) -> BinaryMetrics {
    let BinaryCounts { tp, fn_, fp, tn } = counts;
    let se = pct(tp, tp + fn_);
    let ppv = pct(tp, tp + fp);
    let sp = pct(tn, tn + fp);
    // 100 - sp keeps sp + fpr == 100 exact in floating point
    let fpr = sp.map(|s| 100.0 - s);
    let f = match (se, ppv) {
        (Some(a), Some(b)) => f_measure(a, b),
        _ => None,
    };
    BinaryMetrics { counts, se, sp, ppv, fpr, f_measure: f }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    /// Runs where the metric was defined.
    pub n: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation over sqrt(n); needs two defined runs.
    pub stderr: Option<f64>,
}

pub fn summarize(values: &[f64]) -> MetricSummary {
    let n = values.len();
    if n == 0 {
        return MetricSummary { n, mean: None, stderr: None };
    }
    // Welford update
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, &v) in values.iter().enumerate() {
        let d = v - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (v - mean);
    }
    let stderr = (n >= 2).then(|| (m2 / (n - 1) as f64).sqrt() / (n as f64).sqrt());
    MetricSummary { n, mean: Some(mean), stderr }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub runs: usize,
    pub se: MetricSummary,
    pub sp: MetricSummary,
    pub ppv: MetricSummary,
    pub fpr: MetricSummary,
    pub f_measure: MetricSummary,
}

pub fn aggregate_runs(runs: &[BinaryMetrics]) -> Result<RunAggregate> {
    if runs.is_empty() {
        return Err(Error::InvalidInput("no runs to aggregate".into()));
    }
    let col = |f: fn(&BinaryMetrics) -> Option<f64>| summarize(&runs.iter().filter_map(f).collect::<Vec<_>>());
    Ok(RunAggregate {
        runs: runs.len(),
        se: col(|m| m.se),
        sp: col(|m| m.sp),
        ppv: col(|m| m.ppv),
        fpr: col(|m| m.fpr),
        f_measure: col(|m| m.f_measure),
    })
}
