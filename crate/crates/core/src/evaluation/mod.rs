//! Binary SVEB/VEB metrics, run aggregation and comparison reports.

pub mod metrics;
pub mod report;

use serde::{Deserialize, Serialize};

pub use metrics::{
    aggregate_runs, binary_consolidate, compute_metrics, confusion, f_measure, summarize, BinaryCounts,
    BinaryMetrics, ConfusionMatrix, MetricSummary, RunAggregate,
};
pub use report::{literature_rows, read_results_tsv, report_table, write_results_tsv, Cell, MethodRow, MetricTriple};

use crate::classifiers::{LabelScheme, Target};
use crate::error::{Error, Result};
use crate::wfdb::AamiClass;

/// Metrics of one set of predictions against AAMI truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Predictions mapped back to AAMI classes; rows predicted, columns true.
    pub confusion: ConfusionMatrix,
    pub sveb: BinaryMetrics,
    pub veb: BinaryMetrics,
}

impl Evaluation {
    pub fn target(&self, t: Target) -> &BinaryMetrics {
        match t {
            Target::Sveb => &self.sveb,
            Target::Veb => &self.veb,
        }
    }
}

fn aami_names() -> [&'static str; 5] {
    AamiClass::ALL.map(AamiClass::as_str)
}

/// Score class-index predictions of `scheme` against AAMI labels. Every beat
/// counts; F and Q beats are negatives for both targets.
pub fn evaluate_predictions(truth: &[AamiClass], predicted: &[usize], scheme: LabelScheme) -> Result<Evaluation> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: predicted.len() });
    }
    let mut cm = ConfusionMatrix::zeros(&aami_names());
    for (t, &p) in truth.iter().zip(predicted) {
        if p >= scheme.n_classes() {
            return Err(Error::InvalidInput(format!("predicted class {p} outside {scheme}")));
        }
        cm.add(scheme.aami_class(p).index(), t.index());
    }
    Ok(Evaluation {
        sveb: compute_metrics(binary_consolidate(&cm, "S")?),
        veb: compute_metrics(binary_consolidate(&cm, "V")?),
        confusion: cm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_class_predictions_consolidate() {
        use AamiClass::*;
        let truth = [N, S, S, V, F, Q];
        // N, S1, S2, V, S2, N
        let pred = [0, 1, 2, 3, 2, 0];
        let e = evaluate_predictions(&truth, &pred, LabelScheme::FourClass).unwrap();
        assert_eq!(e.sveb.counts, BinaryCounts { tp: 2, fn_: 0, fp: 1, tn: 3 });
        assert_eq!(e.veb.counts, BinaryCounts { tp: 1, fn_: 0, fp: 0, tn: 5 });
        assert_eq!(e.confusion.total(), 6);
        assert!(evaluate_predictions(&truth, &[0; 6].map(|_| 4), LabelScheme::FourClass).is_err());
    }
}
