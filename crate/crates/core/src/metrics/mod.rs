//! Evaluation: threshold metrics, ROC/PR curves, TPVR, distance loss,
//! ΔRSA statistics and recall against interface ratio.

mod confusion;
mod curves;
mod recall;
mod report;
mod rsa;
mod spatial;
mod stats;

pub use confusion::{confusion_at_threshold, ConfusionCounts, ThresholdMetrics, DEFAULT_THRESHOLD};
pub use curves::{pr_curve, roc_auc, roc_curve, CurvePoints};
pub use recall::{interface_ratio_recall, recall_vs_interface_ratio, RecallBin, RATIO_BIN_WIDTH};
pub use report::{evaluate_method, ComplexRecord, DeltaRsaStats, EvalInstance, EvalOptions, MethodReport};
pub use rsa::{delta_rsa, delta_rsa_default, relative_sasa, DeltaRsaEntry};
pub use spatial::{distance_loss_eval, tpvr, DistanceEvalMode};
pub use stats::{bootstrap_ci, wilcoxon_signed_rank, Alternative, Statistic, WilcoxonResult, EXACT_MAX_N};

use thiserror::Error;

use crate::dataset::DatasetError;
use crate::geometry::GeometryError;
use crate::loss::LossError;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no real residues to evaluate")]
    EmptyInstance,
    #[error("curve undefined: only one class present")]
    SingleClass,
    #[error("true-positive set is not a subset of the predicted set")]
    NotSubset,
    #[error("no values")]
    EmptyValues,
    #[error("non-finite value")]
    NonFinite,
    #[error("{what}: expected length {expected}, got {found}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

impl PartialEq for MetricsError {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

pub(crate) fn check_aligned(p: &[f64], y: &[u8], mask: &[u8]) -> Result<(), MetricsError> {
    if y.len() != p.len() {
        return Err(MetricsError::Shape {
            what: "labels",
            expected: p.len(),
            found: y.len(),
        });
    }
    if mask.len() != p.len() {
        return Err(MetricsError::Shape {
            what: "mask",
            expected: p.len(),
            found: mask.len(),
        });
    }
    Ok(())
}
