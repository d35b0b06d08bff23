use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::geometry::convex_hull_volume;
use crate::loss::{distance_field, struct_loss, LossError};
use crate::Vec3;

/// `V(tp) / V(pred)` over convex hulls of residue centers.
///
/// `None` when the predicted set spans no volume, except that identical
/// degenerate sets give 1. Every true-positive point must also be predicted.
pub fn tpvr(pred: &[Vec3], tp: &[Vec3]) -> Result<Option<f64>, MetricsError> {
    if tp.iter().any(|t| !pred.contains(t)) {
        return Err(MetricsError::NotSubset);
    }
    let vp = convex_hull_volume(pred);
    if vp.degenerate {
        let same = tp.len() == pred.len() && pred.iter().all(|p| tp.contains(p));
        return Ok(if same && !pred.is_empty() { Some(1.0) } else { None });
    }
    let vt = convex_hull_volume(tp);
    Ok(Some((vt.volume / vp.volume).clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum DistanceEvalMode {
    /// Raw probabilities weigh each negative.
    Raw,
    /// Predictions are binarized at the threshold first.
    Thresholded { threshold: f64 },
}

/// Structural loss of a prediction against the true interface. `None` when
/// the instance has no binding residues.
pub fn distance_loss_eval(
    p: &[f64],
    y: &[u8],
    atoms: &[Vec<Vec3>],
    mask: &[u8],
    mode: DistanceEvalMode,
) -> Result<Option<f64>, MetricsError> {
    let field = match distance_field(atoms, y) {
        Ok(f) => f,
        Err(LossError::NoBindingResidues) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let q: Vec<f64> = match mode {
        DistanceEvalMode::Raw => p.to_vec(),
        DistanceEvalMode::Thresholded { threshold } => p.iter().map(|&v| if v >= threshold { 1.0 } else { 0.0 }).collect(),
    };
    Ok(Some(struct_loss(&q, y, &field, mask)?))
}
