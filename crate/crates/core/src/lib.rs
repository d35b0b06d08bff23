//! Peptide binding-site prediction at desk scale.
//!
//! The pipeline runs from fixed-column PDB text to per-residue binding
//! probabilities and a geometric evaluation report:
//!
//! * [`structio`]: PDB parsing, the structure cache format and prediction CSVs.
//! * [`geometry`]: neighbor grids, residue distances, convex hulls, Shrake-Rupley SASA.
//! * [`dataset`]: chain-pair filtering, 6 Å interface labels, splits, feature encoding.
//! * [`model`]: B-spline KAN layers, the MLP baseline and the per-residue head.
//! * [`loss`]: cross-entropy plus the distance-weighted false-positive penalty.
//! * [`train`]: Adam, the epoch loop and finite-difference gradient checks.
//! * [`metrics`]: threshold metrics, ROC/PR, TPVR, ΔRSA statistics and reports.
//! * [`synth`]: deterministic synthetic complexes and spline targets for fixtures.

pub mod dataset;
pub mod geometry;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod residues;
pub mod structio;
pub mod synth;
pub mod train;

/// Cartesian coordinate in Å.
pub type Vec3 = [f64; 3];

pub(crate) fn dist2(a: &Vec3, b: &Vec3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

pub(crate) fn dist(a: &Vec3, b: &Vec3) -> f64 {
    dist2(a, b).sqrt()
}
