//! Spatial primitives shared by labeling, the structural loss and evaluation.

mod grid;
mod hull;
mod sasa;

pub use grid::{neighbor_pairs, SpatialGrid};
pub use hull::{convex_hull, convex_hull_volume, Hull, HullResult};
pub use sasa::{golden_spiral, shrake_rupley_sasa, sphere_sasa, SasaResult, DEFAULT_PROBE, DEFAULT_SPHERE_POINTS};

use crate::structio::Residue;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("residue {0} has no heavy atoms")]
    EmptyResidue(String),
    #[error("unknown element '{element}' for atom {atom}")]
    UnknownElement { element: String, atom: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Minimum heavy-atom distance between two residues.
pub fn min_atom_distance(a: &Residue, b: &Residue) -> Result<f64, GeometryError> {
    let ca = a.heavy_coords();
    let cb = b.heavy_coords();
    if ca.is_empty() {
        return Err(GeometryError::EmptyResidue(format!("{}{}", a.name, a.seq_id)));
    }
    if cb.is_empty() {
        return Err(GeometryError::EmptyResidue(format!("{}{}", b.name, b.seq_id)));
    }
    Ok(min_set_distance(&ca, &cb))
}

/// Minimum distance between two nonempty point sets.
pub fn min_set_distance(a: &[crate::Vec3], b: &[crate::Vec3]) -> f64 {
    let mut best = f64::INFINITY;
    for p in a {
        for q in b {
            best = best.min(crate::dist2(p, q));
        }
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structio::Atom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residue(coords: &[[f64; 3]]) -> Residue {
        let atoms = coords
            .iter()
            .enumerate()
            .map(|(i, c)| Atom {
                serial: i as i64,
                name: format!("C{i}"),
                element: "C".into(),
                coord: *c,
                occupancy: 1.0,
                altloc: ' ',
                is_hetero: false,
            })
            .collect();
        Residue::new(1, ' ', "ALA", atoms)
    }

    #[test]
    fn three_four_five() {
        let d = min_atom_distance(&residue(&[[0.0; 3]]), &residue(&[[3.0, 4.0, 0.0]])).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn identical_residues() {
        let r = residue(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        assert_eq!(min_atom_distance(&r, &r).unwrap(), 0.0);
    }

    #[test]
    fn empty_residue_rejected() {
        let r = Residue::new(1, ' ', "ALA", Vec::new());
        assert!(min_atom_distance(&r, &residue(&[[0.0; 3]])).is_err());
    }

    #[test]
    fn matches_exhaustive_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a: Vec<[f64; 3]> = (0..5).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
            let b: Vec<[f64; 3]> = (0..7)
                .map(|_| [rng.random::<f64>() + 2.0, rng.random(), rng.random()])
                .collect();
            let mut all = Vec::new();
            for p in &a {
                for q in &b {
                    all.push(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt());
                }
            }
            assert_eq!(all.len(), 35);
            let expected = all.iter().cloned().fold(f64::INFINITY, f64::min);
            let got = min_atom_distance(&residue(&a), &residue(&b)).unwrap();
            assert_eq!(got, expected);
        }
    }
}
