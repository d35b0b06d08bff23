//! Shrake-Rupley solvent-accessible surface area.

use rayon::prelude::*;

use super::{GeometryError, SpatialGrid};
use crate::residues::vdw_radius;
use crate::structio::Residue;
use crate::Vec3;

pub const DEFAULT_PROBE: f64 = 1.4;
pub const DEFAULT_SPHERE_POINTS: usize = 960;

#[derive(Debug, Clone, PartialEq)]
pub struct SasaResult {
    /// Per atom, in input order (residue by residue).
    pub per_atom_area: Vec<f64>,
    pub per_residue_area: Vec<f64>,
}

/// `n` near-uniform unit vectors on a golden-angle (Fibonacci) spiral.
pub fn golden_spiral(n: usize) -> Vec<Vec3> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|k| {
            let y = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - y * y).max(0.0).sqrt();
            let phi = k as f64 * golden_angle;
            [phi.cos() * r, y, phi.sin() * r]
        })
        .collect()
}

/// Accessible area of each sphere in `targets` (all spheres when `None`),
/// with every sphere in the set acting as an occluder. Radii are van der Waals
/// radii; `probe` is added to each.
pub fn sphere_sasa(
    centers: &[Vec3],
    radii: &[f64],
    probe: f64,
    n_points: usize,
    targets: Option<&[usize]>,
) -> Result<Vec<f64>, GeometryError> {
    if !(probe >= 0.0) {
        return Err(GeometryError::InvalidParameter(format!("probe {probe} < 0")));
    }
    if n_points == 0 {
        return Err(GeometryError::InvalidParameter("n_points must be >= 1".into()));
    }
    if centers.len() != radii.len() {
        return Err(GeometryError::InvalidParameter("centers and radii differ in length".into()));
    }
    if centers.is_empty() {
        return Ok(Vec::new());
    }
    let expanded: Vec<f64> = radii.iter().map(|r| r + probe).collect();
    let max_r = expanded.iter().cloned().fold(0.0, f64::max);
    let grid = SpatialGrid::new(centers, (2.0 * max_r).max(1e-6));
    let sphere = golden_spiral(n_points);
    let all: Vec<usize>;
    let targets = match targets {
        Some(t) => t,
        None => {
            all = (0..centers.len()).collect();
            &all
        }
    };

    Ok(targets
        .par_iter()
        .map(|&i| {
            let ri = expanded[i];
            let ci = centers[i];
            let neighbors: Vec<usize> = grid
                .candidates(&ci, ri + max_r)
                .filter(|&j| j != i && crate::dist(&centers[j], &ci) < ri + expanded[j])
                .collect();
            let exposed = sphere
                .iter()
                .filter(|u| {
                    let p = [ci[0] + ri * u[0], ci[1] + ri * u[1], ci[2] + ri * u[2]];
                    !neighbors
                        .iter()
                        .any(|&j| crate::dist2(&p, &centers[j]) < expanded[j] * expanded[j])
                })
                .count();
            4.0 * std::f64::consts::PI * ri * ri * exposed as f64 / n_points as f64
        })
        .collect())
}

/// SASA over the heavy atoms of `residues`, each atom occluded by all others.
pub fn shrake_rupley_sasa(residues: &[&Residue], probe: f64, n_points: usize) -> Result<SasaResult, GeometryError> {
    let mut centers = Vec::new();
    let mut radii = Vec::new();
    let mut owner = Vec::new();
    for (ri, res) in residues.iter().enumerate() {
        for a in &res.atoms {
            let r = vdw_radius(&a.element).ok_or_else(|| GeometryError::UnknownElement {
                element: a.element.clone(),
                atom: format!("{}{}:{}", res.name, res.seq_id, a.name),
            })?;
            centers.push(a.coord);
            radii.push(r);
            owner.push(ri);
        }
    }
    let per_atom_area = sphere_sasa(&centers, &radii, probe, n_points, None)?;
    let mut per_residue_area = vec![0.0; residues.len()];
    for (a, &r) in per_atom_area.iter().zip(&owner) {
        per_residue_area[r] += a;
    }
    Ok(SasaResult {
        per_atom_area,
        per_residue_area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structio::Atom;
    use std::f64::consts::PI;

    fn atom_res(coords: &[Vec3], element: &str) -> Residue {
        let atoms = coords
            .iter()
            .map(|c| Atom {
                serial: 1,
                name: "X".into(),
                element: element.into(),
                coord: *c,
                occupancy: 1.0,
                altloc: ' ',
                is_hetero: false,
            })
            .collect();
        Residue::new(1, ' ', "UNK", atoms)
    }

    #[test]
    fn isolated_sphere() {
        let a = sphere_sasa(&[[0.0; 3]], &[1.6], 1.4, 960, None).unwrap();
        let exact = 4.0 * PI * 9.0;
        assert!((a[0] - exact).abs() < 1e-9);
        assert!((exact - 113.097).abs() < 1e-3);
        let far = sphere_sasa(&[[0.0; 3], [100.0, 0.0, 0.0]], &[1.6, 1.6], 1.4, 960, None).unwrap();
        assert!(far.iter().all(|v| (v - exact).abs() < 1e-9));
    }

    #[test]
    fn two_sphere_cap() {
        let r_big = 3.0;
        for d in [1.0, 2.5, 4.0, 5.5] {
            let a = sphere_sasa(&[[0.0; 3], [d, 0.0, 0.0]], &[1.6, 1.6], 1.4, 960, None).unwrap();
            let exact = 2.0 * PI * r_big * (r_big + d / 2.0);
            for v in a {
                assert!(((v - exact) / exact).abs() < 0.02, "d={d} {v} vs {exact}");
            }
        }
    }

    #[test]
    fn per_residue_sums_atoms() {
        let r1 = atom_res(&[[0.0; 3], [1.5, 0.0, 0.0]], "C");
        let r2 = atom_res(&[[3.0, 0.0, 0.0]], "O");
        let out = shrake_rupley_sasa(&[&r1, &r2], 1.4, 200).unwrap();
        assert_eq!(out.per_atom_area.len(), 3);
        assert!((out.per_residue_area[0] - out.per_atom_area[0] - out.per_atom_area[1]).abs() < 1e-12);
        assert!(out.per_atom_area.iter().all(|&a| a >= 0.0));
    }

    #[test]
    fn unknown_element() {
        let r = atom_res(&[[0.0; 3]], "Qq");
        match shrake_rupley_sasa(&[&r], 1.4, 10) {
            Err(GeometryError::UnknownElement { element, .. }) => assert_eq!(element, "Qq"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(sphere_sasa(&[[0.0; 3]], &[1.0], -1.0, 10, None).is_err());
        assert!(sphere_sasa(&[[0.0; 3]], &[1.0], 1.4, 0, None).is_err());
    }

    #[test]
    fn occlusion_monotone() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let mut centers: Vec<Vec3> = (0..15)
                .map(|_| [rng.random_range(0.0..8.0), rng.random_range(0.0..8.0), rng.random_range(0.0..8.0)])
                .collect();
            let mut radii = vec![1.7; 15];
            let before = sphere_sasa(&centers, &radii, 1.4, 240, None).unwrap();
            centers.push([rng.random_range(0.0..8.0), rng.random_range(0.0..8.0), rng.random_range(0.0..8.0)]);
            radii.push(1.52);
            let after = sphere_sasa(&centers, &radii, 1.4, 240, None).unwrap();
            for i in 0..15 {
                assert!(after[i] <= before[i]);
            }
        }
    }
}
