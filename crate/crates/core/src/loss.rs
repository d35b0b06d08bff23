//! Cross-entropy plus the distance-weighted false-positive penalty.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::min_set_distance;
use crate::Vec3;

/// Probabilities are clamped to `[P_CLAMP, 1 - P_CLAMP]` inside the logs.
pub const P_CLAMP: f64 = 1e-7;
pub const DEFAULT_LAMBDA: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum LossError {
    #[error("instance has no real residues")]
    EmptyInstance,
    #[error("instance has no binding residues")]
    NoBindingResidues,
    #[error("{what}: expected length {expected}, got {found}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("lambda must be finite and >= 0, got {0}")]
    BadLambda(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub ce: f64,
    #[serde(rename = "struct")]
    pub structural: f64,
    pub lambda: f64,
}

/// Distance of each real residue to the nearest binding residue.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    /// One entry per real residue; 0 on binding residues.
    pub d3d: Vec<f64>,
    pub dmax: f64,
}

/// How the structural term weighs negatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StructMode {
    /// `p_i * d3d(i) / dmax` summed over every negative.
    Continuous,
    /// Only negatives with `p_i >= threshold` count, each weighted by its
    /// distance over the largest such distance. Carries no gradient.
    HardFalsePositive { threshold: f64 },
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), LossError> {
    if expected != found {
        return Err(LossError::Shape { what, expected, found });
    }
    Ok(())
}

fn real_count(mask: &[u8]) -> Result<usize, LossError> {
    match mask.iter().filter(|&&m| m == 1).count() {
        0 => Err(LossError::EmptyInstance),
        n => Ok(n),
    }
}

fn clamp_p(p: f64) -> f64 {
    p.clamp(P_CLAMP, 1.0 - P_CLAMP)
}

/// Mean binary cross-entropy over real residues.
pub fn ce_loss(p: &[f64], y: &[u8], mask: &[u8]) -> Result<f64, LossError> {
    check_len("labels", p.len(), y.len())?;
    check_len("mask", p.len(), mask.len())?;
    let n = real_count(mask)? as f64;
    let mut s = 0.0;
    for i in 0..p.len() {
        if mask[i] == 1 {
            let q = clamp_p(p[i]);
            s += if y[i] == 1 { q.ln() } else { (1.0 - q).ln() };
        }
    }
    Ok(-s / n)
}

/// `atoms[i]` are the heavy atoms of real residue `i`; `y` may be padded.
pub fn distance_field(atoms: &[Vec<Vec3>], y: &[u8]) -> Result<DistanceField, LossError> {
    let binding: Vec<usize> = (0..atoms.len()).filter(|&i| y.get(i) == Some(&1)).collect();
    if binding.is_empty() {
        return Err(LossError::NoBindingResidues);
    }
    let d3d: Vec<f64> = (0..atoms.len())
        .map(|i| {
            if y[i] == 1 {
                0.0
            } else {
                binding
                    .iter()
                    .map(|&j| min_set_distance(&atoms[i], &atoms[j]))
                    .fold(f64::INFINITY, f64::min)
            }
        })
        .collect();
    let dmax = d3d.iter().copied().fold(0.0, f64::max);
    Ok(DistanceField { d3d, dmax })
}

fn check_field(p: &[f64], mask: &[u8], field: &DistanceField) -> Result<(), LossError> {
    if let Some(i) = (0..p.len()).rev().find(|&i| mask[i] == 1) {
        if i >= field.d3d.len() {
            return Err(LossError::Shape {
                what: "distance field",
                expected: i + 1,
                found: field.d3d.len(),
            });
        }
    }
    Ok(())
}

/// Mean distance-weighted penalty on negatives; 0 when `dmax` is 0.
pub fn struct_loss(p: &[f64], y: &[u8], field: &DistanceField, mask: &[u8]) -> Result<f64, LossError> {
    struct_loss_with_mode(p, y, field, mask, StructMode::Continuous)
}

pub fn struct_loss_with_mode(
    p: &[f64],
    y: &[u8],
    field: &DistanceField,
    mask: &[u8],
    mode: StructMode,
) -> Result<f64, LossError> {
    check_len("labels", p.len(), y.len())?;
    check_len("mask", p.len(), mask.len())?;
    let n = real_count(mask)? as f64;
    check_field(p, mask, field)?;
    let negatives = (0..p.len()).filter(|&i| mask[i] == 1 && y[i] == 0);
    match mode {
        StructMode::Continuous => {
            if field.dmax == 0.0 {
                return Ok(0.0);
            }
            Ok(negatives.map(|i| p[i] * field.d3d[i] / field.dmax).sum::<f64>() / n)
        }
        StructMode::HardFalsePositive { threshold } => {
            let fp: Vec<usize> = negatives.filter(|&i| p[i] >= threshold).collect();
            let r2 = fp.iter().map(|&i| field.d3d[i]).fold(0.0, f64::max);
            if r2 == 0.0 {
                return Ok(0.0);
            }
            Ok(fp.iter().map(|&i| field.d3d[i] / r2).sum::<f64>() / n)
        }
    }
}

/// `ce + lambda * struct` and its gradient with respect to every `p_i`
/// (zero on masked residues). `field = None` marks an instance without
/// binding residues, which contributes cross-entropy only.
pub fn total_loss(
    p: &[f64],
    y: &[u8],
    field: Option<&DistanceField>,
    lambda: f64,
    mask: &[u8],
    mode: StructMode,
) -> Result<(LossBreakdown, Vec<f64>), LossError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(LossError::BadLambda(lambda));
    }
    let ce = ce_loss(p, y, mask)?;
    let structural = match field {
        Some(f) => struct_loss_with_mode(p, y, f, mask, mode)?,
        None => 0.0,
    };
    let n = real_count(mask)? as f64;
    let mut grad = vec![0.0; p.len()];
    for i in 0..p.len() {
        if mask[i] == 0 {
            continue;
        }
        let q = clamp_p(p[i]);
        if p[i] > P_CLAMP && p[i] < 1.0 - P_CLAMP {
            let yi = y[i] as f64;
            grad[i] = (q - yi) / (q * (1.0 - q)) / n;
        }
        if let (Some(f), StructMode::Continuous) = (field, mode) {
            if y[i] == 0 && f.dmax > 0.0 {
                grad[i] += lambda * f.d3d[i] / f.dmax / n;
            }
        }
    }
    Ok((
        LossBreakdown {
            total: ce + lambda * structural,
            ce,
            structural,
            lambda,
        },
        grad,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn line() -> (Vec<Vec<Vec3>>, Vec<u8>) {
        (
            vec![vec![[0.0, 0.0, 0.0]], vec![[2.0, 0.0, 0.0]], vec![[4.0, 0.0, 0.0]]],
            vec![1, 0, 0],
        )
    }

    #[test]
    fn ce_examples() {
        assert!((ce_loss(&[0.5], &[1], &[1]).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        let exact = ce_loss(&[1.0, 0.0], &[1, 0], &[1, 1]).unwrap();
        assert!(exact > 0.0 && exact < 2e-7);
        let v = ce_loss(&[0.9, 0.2], &[1, 0], &[1, 1]).unwrap();
        assert!((v - (-(0.9f64.ln() + 0.8f64.ln()) / 2.0)).abs() < 1e-15);
        assert_eq!(ce_loss(&[0.5], &[1], &[0]), Err(LossError::EmptyInstance));
    }

    #[test]
    fn line_fixture() {
        let (atoms, y) = line();
        let f = distance_field(&atoms, &y).unwrap();
        assert_eq!(f.d3d, vec![0.0, 2.0, 4.0]);
        assert_eq!(f.dmax, 4.0);
        let s = struct_loss(&[0.9, 0.5, 0.5], &y, &f, &[1, 1, 1]).unwrap();
        assert_eq!(s, 0.25);
        let ce = ce_loss(&[0.9, 0.5, 0.5], &y, &[1, 1, 1]).unwrap();
        let (b, _) = total_loss(&[0.9, 0.5, 0.5], &y, Some(&f), 0.5, &[1, 1, 1], StructMode::Continuous).unwrap();
        assert_eq!(b.total, ce + 0.125);
        let (b0, _) = total_loss(&[0.9, 0.5, 0.5], &y, Some(&f), 0.0, &[1, 1, 1], StructMode::Continuous).unwrap();
        assert_eq!(b0.total, b0.ce);
    }

    #[test]
    fn zero_cases() {
        let (atoms, _) = line();
        let all = [1u8, 1, 1];
        let f = distance_field(&atoms, &all).unwrap();
        assert_eq!(f.d3d, vec![0.0; 3]);
        assert_eq!(struct_loss(&[0.3, 0.9, 0.1], &all, &f, &all).unwrap(), 0.0);
        let (atoms, y) = line();
        let f = distance_field(&atoms, &y).unwrap();
        assert_eq!(struct_loss(&[0.7, 0.0, 0.0], &y, &f, &[1, 1, 1]).unwrap(), 0.0);
        assert_eq!(distance_field(&atoms, &[0, 0, 0]), Err(LossError::NoBindingResidues));
    }

    #[test]
    fn hard_mode() {
        let (atoms, y) = line();
        let f = distance_field(&atoms, &y).unwrap();
        let mode = StructMode::HardFalsePositive { threshold: 0.8 };
        let s = struct_loss_with_mode(&[0.9, 0.85, 0.9], &y, &f, &[1, 1, 1], mode).unwrap();
        assert!((s - (0.5 + 1.0) / 3.0).abs() < 1e-15);
        let s = struct_loss_with_mode(&[0.9, 0.5, 0.5], &y, &f, &[1, 1, 1], mode).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn brute_force_field() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(30);
        let atoms: Vec<Vec<Vec3>> = (0..30)
            .map(|_| {
                (0..rng.random_range(1..6))
                    .map(|_| [rng.random_range(0.0..20.0), rng.random_range(0.0..20.0), rng.random_range(0.0..20.0)])
                    .collect()
            })
            .collect();
        let y: Vec<u8> = (0..30).map(|i| (i % 7 == 0) as u8).collect();
        let f = distance_field(&atoms, &y).unwrap();
        for i in 0..30 {
            let mut best = f64::INFINITY;
            for j in 0..30 {
                if y[j] == 1 {
                    for a in &atoms[i] {
                        for b in &atoms[j] {
                            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                            best = best.min(d);
                        }
                    }
                }
            }
            assert!((f.d3d[i] - best).abs() < 1e-12);
        }
    }

    fn random_instance(seed: u64) -> (Vec<f64>, Vec<u8>, Vec<u8>, DistanceField) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..25);
        let atoms: Vec<Vec<Vec3>> = (0..n)
            .map(|_| vec![[rng.random_range(0.0..15.0), rng.random_range(0.0..15.0), 0.0]])
            .collect();
        let mut y: Vec<u8> = (0..n).map(|_| rng.random_bool(0.3) as u8).collect();
        y[0] = 1;
        let p: Vec<f64> = (0..n + 3).map(|_| rng.random_range(0.02..0.98)).collect();
        y.extend([0, 0, 0]);
        let mut mask = vec![1u8; n];
        mask.extend([0, 0, 0]);
        let f = distance_field(&atoms, &y).unwrap();
        (p, y, mask, f)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..20 {
            let (p, y, mask, f) = random_instance(seed);
            let (_, g) = total_loss(&p, &y, Some(&f), 0.5, &mask, StructMode::Continuous).unwrap();
            for i in 0..p.len() {
                let h = 1e-6;
                let eval = |v: f64| {
                    let mut q = p.clone();
                    q[i] = v;
                    total_loss(&q, &y, Some(&f), 0.5, &mask, StructMode::Continuous).unwrap().0.total
                };
                let fd = (eval(p[i] + h) - eval(p[i] - h)) / (2.0 * h);
                let rel = (fd - g[i]).abs() / fd.abs().max(g[i].abs()).max(1e-12);
                assert!(rel < 1e-6 || (fd.abs() < 1e-12 && g[i] == 0.0), "seed {seed} i {i}: {fd} vs {}", g[i]);
            }
        }
    }

    proptest! {
        #[test]
        fn struct_monotone_in_negatives(seed in 0u64..500, bump in 0.0f64..0.5) {
            let (mut p, y, mask, f) = random_instance(seed);
            let base = struct_loss(&p, &y, &f, &mask).unwrap();
            for i in 0..p.len() {
                if mask[i] == 1 && y[i] == 0 {
                    p[i] = (p[i] + bump).min(1.0);
                }
            }
            prop_assert!(struct_loss(&p, &y, &f, &mask).unwrap() >= base);
        }

        #[test]
        fn struct_rigid_invariant(seed in 0u64..200, angle in 0.0f64..std::f64::consts::TAU, t in prop::array::uniform3(-50.0f64..50.0)) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let atoms: Vec<Vec<Vec3>> = (0..12)
                .map(|_| vec![[rng.random_range(0.0..15.0), rng.random_range(0.0..15.0), rng.random_range(0.0..15.0)]])
                .collect();
            let y: Vec<u8> = (0..12).map(|i| (i < 3) as u8).collect();
            let p: Vec<f64> = (0..12).map(|_| rng.random_range(0.0..1.0)).collect();
            let (c, s) = (angle.cos(), angle.sin());
            let moved: Vec<Vec<Vec3>> = atoms
                .iter()
                .map(|r| r.iter().map(|a| [c * a[0] - s * a[1] + t[0], s * a[0] + c * a[1] + t[1], a[2] + t[2]]).collect())
                .collect();
            let mask = vec![1u8; 12];
            let a = struct_loss(&p, &y, &distance_field(&atoms, &y).unwrap(), &mask).unwrap();
            let b = struct_loss(&p, &y, &distance_field(&moved, &y).unwrap(), &mask).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn farther_false_positive_costs_more(d1 in 1.0f64..10.0, extra in 0.0f64..5.0, p in 0.0f64..1.0) {
            // binding at 0, anchor negative fixes dmax at 20, probe negative moves outwards
            let y = [1u8, 0, 0];
            let mask = [1u8; 3];
            let near = vec![vec![[0.0, 0.0, 0.0]], vec![[d1, 0.0, 0.0]], vec![[-20.0, 0.0, 0.0]]];
            let far = vec![vec![[0.0, 0.0, 0.0]], vec![[d1 + extra, 0.0, 0.0]], vec![[-20.0, 0.0, 0.0]]];
            let probs = [0.5, p, 0.1];
            let a = struct_loss(&probs, &y, &distance_field(&near, &y).unwrap(), &mask).unwrap();
            let b = struct_loss(&probs, &y, &distance_field(&far, &y).unwrap(), &mask).unwrap();
            prop_assert!(b >= a);
        }
    }
}
