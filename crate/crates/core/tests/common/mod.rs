//! Independent brute-force oracles shared by integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use geopep_core::structio::{Chain, Complex};
use geopep_core::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn real_pdb_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/real"))
}

/// `(file name, text)` of every bundled PDB file, sorted by name.
pub fn real_pdbs() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(real_pdb_dir())
        .expect("real pdb dir")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "pdb"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn d2(a: &Vec3, b: &Vec3) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

fn heavy(chain: &Chain) -> Vec<Vec<Vec3>> {
    chain
        .residues
        .iter()
        .map(|r| {
            r.atoms
                .iter()
                .filter(|a| !matches!(a.element.as_str(), "H" | "D"))
                .map(|a| a.coord)
                .collect()
        })
        .collect()
}

/// Every protein residue checked against every peptide atom.
pub fn brute_labels(complex: &Complex, peptide: char, protein: char, cutoff: f64) -> Vec<u8> {
    let pep: Vec<Vec3> = heavy(complex.chain(peptide).unwrap()).into_iter().flatten().collect();
    heavy(complex.chain(protein).unwrap())
        .iter()
        .map(|atoms| atoms.iter().any(|a| pep.iter().any(|b| d2(a, b) <= cutoff * cutoff)) as u8)
        .collect()
}

/// Splits a single-chain complex into a leading "protein" chain `A` and a
/// trailing `len`-residue chain `P`.
pub fn split_chain(complex: &Complex, len: usize) -> Complex {
    let residues = &complex.chains[0].residues;
    let cut = residues.len() - len;
    Complex {
        pdb_id: complex.pdb_id.clone(),
        chains: vec![
            Chain::new('A', residues[..cut].to_vec()),
            Chain::new('P', residues[cut..].to_vec()),
        ],
        resolution: complex.resolution,
        method: complex.method,
    }
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Supporting planes through every point triple with all points on one side.
pub fn brute_hull_planes(pts: &[Vec3]) -> Vec<(Vec3, f64)> {
    let n = pts.len();
    let mut planes = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let mut nrm = cross(sub(&pts[j], &pts[i]), sub(&pts[k], &pts[i]));
                let len = dot(&nrm, &nrm).sqrt();
                if len < 1e-12 {
                    continue;
                }
                nrm = nrm.map(|v| v / len);
                let off = dot(&nrm, &pts[i]);
                let side: Vec<f64> = pts.iter().map(|p| dot(&nrm, p) - off).collect();
                if side.iter().all(|&s| s <= 1e-9) {
                    planes.push((nrm, off));
                } else if side.iter().all(|&s| s >= -1e-9) {
                    planes.push((nrm.map(|v| -v), -off));
                }
            }
        }
    }
    planes
}

/// Monte Carlo hull volume over the bounding box.
pub fn monte_carlo_hull_volume(pts: &[Vec3], samples: usize, seed: u64) -> f64 {
    let planes = brute_hull_planes(pts);
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in pts {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inside = (0..samples)
        .filter(|_| {
            let q: Vec3 = [0, 1, 2].map(|k| rng.random_range(lo[k]..hi[k]));
            planes.iter().all(|(n, off)| dot(n, &q) <= *off)
        })
        .count();
    (0..3).map(|k| hi[k] - lo[k]).product::<f64>() * inside as f64 / samples as f64
}

/// Uniform points in a ball.
pub fn ball_cloud(n: usize, radius: f64, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p: Vec3 = [0, 1, 2].map(|_| rng.random_range(-1.0..1.0));
        if dot(&p, &p) <= 1.0 {
            out.push(p.map(|v| v * radius));
        }
    }
    out
}

/// AUC as the fraction of positive/negative pairs ranked correctly, ties half.
pub fn pairwise_auc(p: &[f64], y: &[u8]) -> f64 {
    let mut twice = 0u64;
    let (mut pos, mut neg) = (0u64, 0u64);
    for (i, &yi) in y.iter().enumerate() {
        if yi == 1 {
            pos += 1;
        } else {
            neg += 1;
        }
        if yi != 1 {
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            if yj == 0 {
                twice += if p[i] > p[j] {
                    2
                } else if p[i] == p[j] {
                    1
                } else {
                    0
                };
            }
        }
    }
    twice as f64 / 2.0 / (pos * neg) as f64
}

/// Mid-ranks of |d| over all differences (zeros included).
fn mid_ranks_abs(d: &[f64]) -> Vec<f64> {
    d.iter()
        .map(|x| {
            let less = d.iter().filter(|y| y.abs() < x.abs()).count() as f64;
            let equal = d.iter().filter(|y| y.abs() == x.abs()).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// One-sided (`less`) signed-rank p-value by walking every sign pattern of
/// the nonzero differences, Pratt zero handling.
pub fn enumerate_signed_rank_less(d: &[f64]) -> f64 {
    let ranks = mid_ranks_abs(d);
    let nz: Vec<usize> = (0..d.len()).filter(|&i| d[i] != 0.0).collect();
    let w: f64 = nz.iter().filter(|&&i| d[i] > 0.0).map(|&i| ranks[i]).sum();
    let m = nz.len();
    let mut hits = 0u64;
    for mask in 0u64..(1 << m) {
        let s: f64 = (0..m).filter(|&k| mask >> k & 1 == 1).map(|k| ranks[nz[k]]).sum();
        if s <= w + 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << m) as f64
}

/// Exposed area of sphere `a` when a sphere `b` (both already probe-expanded)
/// sits at distance `d`: the full sphere minus the spherical cap inside `b`.
pub fn two_sphere_exposed(ra: f64, rb: f64, d: f64) -> f64 {
    let full = 4.0 * std::f64::consts::PI * ra * ra;
    if d >= ra + rb {
        return full;
    }
    let h = ra - (d * d + ra * ra - rb * rb) / (2.0 * d);
    full - 2.0 * std::f64::consts::PI * ra * h
}
