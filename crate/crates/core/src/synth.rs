//! Deterministic synthetic data: small peptide/protein complexes whose
//! interface residues are enriched in hydrophobic types, and an additive
//! B-spline classification target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

use crate::dataset::{label_interface, FeatureMatrix, FeatureScheme, DEFAULT_CUTOFF, PROTEIN_PAD};
use crate::model::{bspline_basis, SplineGrid};
use crate::residues::three_letter;
use crate::structio::{Atom, Chain, Complex, Method, Residue};
use crate::Vec3;

const HYDROPHOBIC: [char; 8] = ['L', 'I', 'V', 'F', 'M', 'W', 'A', 'Y'];
const POLAR: [char; 12] = ['D', 'E', 'K', 'R', 'N', 'Q', 'S', 'T', 'G', 'P', 'H', 'C'];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub protein_len: (usize, usize),
    pub peptide_len: (usize, usize),
    /// Probability that an interface residue is hydrophobic, and that a
    /// non-interface residue is polar.
    pub enrichment: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            protein_len: (40, 70),
            peptide_len: (11, 15),
            enrichment: 0.8,
        }
    }
}

fn add(a: Vec3, b: Vec3, s: f64) -> Vec3 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    UnitSphere.sample(rng)
}

/// Heavy atoms for one residue around its alpha carbon.
fn residue_atoms(ca: Vec3, rng: &mut ChaCha8Rng, serial: &mut i64) -> Vec<Atom> {
    let specs = [("N", "N", 1.45), ("CA", "C", 0.0), ("C", "C", 1.52), ("O", "O", 2.4), ("CB", "C", 1.53)];
    specs
        .iter()
        .map(|&(name, element, r)| {
            let coord = if r == 0.0 { ca } else { add(ca, unit(rng), r) };
            *serial += 1;
            Atom {
                serial: *serial,
                name: name.into(),
                element: element.into(),
                coord: round3(coord),
                occupancy: 1.0,
                altloc: ' ',
                is_hetero: false,
            }
        })
        .collect()
}

/// Coordinates survive a PDB write/read unchanged.
fn round3(c: Vec3) -> Vec3 {
    c.map(|v| (v * 1000.0).round() / 1000.0)
}

/// Random-walk alpha-carbon trace with 3.8 Å steps kept inside a ball.
fn compact_trace(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let radius = 3.2 * (n as f64).cbrt();
    let mut trace: Vec<Vec3> = vec![[0.0; 3]];
    while trace.len() < n {
        let last = *trace.last().expect("nonempty");
        let mut best = None;
        for _ in 0..20 {
            let cand = add(last, unit(rng), 3.8);
            if dot(cand, cand).sqrt() > radius {
                continue;
            }
            let clash = trace.iter().any(|p| crate::dist2(p, &cand) < 3.6 * 3.6);
            if !clash {
                best = Some(cand);
                break;
            }
            best.get_or_insert(cand);
        }
        // pull back toward the center when every candidate left the ball
        let next = best.unwrap_or_else(|| {
            let norm = dot(last, last).sqrt().max(1e-9);
            add(last, last, -3.8 / norm)
        });
        trace.push(next);
    }
    trace
}

/// One complex with a protein chain `A` and a peptide chain `P` lying along
/// the protein surface. Residue types are drawn after labeling so the 6 Å
/// interface is enriched in hydrophobic residues.
pub fn synthetic_complex(pdb_id: &str, seed: u64, options: &SynthOptions) -> Complex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_prot = rng.random_range(options.protein_len.0..=options.protein_len.1);
    let n_pep = rng.random_range(options.peptide_len.0..=options.peptide_len.1);
    let trace = compact_trace(n_prot, &mut rng);

    let dir = unit(&mut rng);
    let reach = trace.iter().map(|p| dot(*p, dir)).fold(f64::NEG_INFINITY, f64::max);
    let mut side = unit(&mut rng);
    let along = dot(side, dir);
    side = add(side, dir, -along);
    let norm = dot(side, side).sqrt();
    side = side.map(|v| v / norm);
    let anchor = dir.map(|v| v * (reach + 5.0));
    let pep_trace: Vec<Vec3> = (0..n_pep)
        .map(|k| add(anchor, side, (k as f64 - (n_pep as f64 - 1.0) / 2.0) * 3.5))
        .collect();

    let mut serial = 0;
    let mut protein: Vec<Residue> = trace
        .iter()
        .enumerate()
        .map(|(i, &ca)| Residue::new(i as i32 + 1, ' ', "GLY", residue_atoms(round3(ca), &mut rng, &mut serial)))
        .collect();
    let peptide: Vec<Residue> = pep_trace
        .iter()
        .enumerate()
        .map(|(i, &ca)| {
            let code = HYDROPHOBIC[rng.random_range(0..HYDROPHOBIC.len())];
            Residue::new(i as i32 + 1, ' ', three_letter(code), residue_atoms(round3(ca), &mut rng, &mut serial))
        })
        .collect();

    let mut complex = Complex {
        pdb_id: pdb_id.to_string(),
        chains: vec![Chain::new('A', protein.clone()), Chain::new('P', peptide.clone())],
        resolution: Some(2.0),
        method: Some(Method::Xray),
    };
    let labels = label_interface(&complex, 'P', 'A', DEFAULT_CUTOFF)
        .map(|p| p.labels)
        .unwrap_or_else(|_| vec![0; PROTEIN_PAD]);
    for (i, res) in protein.iter_mut().enumerate() {
        let hydrophobic = (labels[i] == 1) == rng.random_bool(options.enrichment);
        let code = if hydrophobic {
            HYDROPHOBIC[rng.random_range(0..HYDROPHOBIC.len())]
        } else {
            POLAR[rng.random_range(0..POLAR.len())]
        };
        res.name = three_letter(code).to_string();
    }
    complex.chains = vec![Chain::new('A', protein), Chain::new('P', peptide)];
    complex
}

/// Real residue rows and labels for one chain of the spline target.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineInstance {
    pub id: String,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl SplineInstance {
    pub fn features(&self, dim: usize) -> FeatureMatrix {
        FeatureMatrix::from_rows(&self.rows, dim, FeatureScheme::External, PROTEIN_PAD)
    }

    pub fn padded(&self) -> (Vec<u8>, Vec<u8>) {
        let mut labels = vec![0u8; PROTEIN_PAD];
        let mut mask = vec![0u8; PROTEIN_PAD];
        labels[..self.labels.len()].copy_from_slice(&self.labels);
        mask[..self.labels.len()].iter_mut().for_each(|m| *m = 1);
        (labels, mask)
    }
}

/// Additive spline target: `f(x) = Σ_j Σ_b c_jb B_b(x_j)` over features
/// uniform on [-1, 1], labeled 1 above the median of `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineTarget {
    pub dim: usize,
    pub instances: Vec<SplineInstance>,
}

pub fn spline_target(seed: u64, n_instances: usize, n_residues: usize, dim: usize) -> SplineTarget {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = SplineGrid::uniform(-1.0, 1.0, 5, 3).expect("valid grid");
    let coeffs: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..grid.n_basis()).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let f = |x: &[f64]| -> f64 {
        x.iter()
            .zip(&coeffs)
            .map(|(&v, c)| bspline_basis(v, &grid).iter().zip(c).map(|(b, c)| b * c).sum::<f64>())
            .sum()
    };
    let rows: Vec<Vec<Vec<f64>>> = (0..n_instances)
        .map(|_| {
            (0..n_residues)
                .map(|_| (0..dim).map(|_| (rng.random_range(-1.0..1.0) * 1000.0_f64).round() / 1000.0).collect())
                .collect()
        })
        .collect();
    let mut values: Vec<f64> = rows.iter().flatten().map(|r| f(r)).collect();
    values.sort_by(|a, b| a.total_cmp(b));
    let median = values[values.len() / 2];
    let instances = rows
        .into_iter()
        .enumerate()
        .map(|(k, rows)| SplineInstance {
            id: format!("spline{k:03}"),
            labels: rows.iter().map(|r| (f(r) > median) as u8).collect(),
            rows,
        })
        .collect();
    SplineTarget { dim, instances }
}

impl SplineTarget {
    /// CSV text: `instance,residue,label,x0..x{dim-1}`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("instance,residue,label");
        for j in 0..self.dim {
            s.push_str(&format!(",x{j}"));
        }
        s.push('\n');
        for inst in &self.instances {
            for (i, (row, l)) in inst.rows.iter().zip(&inst.labels).enumerate() {
                s.push_str(&format!("{},{i},{l}", inst.id));
                for v in row {
                    s.push_str(&format!(",{v}"));
                }
                s.push('\n');
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty spline target")?;
        let dim = header.split(',').count().checked_sub(3).ok_or("short header")?;
        let mut instances: Vec<SplineInstance> = Vec::new();
        for (n, line) in lines.enumerate() {
            let bad = |what: &str| format!("line {}: {what}", n + 2);
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 3 {
                return Err(bad("wrong field count"));
            }
            let label: u8 = fields[2].parse().map_err(|_| bad("bad label"))?;
            let row = fields[3..]
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| bad("bad value")))
                .collect::<Result<Vec<_>, _>>()?;
            match instances.last_mut() {
                Some(inst) if inst.id == fields[0] => {
                    inst.rows.push(row);
                    inst.labels.push(label);
                }
                _ => instances.push(SplineInstance {
                    id: fields[0].to_string(),
                    rows: vec![row],
                    labels: vec![label],
                }),
            }
        }
        Ok(SplineTarget { dim, instances })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structio::{parse_pdb, write_pdb};

    #[test]
    fn complex_is_deterministic_and_survives_pdb_text() {
        let opts = SynthOptions::default();
        let a = synthetic_complex("S001", 4, &opts);
        assert_eq!(a, synthetic_complex("S001", 4, &opts));
        assert_eq!(parse_pdb(&write_pdb(&a)).unwrap(), a);
    }

    #[test]
    fn interface_is_enriched() {
        let opts = SynthOptions::default();
        let (mut hits, mut pos, mut neg_h, mut neg) = (0, 0, 0, 0);
        for seed in 0..20 {
            let c = synthetic_complex("S", seed, &opts);
            let pair = label_interface(&c, 'P', 'A', DEFAULT_CUTOFF).unwrap();
            assert!(pair.interface_count() > 0, "seed {seed}");
            for (i, code) in pair.protein_seq.chars().enumerate() {
                let h = HYDROPHOBIC.contains(&code) as usize;
                if pair.labels[i] == 1 {
                    pos += 1;
                    hits += h;
                } else {
                    neg += 1;
                    neg_h += h;
                }
            }
        }
        assert!(hits as f64 / pos as f64 > 0.6);
        assert!((neg_h as f64 / neg as f64) < 0.4);
    }

    #[test]
    fn spline_target_balanced_and_round_trips() {
        let t = spline_target(3, 4, 30, 2);
        let ones: usize = t.instances.iter().flat_map(|i| &i.labels).map(|&l| l as usize).sum();
        assert!((50..=70).contains(&ones));
        assert_eq!(SplineTarget::from_csv(&t.to_csv()).unwrap(), t);
    }
}
