use super::{DatasetError, PROTEIN_PAD};
use crate::geometry::neighbor_pairs;
use crate::structio::{Complex, ResidueKey};
use crate::Vec3;

/// Contact cutoff (Å) between any protein and any peptide heavy atom.
pub const DEFAULT_CUTOFF: f64 = 6.0;

/// One peptide-chain/protein-chain instance with binary interface labels.
///
/// `labels` and `mask` are padded to [`PROTEIN_PAD`]; the per-residue
/// geometry vectors cover only real residues.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub pdb_id: String,
    pub peptide_chain: char,
    pub protein_chain: char,
    pub peptide_seq: String,
    pub protein_seq: String,
    pub labels: Vec<u8>,
    pub mask: Vec<u8>,
    pub residue_keys: Vec<ResidueKey>,
    /// Residue mass centers (unweighted heavy-atom means).
    pub centers: Vec<Vec3>,
    /// Heavy-atom coordinates per residue.
    pub atoms: Vec<Vec<Vec3>>,
}

impl LabeledPair {
    pub fn instance_id(&self) -> String {
        let c = |c: char| if c == ' ' { '_' } else { c };
        format!("{}_{}_{}", self.pdb_id, c(self.peptide_chain), c(self.protein_chain))
    }

    /// Number of real (unpadded) protein residues.
    pub fn len(&self) -> usize {
        self.residue_keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residue_keys.is_empty()
    }

    pub fn interface_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }
}

/// Labels protein residue `i` as interface iff any of its heavy atoms lies
/// within `cutoff` (inclusive) of any peptide heavy atom.
pub fn label_interface(
    complex: &Complex,
    peptide_chain: char,
    protein_chain: char,
    cutoff: f64,
) -> Result<LabeledPair, DatasetError> {
    let find = |id: char| {
        complex.chain(id).ok_or_else(|| DatasetError::ChainNotFound {
            pdb_id: complex.pdb_id.clone(),
            chain: id,
        })
    };
    let peptide = find(peptide_chain)?;
    let protein = find(protein_chain)?;
    for ch in [peptide, protein] {
        if ch.is_empty() {
            return Err(DatasetError::EmptyChain {
                pdb_id: complex.pdb_id.clone(),
                chain: ch.id,
            });
        }
    }
    if protein.len() > PROTEIN_PAD {
        return Err(DatasetError::TooLong {
            pdb_id: complex.pdb_id.clone(),
            chain: protein.id,
            len: protein.len(),
            max: PROTEIN_PAD,
        });
    }

    let mut protein_atoms = Vec::new();
    let mut owner = Vec::new();
    let mut atoms = Vec::with_capacity(protein.len());
    for (ri, res) in protein.residues.iter().enumerate() {
        let coords = res.heavy_coords();
        for c in &coords {
            protein_atoms.push(*c);
            owner.push(ri);
        }
        atoms.push(coords);
    }
    let peptide_atoms: Vec<Vec3> = peptide.residues.iter().flat_map(|r| r.heavy_coords()).collect();

    let mut labels = vec![0u8; PROTEIN_PAD];
    for (i, _) in neighbor_pairs(&protein_atoms, &peptide_atoms, cutoff) {
        labels[owner[i]] = 1;
    }
    let mut mask = vec![0u8; PROTEIN_PAD];
    mask[..protein.len()].iter_mut().for_each(|m| *m = 1);

    Ok(LabeledPair {
        pdb_id: complex.pdb_id.clone(),
        peptide_chain,
        protein_chain,
        peptide_seq: peptide.sequence.clone(),
        protein_seq: protein.sequence.clone(),
        labels,
        mask,
        residue_keys: protein.residues.iter().map(|r| r.key()).collect(),
        centers: protein.residues.iter().map(|r| r.mass_center).collect(),
        atoms,
    })
}

/// Sequence-window label relaxation: `out[i] = 1` iff some real position `j`
/// with `|i - j| <= window` is labeled. Masked positions stay 0.
pub fn expand_labels(labels: &[u8], mask: &[u8], window: usize) -> Vec<u8> {
    let n = labels.len();
    let mut out = vec![0u8; n];
    for j in 0..n {
        if labels[j] == 1 && mask.get(j).copied().unwrap_or(1) == 1 {
            let lo = j.saturating_sub(window);
            let hi = (j + window).min(n - 1);
            for o in &mut out[lo..=hi] {
                *o = 1;
            }
        }
    }
    for (o, m) in out.iter_mut().zip(mask) {
        if *m == 0 {
            *o = 0;
        }
    }
    out
}
