use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::dataset::DatasetError;
use crate::geometry::{sphere_sasa, GeometryError, DEFAULT_PROBE, DEFAULT_SPHERE_POINTS};
use crate::residues::{max_sasa, vdw_radius, GENERIC_MAX_SASA};
use crate::structio::{Complex, Residue, ResidueKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRsaEntry {
    pub key: ResidueKey,
    pub residue: char,
    pub rsa_bound: f64,
    pub rsa_unbound: f64,
    /// `rsa_bound - rsa_unbound`; negative means buried on binding.
    pub delta: f64,
}

/// SASA over maximum SASA for the residue type, capped at 1.
pub fn relative_sasa(area: f64, residue: char) -> f64 {
    let max = max_sasa(residue).unwrap_or_else(|| {
        log::warn!("no maximum SASA for residue type '{residue}', using {GENERIC_MAX_SASA}");
        GENERIC_MAX_SASA
    });
    (area / max).min(1.0)
}

fn atom_spheres(res: &Residue) -> Result<Vec<([f64; 3], f64)>, GeometryError> {
    res.atoms
        .iter()
        .map(|a| {
            vdw_radius(&a.element)
                .map(|r| (a.coord, r))
                .ok_or_else(|| GeometryError::UnknownElement {
                    element: a.element.clone(),
                    atom: format!("{}{}:{}", res.name, res.seq_id, a.name),
                })
        })
        .collect()
}

/// Per protein residue `RSA(bound) - RSA(unbound)`, where the unbound state
/// is the whole complex without the peptide chain.
pub fn delta_rsa(
    complex: &Complex,
    peptide_chain: char,
    protein_chain: char,
    probe: f64,
    n_points: usize,
) -> Result<Vec<DeltaRsaEntry>, MetricsError> {
    let missing = |chain| DatasetError::ChainNotFound {
        pdb_id: complex.pdb_id.clone(),
        chain,
    };
    complex.chain(peptide_chain).ok_or_else(|| missing(peptide_chain))?;
    let protein = complex.chain(protein_chain).ok_or_else(|| missing(protein_chain))?;

    // protein atoms first so they are the leading targets in both states
    let mut centers = Vec::new();
    let mut radii = Vec::new();
    let mut owner = Vec::new();
    for (ri, res) in protein.residues.iter().enumerate() {
        for (c, r) in atom_spheres(res)? {
            centers.push(c);
            radii.push(r);
            owner.push(ri);
        }
    }
    let n_protein = centers.len();
    let push_chain = |id: char, centers: &mut Vec<[f64; 3]>, radii: &mut Vec<f64>| -> Result<(), MetricsError> {
        for res in &complex.chain(id).expect("chain listed").residues {
            for (c, r) in atom_spheres(res)? {
                centers.push(c);
                radii.push(r);
            }
        }
        Ok(())
    };
    for ch in &complex.chains {
        if ch.id != peptide_chain && ch.id != protein_chain {
            push_chain(ch.id, &mut centers, &mut radii)?;
        }
    }
    let unbound_len = centers.len();
    push_chain(peptide_chain, &mut centers, &mut radii)?;

    let targets: Vec<usize> = (0..n_protein).collect();
    let bound = sphere_sasa(&centers, &radii, probe, n_points, Some(&targets))?;
    let unbound = sphere_sasa(&centers[..unbound_len], &radii[..unbound_len], probe, n_points, Some(&targets))?;

    let mut area_b = vec![0.0; protein.len()];
    let mut area_u = vec![0.0; protein.len()];
    for k in 0..n_protein {
        area_b[owner[k]] += bound[k];
        area_u[owner[k]] += unbound[k];
    }
    Ok(protein
        .residues
        .iter()
        .enumerate()
        .map(|(i, res)| {
            let code = res.one_letter();
            let rsa_bound = relative_sasa(area_b[i], code);
            let rsa_unbound = relative_sasa(area_u[i], code);
            DeltaRsaEntry {
                key: res.key(),
                residue: code,
                rsa_bound,
                rsa_unbound,
                delta: rsa_bound - rsa_unbound,
            }
        })
        .collect())
}

/// [`delta_rsa`] with the default probe and sphere resolution.
pub fn delta_rsa_default(complex: &Complex, peptide_chain: char, protein_chain: char) -> Result<Vec<DeltaRsaEntry>, MetricsError> {
    delta_rsa(complex, peptide_chain, protein_chain, DEFAULT_PROBE, DEFAULT_SPHERE_POINTS)
}
