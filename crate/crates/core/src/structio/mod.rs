//! Atomic data model, PDB ingestion and the text artifacts derived from it.

mod cache;
mod pdb;
mod predictions;

pub use cache::{read_structure, write_structure};
pub use pdb::{parse_pdb, parse_pdb_with_stats, write_pdb, ParseStats};
pub use predictions::{read_predictions, write_predictions, PredictionKey, PredictionRow, PredictionTable};

use crate::residues;
use crate::Vec3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StructError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("structure contains no ATOM records")]
    EmptyStructure,
    #[error("alignment error for {pair}: {probabilities} probabilities for {residues} residues")]
    Alignment {
        pair: String,
        probabilities: usize,
        residues: usize,
    },
    #[error("validation error on row {row}: {message}")]
    Validation { row: usize, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub serial: i64,
    pub name: String,
    pub element: String,
    pub coord: Vec3,
    pub occupancy: f64,
    pub altloc: char,
    pub is_hetero: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residue {
    pub seq_id: i32,
    pub insertion_code: char,
    pub name: String,
    pub atoms: Vec<Atom>,
    /// Unweighted mean of heavy-atom coordinates.
    pub mass_center: Vec3,
}

impl Residue {
    pub fn new(seq_id: i32, insertion_code: char, name: impl Into<String>, atoms: Vec<Atom>) -> Self {
        let mut residue = Residue {
            seq_id,
            insertion_code,
            name: name.into(),
            atoms,
            mass_center: [0.0; 3],
        };
        residue.update_mass_center();
        residue
    }

    pub fn update_mass_center(&mut self) {
        let heavy: Vec<&Atom> = self.atoms.iter().filter(|a| !is_hydrogen(&a.element)).collect();
        let n = heavy.len().max(1) as f64;
        let mut c = [0.0; 3];
        for a in &heavy {
            for k in 0..3 {
                c[k] += a.coord[k];
            }
        }
        self.mass_center = [c[0] / n, c[1] / n, c[2] / n];
    }

    pub fn one_letter(&self) -> char {
        residues::one_letter(&self.name)
    }

    pub fn key(&self) -> ResidueKey {
        ResidueKey {
            seq_id: self.seq_id,
            insertion_code: self.insertion_code,
        }
    }

    pub fn heavy_coords(&self) -> Vec<Vec3> {
        self.atoms
            .iter()
            .filter(|a| !is_hydrogen(&a.element))
            .map(|a| a.coord)
            .collect()
    }
}

/// Residue identity within a chain: PDB resSeq plus insertion code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResidueKey {
    pub seq_id: i32,
    pub insertion_code: char,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub id: char,
    pub residues: Vec<Residue>,
    pub sequence: String,
}

impl Chain {
    /// Builds a chain, sorting residues by `(seq_id, insertion_code)` and
    /// deriving the one-letter sequence.
    pub fn new(id: char, mut residues: Vec<Residue>) -> Self {
        residues.sort_by_key(|r| (r.seq_id, r.insertion_code));
        let sequence = residues.iter().map(Residue::one_letter).collect();
        Chain { id, residues, sequence }
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Xray,
    Nmr,
    Other,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Xray => "xray",
            Method::Nmr => "nmr",
            Method::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "xray" => Some(Method::Xray),
            "nmr" => Some(Method::Nmr),
            "other" => Some(Method::Other),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Complex {
    pub pdb_id: String,
    pub chains: Vec<Chain>,
    pub resolution: Option<f64>,
    pub method: Option<Method>,
}

impl Complex {
    pub fn chain(&self, id: char) -> Option<&Chain> {
        self.chains.iter().find(|c| c.id == id)
    }

    pub fn atom_count(&self) -> usize {
        self.chains
            .iter()
            .flat_map(|c| c.residues.iter())
            .map(|r| r.atoms.len())
            .sum()
    }
}

pub(crate) fn is_hydrogen(element: &str) -> bool {
    let e = element.trim();
    e.eq_ignore_ascii_case("H") || e.eq_ignore_ascii_case("D")
}
