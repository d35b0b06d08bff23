use serde::{Deserialize, Serialize};

use super::{DatasetError, EmbeddingTable, LabeledPair, PROTEIN_PAD};
use crate::residues::{alphabet_index, physchem, ALPHABET, PHYSCHEM_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureScheme {
    Onehot,
    Physchem,
    External,
}

impl FeatureScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureScheme::Onehot => "onehot",
            FeatureScheme::Physchem => "physchem",
            FeatureScheme::External => "external",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "onehot" => Some(FeatureScheme::Onehot),
            "physchem" => Some(FeatureScheme::Physchem),
            "external" => Some(FeatureScheme::External),
            _ => None,
        }
    }
}

/// A scheme together with the data it needs.
#[derive(Debug, Clone, Copy)]
pub enum FeatureEncoding<'a> {
    Onehot,
    Physchem,
    External(&'a EmbeddingTable),
}

impl FeatureEncoding<'_> {
    pub fn scheme(&self) -> FeatureScheme {
        match self {
            FeatureEncoding::Onehot => FeatureScheme::Onehot,
            FeatureEncoding::Physchem => FeatureScheme::Physchem,
            FeatureEncoding::External(_) => FeatureScheme::External,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FeatureEncoding::Onehot => ALPHABET.len(),
            FeatureEncoding::Physchem => PHYSCHEM_DIM,
            FeatureEncoding::External(t) => t.dim,
        }
    }
}

/// Per-residue feature rows over the padded protein plus a mean-pooled
/// global row. Masked rows are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub dim: usize,
    pub scheme: FeatureScheme,
    /// Row-major `PROTEIN_PAD x dim`.
    pub data: Vec<f64>,
    pub global_row: Vec<f64>,
}

impl FeatureMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.dim.max(1)
    }

    /// Model input for residue `i`: its row followed by the global row.
    pub fn residue_input(&self, i: usize) -> Vec<f64> {
        let mut x = Vec::with_capacity(2 * self.dim);
        x.extend_from_slice(self.row(i));
        x.extend_from_slice(&self.global_row);
        x
    }

    /// Builds a matrix from explicit real rows; rows past `rows.len()` are padding.
    pub fn from_rows(rows: &[Vec<f64>], dim: usize, scheme: FeatureScheme, padded_len: usize) -> Self {
        let mut data = vec![0.0; padded_len * dim];
        let mut global_row = vec![0.0; dim];
        for (i, r) in rows.iter().enumerate() {
            data[i * dim..(i + 1) * dim].copy_from_slice(r);
            for k in 0..dim {
                global_row[k] += r[k];
            }
        }
        if !rows.is_empty() {
            global_row.iter_mut().for_each(|g| *g /= rows.len() as f64);
        }
        FeatureMatrix {
            dim,
            scheme,
            data,
            global_row,
        }
    }
}

pub fn encode_features(pair: &LabeledPair, encoding: FeatureEncoding<'_>) -> Result<FeatureMatrix, DatasetError> {
    let dim = encoding.dim();
    let seq: Vec<char> = pair.protein_seq.chars().collect();
    let rows: Vec<Vec<f64>> = match encoding {
        FeatureEncoding::Onehot => seq
            .iter()
            .map(|&c| {
                let mut r = vec![0.0; dim];
                r[alphabet_index(c)] = 1.0;
                r
            })
            .collect(),
        FeatureEncoding::Physchem => seq.iter().map(|&c| physchem(c).to_vec()).collect(),
        FeatureEncoding::External(table) => {
            let missing = table.missing(seq.len());
            if !missing.is_empty() {
                return Err(DatasetError::Coverage { missing });
            }
            (0..seq.len()).map(|i| table.rows[&i].clone()).collect()
        }
    };
    Ok(FeatureMatrix::from_rows(&rows, dim, encoding.scheme(), PROTEIN_PAD))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn pair(seq: &str) -> LabeledPair {
        let n = seq.len();
        let mut mask = vec![0u8; PROTEIN_PAD];
        mask[..n].iter_mut().for_each(|m| *m = 1);
        LabeledPair {
            pdb_id: "T".into(),
            peptide_chain: 'P',
            protein_chain: 'A',
            peptide_seq: "GGGGGGGGGGGG".into(),
            protein_seq: seq.into(),
            labels: vec![0; PROTEIN_PAD],
            mask,
            residue_keys: (0..n)
                .map(|i| crate::structio::ResidueKey {
                    seq_id: i as i32,
                    insertion_code: ' ',
                })
                .collect(),
            centers: vec![[0.0; 3]; n],
            atoms: vec![vec![[0.0; 3]]; n],
        }
    }

    #[test]
    fn onehot_rows() {
        let f = encode_features(&pair("ACX"), FeatureEncoding::Onehot).unwrap();
        assert_eq!(f.dim, 21);
        assert_eq!(f.row(0)[0], 1.0);
        assert_eq!(f.row(0).iter().sum::<f64>(), 1.0);
        assert_eq!(f.row(2)[20], 1.0);
        for i in 3..PROTEIN_PAD {
            assert!(f.row(i).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn global_row_is_mean() {
        let f = encode_features(&pair("AKW"), FeatureEncoding::Physchem).unwrap();
        let rows = [physchem('A'), physchem('K'), physchem('W')];
        for k in 0..PHYSCHEM_DIM {
            let mean = (rows[0][k] + rows[1][k] + rows[2][k]) / 3.0;
            assert!((f.global_row[k] - mean).abs() < 1e-15);
        }
        assert_eq!(f.residue_input(1).len(), 2 * PHYSCHEM_DIM);
    }

    #[test]
    fn external_coverage() {
        let mut rows = BTreeMap::new();
        rows.insert(0, vec![1.0, 2.0]);
        rows.insert(2, vec![3.0, 4.0]);
        let table = EmbeddingTable { dim: 2, rows };
        match encode_features(&pair("AAAA"), FeatureEncoding::External(&table)) {
            Err(DatasetError::Coverage { missing }) => assert_eq!(missing, vec![1, 3]),
            other => panic!("{other:?}"),
        }
        let f = encode_features(&pair("AAA").clone(), FeatureEncoding::External(&EmbeddingTable {
            dim: 2,
            rows: (0..3).map(|i| (i, vec![i as f64, 1.0])).collect(),
        }))
        .unwrap();
        assert_eq!(f.global_row, vec![1.0, 1.0]);
    }
}
