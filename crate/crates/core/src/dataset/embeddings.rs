//! Precomputed per-residue embeddings.
//!
//! ```text
//! D=<dim>
//! <res_index> v1 ... vD
//! ```
//! `res_index` is the 0-based position in the protein chain.

use std::collections::BTreeMap;
use std::path::Path;

use super::DatasetError;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub rows: BTreeMap<usize, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn parse(text: &str) -> Result<Self, DatasetError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hline, header) = lines.next().ok_or(DatasetError::Format {
            line: 1,
            message: "missing D=<dim> header".into(),
        })?;
        let dim: usize = header
            .trim()
            .strip_prefix("D=")
            .and_then(|d| d.trim().parse().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| DatasetError::Format {
                line: hline + 1,
                message: format!("bad header '{header}'"),
            })?;
        let mut rows = BTreeMap::new();
        for (i, line) in lines {
            let bad = |message: String| DatasetError::Format { line: i + 1, message };
            let mut it = line.split_whitespace();
            let idx: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("bad residue index".into()))?;
            let values: Vec<f64> = it
                .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad value '{t}'"))))
                .collect::<Result<_, _>>()?;
            if values.len() != dim {
                return Err(bad(format!("{} values under D={dim}", values.len())));
            }
            if rows.insert(idx, values).is_some() {
                return Err(bad(format!("duplicate residue index {idx}")));
            }
        }
        Ok(EmbeddingTable { dim, rows })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("D={}\n", self.dim);
        for (idx, row) in &self.rows {
            s.push_str(&idx.to_string());
            for v in row {
                s.push(' ');
                s.push_str(&v.to_string());
            }
            s.push('\n');
        }
        s
    }

    /// Residue indices in `0..n` without a row.
    pub fn missing(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|i| !self.rows.contains_key(i)).collect()
    }
}

pub fn load_external_embeddings(path: &Path) -> Result<EmbeddingTable, DatasetError> {
    EmbeddingTable::parse(&std::fs::read_to_string(path)?)
}
