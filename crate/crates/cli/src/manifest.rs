//! Dataset manifest written by `ingest`.
//!
//! ```text
//! # geopep manifest v1
//! seed 0
//! cutoff 6
//! train_fraction 0.9
//! input <sha256> <file name>
//! structure <pdb_id> <cache path relative to the manifest>
//! pair <instance_id> <pdb_id> <peptide_chain> <protein_chain> <train|val>
//! ```
//!
//! Blank chain ids are written as `_`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use geopep_core::dataset::{label_interface, FeatureEncoding, LabeledPair, load_external_embeddings};
use geopep_core::structio::{read_structure, Complex};
use geopep_core::train::TrainInstance;

use crate::{read_text, CliError};

const MAGIC: &str = "# geopep manifest v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Val,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairEntry {
    pub instance_id: String,
    pub pdb_id: String,
    pub peptide_chain: char,
    pub protein_chain: char,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub seed: u64,
    pub cutoff: f64,
    pub train_fraction: f64,
    /// (sha256, file name)
    pub inputs: Vec<(String, String)>,
    /// pdb_id -> cache path relative to the manifest
    pub structures: BTreeMap<String, String>,
    pub pairs: Vec<PairEntry>,
}

fn enc(c: char) -> char {
    if c == ' ' {
        '_'
    } else {
        c
    }
}

fn dec(s: &str) -> Option<char> {
    let mut it = s.chars();
    let c = it.next()?;
    if it.next().is_some() {
        return None;
    }
    Some(if c == '_' { ' ' } else { c })
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{MAGIC}\nseed {}\ncutoff {}\ntrain_fraction {}\n",
            self.seed, self.cutoff, self.train_fraction
        );
        for (digest, name) in &self.inputs {
            s.push_str(&format!("input {digest} {name}\n"));
        }
        for (id, path) in &self.structures {
            s.push_str(&format!("structure {id} {path}\n"));
        }
        for p in &self.pairs {
            s.push_str(&format!(
                "pair {} {} {} {} {}\n",
                p.instance_id,
                p.pdb_id,
                enc(p.peptide_chain),
                enc(p.protein_chain),
                p.split.as_str()
            ));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => return Err(CliError::Data(format!("manifest: missing '{MAGIC}' header"))),
        }
        let mut m = Manifest::default();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || CliError::Data(format!("manifest line {}: cannot parse '{line}'", i + 1));
            let f: Vec<&str> = line.split_whitespace().collect();
            match (f[0], f.len()) {
                ("seed", 2) => m.seed = f[1].parse().map_err(|_| bad())?,
                ("cutoff", 2) => m.cutoff = f[1].parse().map_err(|_| bad())?,
                ("train_fraction", 2) => m.train_fraction = f[1].parse().map_err(|_| bad())?,
                ("input", n) if n >= 3 => m.inputs.push((f[1].to_string(), f[2..].join(" "))),
                ("structure", 3) => {
                    m.structures.insert(f[1].to_string(), f[2].to_string());
                }
                ("pair", 6) => m.pairs.push(PairEntry {
                    instance_id: f[1].to_string(),
                    pdb_id: f[2].to_string(),
                    peptide_chain: dec(f[3]).ok_or_else(bad)?,
                    protein_chain: dec(f[4]).ok_or_else(bad)?,
                    split: match f[5] {
                        "train" => Split::Train,
                        "val" => Split::Val,
                        _ => return Err(bad()),
                    },
                }),
                _ => return Err(bad()),
            }
        }
        for p in &m.pairs {
            if !m.structures.contains_key(&p.pdb_id) {
                return Err(CliError::Data(format!(
                    "manifest: pair {} refers to unknown structure {}",
                    p.instance_id, p.pdb_id
                )));
            }
        }
        Ok(m)
    }
}

/// A manifest with its structures loaded and pairs labeled.
pub struct Dataset {
    pub manifest: Manifest,
    pub complexes: BTreeMap<String, Complex>,
    /// Parallel to `manifest.pairs`.
    pub pairs: Vec<LabeledPair>,
}

impl Dataset {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let manifest = Manifest::from_text(&read_text(path)?)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut complexes = BTreeMap::new();
        for (id, rel) in &manifest.structures {
            let file = base.join(rel);
            let c = read_structure(&read_text(&file)?).map_err(|e| CliError::Data(format!("{}: {e}", file.display())))?;
            complexes.insert(id.clone(), c);
        }
        let mut pairs = Vec::with_capacity(manifest.pairs.len());
        for p in &manifest.pairs {
            let c = &complexes[&p.pdb_id];
            pairs.push(label_interface(c, p.peptide_chain, p.protein_chain, manifest.cutoff)?);
        }
        Ok(Dataset {
            manifest,
            complexes,
            pairs,
        })
    }

    /// Indices of pairs in `split` (`None` for all).
    pub fn indices(&self, split: Option<Split>) -> Vec<usize> {
        (0..self.pairs.len())
            .filter(|&i| split.map_or(true, |s| self.manifest.pairs[i].split == s))
            .collect()
    }
}

pub fn parse_split(s: &str) -> Option<Split> {
    match s {
        "train" => Some(Split::Train),
        "val" => Some(Split::Val),
        _ => None,
    }
}

/// Feature source for building instances; external embeddings are read
/// from `<dir>/<instance_id>.emb`.
pub enum Features {
    Onehot,
    Physchem,
    External(PathBuf),
}

pub fn build_instance(pair: &LabeledPair, features: &Features) -> Result<TrainInstance, CliError> {
    let inst = match features {
        Features::Onehot => TrainInstance::from_pair(pair, FeatureEncoding::Onehot)?,
        Features::Physchem => TrainInstance::from_pair(pair, FeatureEncoding::Physchem)?,
        Features::External(dir) => {
            let file = dir.join(format!("{}.emb", pair.instance_id()));
            let table = load_external_embeddings(&file).map_err(|e| CliError::Data(format!("{}: {e}", file.display())))?;
            TrainInstance::from_pair(pair, FeatureEncoding::External(&table))?
        }
    };
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut m = Manifest {
            seed: 3,
            cutoff: 6.0,
            train_fraction: 0.9,
            inputs: vec![("ab".repeat(32), "x y.pdb".into())],
            ..Manifest::default()
        };
        m.structures.insert("1ABC".into(), "structures/1ABC.txt".into());
        m.pairs.push(PairEntry {
            instance_id: "1ABC_P__".into(),
            pdb_id: "1ABC".into(),
            peptide_chain: 'P',
            protein_chain: ' ',
            split: Split::Val,
        });
        let text = m.to_text();
        assert!(text.contains("pair 1ABC_P__ 1ABC P _ val\n"));
        assert_eq!(Manifest::from_text(&text).unwrap(), m);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Manifest::from_text("seed 1\n").is_err());
        assert!(Manifest::from_text(&format!("{MAGIC}\nseed x\n")).is_err());
        assert!(Manifest::from_text(&format!("{MAGIC}\npair a B P A train\n")).is_err());
    }
}
