//! Training instances: chain-pair filtering, interface labels, splits and
//! per-residue feature encoding.

mod embeddings;
mod features;
mod filter;
mod label;
mod split;

pub use embeddings::{load_external_embeddings, EmbeddingTable};
pub use features::{encode_features, FeatureEncoding, FeatureMatrix, FeatureScheme};
pub use filter::{filter_complexes, CandidatePair, Exclusion, ExclusionRule, FilterOutcome, FilterRules};
pub use label::{expand_labels, label_interface, LabeledPair, DEFAULT_CUTOFF};
pub use split::{split_dataset, SplitManifest};

use thiserror::Error;

/// Padded peptide length.
pub const PEPTIDE_PAD: usize = 50;
/// Padded protein length; longer chains are filtered out, never truncated.
pub const PROTEIN_PAD: usize = 500;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{pdb_id}: chain '{chain}' not found")]
    ChainNotFound { pdb_id: String, chain: char },
    #[error("{pdb_id}: chain '{chain}' has no residues")]
    EmptyChain { pdb_id: String, chain: char },
    #[error("{pdb_id}: chain '{chain}' has {len} residues, padding holds {max}")]
    TooLong {
        pdb_id: String,
        chain: char,
        len: usize,
        max: usize,
    },
    #[error("embedding file does not cover residues {missing:?}")]
    Coverage { missing: Vec<usize> },
    #[error("embedding dimension {found} does not match expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
