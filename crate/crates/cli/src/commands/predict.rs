//! `geopep predict`: one CSV row per real protein residue.

use geopep_core::model::load_checkpoint;
use geopep_core::structio::write_predictions;

use crate::commands::train::features;
use crate::config::RunConfig;
use crate::manifest::{build_instance, parse_split, Dataset};
use crate::{write_text, CliError};

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let ckpt = config.path("checkpoint");
    if !ckpt.is_file() {
        return Err(CliError::Data(format!("{}: checkpoint not found", ckpt.display())));
    }
    let stack = load_checkpoint(&ckpt).map_err(|e| CliError::Data(format!("{}: {e}", ckpt.display())))?;
    let data = Dataset::load(&config.path("manifest"))?;
    let feats = features(config, stack.config.scheme)?;
    let idx = data.indices(parse_split(config.str("split")));

    let mut probs = Vec::with_capacity(idx.len());
    for &i in &idx {
        let pair = &data.pairs[i];
        let inst = build_instance(pair, &feats)?;
        if inst.features.dim != stack.config.feature_dim {
            return Err(CliError::Data(format!(
                "{}: feature width {} does not match checkpoint ({})",
                pair.instance_id(),
                inst.features.dim,
                stack.config.feature_dim
            )));
        }
        let p = stack.predict(&inst.features, &inst.mask)?;
        if let Some(bad) = p.iter().find(|v| !v.is_finite()) {
            return Err(CliError::Numerical(format!("{}: non-finite probability {bad}", pair.instance_id())));
        }
        probs.push(p[..pair.len()].to_vec());
    }
    let rows: Vec<_> = idx.iter().zip(&probs).map(|(&i, p)| (&data.pairs[i], p.as_slice())).collect();
    let csv = write_predictions(&rows)?;
    write_text(&config.path("out"), &csv)?;
    println!(
        "{} pairs, {} residues -> {}",
        idx.len(),
        probs.iter().map(Vec::len).sum::<usize>(),
        config.path("out").display()
    );
    Ok(())
}
