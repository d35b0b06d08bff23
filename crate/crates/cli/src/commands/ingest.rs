//! `geopep ingest`: PDB directory -> manifest, labels CSV, structure cache.
//!
//! Writes into `--out`:
//! * `manifest.txt` (see [`crate::manifest`])
//! * `labels.csv`: `instance_id,pdb_id,protein_chain,peptide_chain,res_seq,icode,residue,label`
//! * `split.txt`
//! * `structures/<pdb_id>.txt`
//! * `ingest_report.json`

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde_json::json;

use geopep_core::dataset::{filter_complexes, label_interface, split_dataset, ExclusionRule, FilterRules, LabeledPair};
use geopep_core::structio::{parse_pdb_with_stats, write_structure, Complex};

use crate::config::RunConfig;
use crate::manifest::{Manifest, PairEntry, Split};
use crate::{sha256_hex, write_json, write_text, CliError};

const RULES: [ExclusionRule; 4] = [
    ExclusionRule::Resolution,
    ExclusionRule::PeptideTooShort,
    ExclusionRule::PeptideTooLong,
    ExclusionRule::ProteinTooLong,
];

fn pdb_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "pdb" | "ent"))
        })
        .collect();
    files.sort();
    Ok(files)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Identifier safe for the line-oriented outputs.
fn clean_id(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

fn labels_csv(pairs: &[LabeledPair]) -> String {
    let mut s = String::from("instance_id,pdb_id,protein_chain,peptide_chain,res_seq,icode,residue,label\n");
    let field = |c: char| if c == ' ' { String::new() } else { c.to_string() };
    for p in pairs {
        let id = p.instance_id();
        let seq: Vec<char> = p.protein_seq.chars().collect();
        for (i, k) in p.residue_keys.iter().enumerate() {
            s.push_str(&format!(
                "{id},{},{},{},{},{},{},{}\n",
                p.pdb_id,
                field(p.protein_chain),
                field(p.peptide_chain),
                k.seq_id,
                field(k.insertion_code),
                seq[i],
                p.labels[i]
            ));
        }
    }
    s
}

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let dir = config.path("pdb_dir");
    let out = config.path("out");
    let cutoff = config.f64("cutoff");
    let seed = config.u64("seed");
    let fraction = config.f64("train_fraction");
    if !(cutoff > 0.0) {
        return Err(CliError::Usage(format!("cutoff must be positive, got {cutoff}")));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(CliError::Usage(format!("train_fraction must lie in [0, 1], got {fraction}")));
    }
    let rules = FilterRules {
        max_xray_resolution: config.f64("max_resolution"),
        ..FilterRules::default()
    };

    let files = pdb_files(&dir)?;
    if files.is_empty() {
        return Err(CliError::Data(format!("{}: no .pdb or .ent files", dir.display())));
    }
    let mut complexes: Vec<Complex> = Vec::new();
    let mut inputs = Vec::new();
    let mut failures = Vec::new();
    let mut seen = BTreeSet::new();
    for f in &files {
        let name = file_name(f);
        let bytes = match std::fs::read(f) {
            Ok(b) => b,
            Err(e) => {
                log::warn!("{name}: unreadable, skipped: {e}");
                failures.push(json!({"file": name, "error": e.to_string()}));
                continue;
            }
        };
        let parsed = String::from_utf8(bytes.clone())
            .map_err(|e| e.to_string())
            .and_then(|t| parse_pdb_with_stats(&t).map_err(|e| e.to_string()));
        let (mut c, stats) = match parsed {
            Ok(x) => x,
            Err(e) => {
                log::warn!("{name}: unreadable, skipped: {e}");
                failures.push(json!({"file": name, "error": e}));
                continue;
            }
        };
        log::debug!("{name}: {stats:?}");
        let stem = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut id = clean_id(&c.pdb_id);
        if id == "UNKN" || seen.contains(&id) {
            id = clean_id(&stem);
        }
        if seen.contains(&id) {
            log::warn!("{name}: duplicate entry id {id}, skipped");
            failures.push(json!({"file": name, "error": format!("duplicate entry id {id}")}));
            continue;
        }
        seen.insert(id.clone());
        c.pdb_id = id;
        inputs.push((sha256_hex(&bytes), name));
        complexes.push(c);
    }
    if complexes.is_empty() {
        return Err(CliError::Data(format!("none of the {} files in {} could be read", files.len(), dir.display())));
    }

    let outcome = filter_complexes(&complexes, &rules);
    for e in &outcome.exclusions {
        log::debug!("{} {:?}: excluded by {}", e.pdb_id, e.chains, e.rule.as_str());
    }
    let mut pairs = Vec::new();
    for cand in &outcome.pairs {
        let c = &complexes[cand.complex];
        pairs.push(label_interface(c, cand.peptide_chain, cand.protein_chain, cutoff)?);
    }
    if pairs.is_empty() {
        return Err(CliError::Data("no chain pair passed the filters".into()));
    }

    let ids: Vec<String> = pairs.iter().map(|p| p.instance_id()).collect();
    let split = split_dataset(&ids, seed, fraction);
    let val: BTreeSet<&String> = split.val_ids.iter().collect();
    let used: BTreeSet<&str> = pairs.iter().map(|p| p.pdb_id.as_str()).collect();

    let mut manifest = Manifest {
        seed,
        cutoff,
        train_fraction: fraction,
        inputs,
        ..Manifest::default()
    };
    std::fs::create_dir_all(out.join("structures"))?;
    for c in &complexes {
        if used.contains(c.pdb_id.as_str()) {
            let rel = format!("structures/{}.txt", c.pdb_id);
            write_text(&out.join(&rel), &write_structure(c))?;
            manifest.structures.insert(c.pdb_id.clone(), rel);
        }
    }
    for p in &pairs {
        let id = p.instance_id();
        manifest.pairs.push(PairEntry {
            split: if val.contains(&id) { Split::Val } else { Split::Train },
            instance_id: id,
            pdb_id: p.pdb_id.clone(),
            peptide_chain: p.peptide_chain,
            protein_chain: p.protein_chain,
        });
    }
    let manifest_text = manifest.to_text();
    write_text(&out.join("manifest.txt"), &manifest_text)?;
    write_text(&out.join("labels.csv"), &labels_csv(&pairs))?;
    write_text(&out.join("split.txt"), &split.to_text())?;

    let counts = outcome.exclusion_counts();
    let by_rule: BTreeMap<&str, usize> = RULES
        .iter()
        .map(|r| (r.as_str(), counts.get(r).copied().unwrap_or(0)))
        .collect();
    println!("read {} of {} files (seed {seed})", complexes.len(), files.len());
    println!("excluded unreadable: {}", failures.len());
    for (rule, n) in &by_rule {
        println!("excluded {rule}: {n}");
    }
    println!(
        "pairs {} (train {}, val {})",
        pairs.len(),
        split.train_ids.len(),
        split.val_ids.len()
    );

    let report = json!({
        "config": config.to_json(),
        "seed": seed,
        "inputs": manifest.inputs.iter().map(|(d, n)| json!({"file": n, "sha256": d})).collect::<Vec<_>>(),
        "manifest_sha256": sha256_hex(manifest_text.as_bytes()),
        "unreadable": failures,
        "exclusions": by_rule,
        "pairs": pairs.len(),
        "train": split.train_ids.len(),
        "val": split.val_ids.len(),
        "interface_residues": pairs.iter().map(|p| p.interface_count()).sum::<usize>(),
    });
    write_json(&out.join("ingest_report.json"), &report)
}
