//! `geopep evaluate`: scores prediction files against the manifest labels.
//!
//! Writes into `--out`:
//! * `metrics.json`: full report per method
//! * `summary.csv`: one row per method, side by side
//! * `complexes.csv`: per-complex metrics per method
//! * `curves.csv`: ROC and PR points per method
//! * `recall_ratio.csv`: mean recall per interface-ratio bin
//! * `roc.svg`, `pr.svg`, `recall_ratio.svg` with `--svg`

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;

use geopep_core::dataset::LabeledPair;
use geopep_core::metrics::{delta_rsa_default, evaluate_method, EvalInstance, EvalOptions, MethodReport};
use geopep_core::structio::{read_predictions, PredictionKey, PredictionTable};

use crate::config::RunConfig;
use crate::manifest::Dataset;
use crate::svg::line_chart;
use crate::{file_digest, read_text, write_json, write_text, CliError};

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn method_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "method".into())
}

/// Padded probabilities for `pair`, or `None` if the table has none of its
/// residues. A partially covered pair is an error.
fn pair_probs(table: &PredictionTable, pair: &LabeledPair, origin: &str) -> Result<Option<Vec<f64>>, CliError> {
    let mut probs = vec![0.0; pair.labels.len()];
    let mut found = 0;
    let mut missing = Vec::new();
    for (i, k) in pair.residue_keys.iter().enumerate() {
        let key = PredictionKey {
            pdb_id: pair.pdb_id.clone(),
            protein_chain: pair.protein_chain,
            peptide_chain: pair.peptide_chain,
            res_seq: k.seq_id,
            icode: k.insertion_code,
        };
        match table.get(&key) {
            Some(row) => {
                probs[i] = row.probability;
                found += 1;
            }
            None => missing.push(format!("{}{}", k.seq_id, k.insertion_code).trim().to_string()),
        }
    }
    if found == 0 {
        return Ok(None);
    }
    if !missing.is_empty() {
        return Err(CliError::Data(format!(
            "{origin}: {} has no prediction for residues {}",
            pair.instance_id(),
            missing.join(" ")
        )));
    }
    Ok(Some(probs))
}

fn summary_csv(reports: &[MethodReport]) -> String {
    let mut s = String::from(
        "method,window,relaxed,threshold,complexes,tp,fp,fn,tn,precision,recall,f1,accuracy,roc_auc,pr_auc,\
tpvr_mean,tpvr_defined,distance_loss_raw,distance_loss_thresholded,delta_rsa_diff_median,delta_rsa_p\n",
    );
    for r in reports {
        let c = &r.pooled.counts;
        let rsa = r.delta_rsa.as_ref();
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{},{},{},{}",
            r.method,
            r.window,
            r.relaxed,
            r.threshold,
            r.n_complexes,
            c.tp,
            c.fp,
            c.fn_,
            c.tn,
            r.pooled.precision,
            r.pooled.recall,
            r.pooled.f1,
            r.pooled.accuracy,
            opt(r.roc_auc),
            opt(r.pr_auc),
            opt(r.tpvr_mean),
            r.tpvr_defined,
            opt(r.distance_loss_raw_mean),
            opt(r.distance_loss_thresholded_mean),
            opt(rsa.map(|d| d.diff_median)),
            opt(rsa.map(|d| d.p_value)),
        )
        .unwrap();
    }
    s
}

fn complexes_csv(reports: &[MethodReport]) -> String {
    let mut s = String::from(
        "method,instance_id,residues,interface,precision,recall,f1,roc_auc,tpvr,distance_loss_raw,\
distance_loss_thresholded,interface_ratio,delta_rsa_pos_mean,delta_rsa_neg_mean\n",
    );
    for r in reports {
        for c in &r.complexes {
            writeln!(
                s,
                "{},{},{},{},{:.6},{:.6},{:.6},{},{},{},{},{:.6},{},{}",
                r.method,
                c.id,
                c.n_residues,
                c.n_interface,
                c.metrics.precision,
                c.metrics.recall,
                c.metrics.f1,
                opt(c.auc),
                opt(c.tpvr),
                opt(c.distance_loss_raw),
                opt(c.distance_loss_thresholded),
                c.interface_ratio,
                opt(c.delta_rsa_pos_mean),
                opt(c.delta_rsa_neg_mean),
            )
            .unwrap();
        }
    }
    s
}

fn curves_csv(reports: &[MethodReport]) -> String {
    let mut s = String::from("method,curve,threshold,x,y\n");
    for r in reports {
        for (name, curve) in [("roc", &r.roc), ("pr", &r.pr)] {
            if let Some(c) = curve {
                for i in 0..c.xs.len() {
                    writeln!(s, "{},{name},{},{},{}", r.method, c.thresholds[i], c.xs[i], c.ys[i]).unwrap();
                }
            }
        }
    }
    s
}

fn recall_csv(reports: &[MethodReport]) -> String {
    let mut s = String::from("method,ratio_lo,ratio_hi,mean_recall,complexes\n");
    for r in reports {
        for b in &r.recall_bins {
            writeln!(s, "{},{:.2},{:.2},{:.6},{}", r.method, b.lo, b.hi, b.mean_recall, b.count).unwrap();
        }
    }
    s
}

fn print_table(reports: &[MethodReport]) {
    println!(
        "{:<20} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "method", "precision", "recall", "f1", "roc_auc", "pr_auc", "tpvr", "dist"
    );
    let f = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
    for r in reports {
        println!(
            "{:<20} {:>9.4} {:>9.4} {:>9.4} {:>9} {:>9} {:>9} {:>9}",
            r.method,
            r.pooled.precision,
            r.pooled.recall,
            r.pooled.f1,
            f(r.roc_auc),
            f(r.pr_auc),
            f(r.tpvr_mean),
            f(r.distance_loss_raw_mean)
        );
    }
}

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let files = config.paths("predictions");
    let names: Vec<String> = match config.opt_str("names") {
        Some(n) => n.split(',').map(|s| s.trim().to_string()).collect(),
        None => files.iter().map(|p| method_name(p)).collect(),
    };
    if names.len() != files.len() {
        return Err(CliError::Usage(format!(
            "{} names for {} prediction files",
            names.len(),
            files.len()
        )));
    }
    let threshold = config.f64("threshold");
    if !(0.0..=1.0).contains(&threshold) {
        return Err(CliError::Usage(format!("threshold must lie in [0, 1], got {threshold}")));
    }
    let options = EvalOptions {
        threshold,
        window: config.usize("window"),
        n_boot: config.usize("n_boot"),
        seed: config.u64("seed"),
    };
    let manifest_path = config.path("manifest");
    let data = Dataset::load(&manifest_path)?;

    let mut tables = Vec::new();
    let mut digests = vec![json!({"file": manifest_path.display().to_string(), "sha256": file_digest(&manifest_path)?})];
    for f in &files {
        let origin = f.display().to_string();
        let table = read_predictions(&read_text(f)?).map_err(|e| CliError::Data(format!("{origin}: {e}")))?;
        digests.push(json!({"file": origin, "sha256": file_digest(f)?}));
        let mut per_pair = BTreeMap::new();
        for (i, pair) in data.pairs.iter().enumerate() {
            if let Some(p) = pair_probs(&table, pair, &origin)? {
                per_pair.insert(i, p);
            }
        }
        let covered: usize = per_pair.keys().map(|&i| data.pairs[i].len()).sum();
        if per_pair.is_empty() {
            return Err(CliError::Data(format!("{origin}: no rows match any manifest pair")));
        }
        if covered < table.len() {
            log::warn!("{origin}: {} rows match no manifest pair", table.len() - covered);
        }
        tables.push(per_pair);
    }

    let mut rsa: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    if config.bool("rsa") {
        let wanted: std::collections::BTreeSet<usize> = tables.iter().flat_map(|t| t.keys().copied()).collect();
        for i in wanted {
            let entry = &data.manifest.pairs[i];
            let complex = &data.complexes[&entry.pdb_id];
            match delta_rsa_default(complex, entry.peptide_chain, entry.protein_chain) {
                Ok(d) => {
                    rsa.insert(i, d.iter().map(|e| e.delta).collect());
                }
                Err(e) => log::warn!("{}: no ΔRSA: {e}", entry.instance_id),
            }
        }
    }

    let mut reports = Vec::new();
    for (name, per_pair) in names.iter().zip(&tables) {
        let instances: Vec<EvalInstance> = per_pair
            .iter()
            .map(|(&i, p)| EvalInstance {
                pair: &data.pairs[i],
                probs: p.clone(),
                delta_rsa: rsa.get(&i).cloned(),
            })
            .collect();
        let r = evaluate_method(name, &instances, &options)?;
        reports.push(r);
    }

    if options.window > 0 {
        println!("labels relaxed with window {} (relaxed metrics)", options.window);
    }
    print_table(&reports);

    let out = config.path("out");
    write_json(
        &out.join("metrics.json"),
        &json!({
            "command": "evaluate",
            "config": config.to_json(),
            "seed": options.seed,
            "relaxed": options.window > 0,
            "window": options.window,
            "inputs": digests,
            "methods": reports,
        }),
    )?;
    write_text(&out.join("summary.csv"), &summary_csv(&reports))?;
    write_text(&out.join("complexes.csv"), &complexes_csv(&reports))?;
    write_text(&out.join("curves.csv"), &curves_csv(&reports))?;
    write_text(&out.join("recall_ratio.csv"), &recall_csv(&reports))?;
    if config.bool("svg") {
        let series = |f: &dyn Fn(&MethodReport) -> Option<Vec<(f64, f64)>>| -> Vec<(String, Vec<(f64, f64)>)> {
            reports.iter().filter_map(|r| f(r).map(|pts| (r.method.clone(), pts))).collect()
        };
        let pts = |c: &geopep_core::metrics::CurvePoints| c.xs.iter().copied().zip(c.ys.iter().copied()).collect();
        let suffix = if options.window > 0 { format!(" (window {})", options.window) } else { String::new() };
        write_text(
            &out.join("roc.svg"),
            &line_chart(&format!("ROC{suffix}"), "false positive rate", "true positive rate", &series(&|r| r.roc.as_ref().map(pts))),
        )?;
        write_text(
            &out.join("pr.svg"),
            &line_chart(&format!("Precision-recall{suffix}"), "recall", "precision", &series(&|r| r.pr.as_ref().map(pts))),
        )?;
        write_text(
            &out.join("recall_ratio.svg"),
            &line_chart(
                &format!("Recall by interface ratio{suffix}"),
                "interface ratio",
                "mean recall",
                &series(&|r| Some(r.recall_bins.iter().map(|b| ((b.lo + b.hi) / 2.0, b.mean_recall)).collect())),
            ),
        )?;
    }
    Ok(())
}
