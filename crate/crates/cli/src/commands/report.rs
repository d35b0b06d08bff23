//! `geopep report`: markdown summary of `train_report.json`,
//! `metrics.json` and gradcheck JSON files.

use std::fmt::Write as _;

use serde_json::Value;

use crate::config::RunConfig;
use crate::{read_text, sha256_hex, write_text, CliError};

fn num(v: &Value) -> String {
    match v.as_f64() {
        Some(x) if x.fract() == 0.0 && x.abs() < 1e15 => format!("{x}"),
        Some(x) => format!("{x:.4}"),
        None if v.is_null() => "-".into(),
        None => v.to_string(),
    }
}

fn config_lines(s: &mut String, doc: &Value) {
    if let Some(values) = doc["config"]["values"].as_object() {
        for (k, e) in values {
            writeln!(s, "- `{k}` = {} ({})", e["value"], e["source"].as_str().unwrap_or("?")).unwrap();
        }
    }
    if let Some(inputs) = doc["inputs"].as_array() {
        for i in inputs {
            writeln!(s, "- input `{}` sha256 `{}`", i["file"].as_str().unwrap_or("?"), i["sha256"].as_str().unwrap_or("?")).unwrap();
        }
    } else if let Some(m) = doc["inputs"]["manifest"].as_object() {
        writeln!(s, "- input `{}` sha256 `{}`", m["file"].as_str().unwrap_or("?"), m["sha256"].as_str().unwrap_or("?")).unwrap();
    }
}

fn evaluate_section(s: &mut String, doc: &Value) {
    if doc["relaxed"].as_bool() == Some(true) {
        writeln!(s, "Labels relaxed with window {}.\n", doc["window"]).unwrap();
    }
    s.push_str("| method | complexes | precision | recall | F1 | ROC AUC | PR AUC | TPVR | distance loss | ΔRSA p |\n");
    s.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    for m in doc["methods"].as_array().into_iter().flatten() {
        writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            m["method"].as_str().unwrap_or("?"),
            num(&m["n_complexes"]),
            num(&m["pooled"]["precision"]),
            num(&m["pooled"]["recall"]),
            num(&m["pooled"]["f1"]),
            num(&m["roc_auc"]),
            num(&m["pr_auc"]),
            num(&m["tpvr_mean"]),
            num(&m["distance_loss_raw_mean"]),
            num(&m["delta_rsa"]["p_value"]),
        )
        .unwrap();
    }
}

fn train_section(s: &mut String, doc: &Value) {
    s.push_str("| mode | parameters | epochs | best epoch | initial loss | final loss | val AUC |\n");
    s.push_str("|---|---|---|---|---|---|---|\n");
    writeln!(
        s,
        "| {} | {} | {} | {} | {} | {} | {} |",
        doc["mode"].as_str().unwrap_or("?"),
        num(&doc["parameters"]),
        num(&doc["epochs_run"]),
        num(&doc["best_epoch"]),
        num(&doc["initial_loss"]),
        num(&doc["final"]["total"]),
        num(&doc["final"]["val_auc"]),
    )
    .unwrap();
    for w in doc["warnings"].as_array().into_iter().flatten() {
        writeln!(s, "\nWarning: {}", w.as_str().unwrap_or("")).unwrap();
    }
}

fn gradcheck_section(s: &mut String, doc: &Value) {
    writeln!(
        s,
        "{} checks, worst relative error {:.3e} against tolerance {:e}: {}.",
        doc["runs"].as_array().map_or(0, Vec::len),
        doc["max_rel_error"].as_f64().unwrap_or(f64::NAN),
        doc["tolerance"].as_f64().unwrap_or(f64::NAN),
        if doc["passed"].as_bool() == Some(true) { "passed" } else { "failed" }
    )
    .unwrap();
}

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let mut s = String::from("# geopep report\n");
    for path in config.paths("inputs") {
        let text = read_text(&path)?;
        let doc: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let command = doc["command"]
            .as_str()
            .or_else(|| doc["config"]["command"].as_str())
            .unwrap_or("");
        writeln!(s, "\n## {} ({command})\n", path.display()).unwrap();
        writeln!(s, "sha256 `{}`, seed {}\n", sha256_hex(text.as_bytes()), doc["seed"]).unwrap();
        match command {
            "evaluate" => evaluate_section(&mut s, &doc),
            "train" => train_section(&mut s, &doc),
            "gradcheck" => gradcheck_section(&mut s, &doc),
            _ => {
                return Err(CliError::Data(format!(
                    "{}: not a train, evaluate or gradcheck output",
                    path.display()
                )))
            }
        }
        s.push_str("\n<details><summary>resolved config</summary>\n\n");
        config_lines(&mut s, &doc);
        s.push_str("\n</details>\n");
    }
    write_text(&config.path("out"), &s)?;
    println!("wrote {}", config.path("out").display());
    Ok(())
}
