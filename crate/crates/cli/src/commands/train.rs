//! `geopep train`: writes `checkpoint.txt`, `train_log.csv` and
//! `train_report.json` into `--out`.

use serde_json::json;

use geopep_core::dataset::FeatureScheme;
use geopep_core::loss::StructMode;
use geopep_core::model::{save_checkpoint, Mode, StackConfig};
use geopep_core::train::{log_to_csv, train_model, LossMode, TrainConfig, TrainError, TrainInstance};

use crate::config::{parse_widths, RunConfig, Source};
use crate::manifest::{build_instance, Dataset, Features, Split};
use crate::{file_digest, write_json, write_text, CliError};

pub(crate) fn features(config: &RunConfig, scheme: FeatureScheme) -> Result<Features, CliError> {
    Ok(match scheme {
        FeatureScheme::Onehot => Features::Onehot,
        FeatureScheme::Physchem => Features::Physchem,
        FeatureScheme::External => Features::External(
            config
                .opt_path("embeddings")
                .ok_or_else(|| CliError::Usage("the external scheme needs --embeddings".into()))?,
        ),
    })
}

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let manifest_path = config.path("manifest");
    let out = config.path("out");
    let mode = Mode::parse(config.str("mode")).expect("checked choice");
    let scheme = FeatureScheme::parse(config.str("scheme")).expect("checked choice");
    let loss_mode = LossMode::parse(config.str("loss")).expect("checked choice");
    let struct_mode = match config.str("struct_mode") {
        "hard_fp" => StructMode::HardFalsePositive {
            threshold: config.f64("threshold"),
        },
        _ => StructMode::Continuous,
    };
    let seed = config.u64("seed");
    let mut warnings = Vec::new();
    if loss_mode == LossMode::CeOnly && config.source("lambda") != Some(Source::Default) {
        let w = format!(
            "lambda = {} is ignored with loss = ce_only; the distance term is logged but not optimized",
            config.f64("lambda")
        );
        log::warn!("{w}");
        warnings.push(w);
    }
    let tc = TrainConfig {
        epochs: config.usize("epochs"),
        batch_size: config.usize("batch_size"),
        seed,
        lr: config.f64("lr"),
        lambda: config.f64("lambda"),
        loss_mode,
        struct_mode,
        patience: config.usize("patience"),
    };

    let data = Dataset::load(&manifest_path)?;
    let feats = features(config, scheme)?;
    let build = |split| -> Result<Vec<TrainInstance>, CliError> {
        data.indices(Some(split))
            .into_iter()
            .map(|i| build_instance(&data.pairs[i], &feats))
            .collect()
    };
    let train = build(Split::Train)?;
    let val = build(Split::Val)?;
    if train.is_empty() {
        return Err(CliError::Data("manifest has no training pairs".into()));
    }
    let dim = train[0].features.dim;

    let mut sc = StackConfig::new(scheme, dim);
    sc.hidden = parse_widths(config.str("hidden"))?;
    sc.grid_size = config.usize("grid_size");
    sc.degree = config.usize("degree");
    if mode == Mode::Mlp {
        sc = sc.matched_mlp();
    }
    log::info!(
        "training {} with {} parameters on {} pairs ({} validation), seed {seed}",
        mode.as_str(),
        sc.param_count(),
        train.len(),
        val.len()
    );

    std::fs::create_dir_all(&out)?;
    let outcome = match train_model(&sc, &train, &val, &tc) {
        Ok(o) => o,
        Err(TrainError::Diverged {
            epoch,
            instance,
            reason,
            last_good,
        }) => {
            let path = out.join("checkpoint.diverged.txt");
            save_checkpoint(&last_good, &path)?;
            return Err(CliError::Numerical(format!(
                "training diverged at epoch {epoch} on {instance}: {reason}; last good parameters in {}",
                path.display()
            )));
        }
        Err(e) => return Err(e.into()),
    };

    let log_csv = log_to_csv(mode.as_str(), &outcome.log);
    write_text(&out.join("train_log.csv"), &log_csv)?;
    save_checkpoint(&outcome.best, &out.join("checkpoint.txt"))?;
    let last = outcome.log.last().expect("at least one epoch");
    println!(
        "{} seed {seed}: {} epochs, best epoch {}, final loss {:.6}, val auc {}",
        mode.as_str(),
        outcome.log.len(),
        outcome.best_epoch,
        last.total,
        last.val_auc.map(|a| format!("{a:.4}")).unwrap_or_else(|| "n/a".into())
    );
    let report = json!({
        "command": "train",
        "config": config.to_json(),
        "seed": seed,
        "inputs": {"manifest": {"file": manifest_path.display().to_string(), "sha256": file_digest(&manifest_path)?}},
        "mode": mode.as_str(),
        "loss": loss_mode.as_str(),
        "effective_lambda": tc.effective_lambda(),
        "parameters": sc.param_count(),
        "stack": sc,
        "train_pairs": train.len(),
        "val_pairs": val.len(),
        "initial_loss": outcome.initial_loss,
        "epochs_run": outcome.log.len(),
        "best_epoch": outcome.best_epoch,
        "stopped_early": outcome.stopped_early,
        "final": last,
        "warnings": warnings,
    });
    write_json(&out.join("train_report.json"), &report)
}
