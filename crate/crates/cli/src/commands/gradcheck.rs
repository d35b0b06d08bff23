//! `geopep gradcheck`: analytic versus finite-difference gradients of the
//! composite loss on random small instances, one per seed.

use std::time::Instant;

use serde_json::json;

use geopep_core::dataset::FeatureScheme;
use geopep_core::model::{KanStack, Mode, StackConfig};
use geopep_core::train::{gradient_check, random_instance};

use crate::config::{parse_widths, RunConfig};
use crate::{write_json, CliError};

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let modes: Vec<Mode> = match config.str("mode") {
        "both" => vec![Mode::Kan, Mode::Mlp],
        m => vec![Mode::parse(m).expect("checked choice")],
    };
    let first = config.u64("seed");
    let n_seeds = config.u64("seeds");
    let residues = config.usize("residues");
    let dim = config.usize("dim");
    let lambda = config.f64("lambda");
    let tolerance = config.f64("tolerance");
    if residues == 0 || residues > geopep_core::dataset::PROTEIN_PAD || dim == 0 {
        return Err(CliError::Usage("residues and dim must be positive (residues at most 500)".into()));
    }
    let mut kan = StackConfig::new(FeatureScheme::External, dim);
    kan.hidden = parse_widths(config.str("hidden"))?;
    kan.grid_size = config.usize("grid_size");

    let start = Instant::now();
    let mut runs = Vec::new();
    let mut worst: f64 = 0.0;
    for &mode in &modes {
        let sc = if mode == Mode::Mlp { kan.matched_mlp() } else { kan.clone() };
        for seed in first..first + n_seeds {
            let mut stack = KanStack::new(sc.clone())?;
            stack.init_params(seed);
            let inst = random_instance(seed, residues, dim);
            let r = gradient_check(&stack, &inst, lambda, tolerance)?;
            println!(
                "{} seed {seed}: max relative error {:.3e} {}",
                mode.as_str(),
                r.max_rel_error,
                if r.passed { "ok" } else { "FAIL" }
            );
            worst = worst.max(r.max_rel_error);
            runs.push(json!({"mode": mode.as_str(), "seed": seed, "report": r}));
        }
    }
    let passed = worst < tolerance;
    println!(
        "{} checks, worst relative error {worst:.3e}, tolerance {tolerance:e}: {}",
        runs.len(),
        if passed { "passed" } else { "failed" }
    );
    log::info!("gradient checks took {:.1?}", start.elapsed());
    if let Some(out) = config.opt_path("out") {
        write_json(
            &out,
            &json!({
                "command": "gradcheck",
                "config": config.to_json(),
                "seed": first,
                "tolerance": tolerance,
                "max_rel_error": worst,
                "passed": passed,
                "runs": runs,
            }),
        )?;
    }
    if passed {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "worst relative gradient error {worst:.3e} exceeds {tolerance:e}"
        )))
    }
}
