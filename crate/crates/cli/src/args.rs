use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "geopep", version, about = "Peptide binding-site prediction on protein structures")]
pub struct Cli {
    /// TOML file with one table per subcommand; flags override it
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, filter, label and split a directory of PDB files
    Ingest(IngestArgs),
    /// Train a KAN (or MLP baseline) on an ingested dataset
    Train(TrainArgs),
    /// Write per-residue binding probabilities
    Predict(PredictArgs),
    /// Score one or more prediction files
    Evaluate(EvaluateArgs),
    /// Finite-difference check of the analytic gradients
    Gradcheck(GradcheckArgs),
    /// Summarize JSON outputs of other commands as markdown
    Report(ReportArgs),
}

macro_rules! flags {
    ($args:ident; $($field:ident),* $(,)?) => {{
        let mut v: Vec<(&'static str, Value)> = Vec::new();
        $(
            if let Some(x) = &$args.$field {
                v.push((stringify!($field), serde_json::to_value(x).expect("flag values serialize")));
            }
        )*
        v
    }};
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Evaluate(_) => "evaluate",
            Command::Gradcheck(_) => "gradcheck",
            Command::Report(_) => "report",
        }
    }

    /// Flags given on the command line, keyed like the config file.
    pub fn flags(&self) -> Vec<(&'static str, Value)> {
        match self {
            Command::Ingest(a) => flags!(a; pdb_dir, out, cutoff, seed, train_fraction, max_resolution),
            Command::Train(a) => flags!(a;
                manifest, out, mode, scheme, embeddings, loss, struct_mode, threshold, lambda,
                epochs, lr, batch_size, patience, seed, hidden, grid_size, degree),
            Command::Predict(a) => flags!(a; checkpoint, manifest, out, split, embeddings),
            Command::Evaluate(a) => {
                let mut v = flags!(a; names, manifest, out, threshold, window, n_boot, seed);
                if !a.predictions.is_empty() {
                    v.push(("predictions", json!(a.predictions)));
                }
                if a.no_rsa {
                    v.push(("rsa", json!(false)));
                }
                if a.svg {
                    v.push(("svg", json!(true)));
                }
                v
            }
            Command::Gradcheck(a) => flags!(a; mode, seed, seeds, residues, dim, hidden, grid_size, lambda, tolerance, out),
            Command::Report(a) => {
                let mut v = flags!(a; out);
                if !a.inputs.is_empty() {
                    v.push(("inputs", json!(a.inputs)));
                }
                v
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Directory of .pdb/.ent files
    #[arg(long)]
    pub pdb_dir: Option<PathBuf>,
    /// Output directory for the manifest, labels and structure cache
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Contact cutoff in Å [default: 6.0]
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Split seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// [default: 0.9]
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// X-ray resolution limit in Å [default: 2.5]
    #[arg(long)]
    pub max_resolution: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// manifest.txt written by ingest
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory for checkpoint, log and report
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// kan | mlp [default: kan]
    #[arg(long)]
    pub mode: Option<String>,
    /// onehot | physchem | external [default: onehot]
    #[arg(long)]
    pub scheme: Option<String>,
    /// Directory of <instance_id>.emb files for the external scheme
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// composite | ce_only [default: composite]
    #[arg(long)]
    pub loss: Option<String>,
    /// continuous | hard_fp [default: continuous]
    #[arg(long)]
    pub struct_mode: Option<String>,
    /// Probability cutoff for hard_fp [default: 0.8]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Weight of the distance term [default: 0.5]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// [default: 100]
    #[arg(long)]
    pub epochs: Option<u64>,
    /// Adam learning rate [default: 0.001]
    #[arg(long)]
    pub lr: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    pub batch_size: Option<u64>,
    /// Early-stopping patience in epochs [default: 20]
    #[arg(long)]
    pub patience: Option<u64>,
    /// Initialization and shuffling seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Hidden widths, comma-separated [default: 64,64]
    #[arg(long)]
    pub hidden: Option<String>,
    /// Spline intervals [default: 8]
    #[arg(long)]
    pub grid_size: Option<u64>,
    /// Spline degree [default: 3]
    #[arg(long)]
    pub degree: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Predictions CSV to write
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// all | train | val [default: all]
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Prediction CSV; repeat to compare methods side by side
    #[arg(long = "predictions", value_name = "CSV")]
    pub predictions: Vec<PathBuf>,
    /// Method names, comma-separated, in the order of --predictions
    #[arg(long)]
    pub names: Option<String>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// [default: 0.8]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Label relaxation window; 0 is strict [default: 0]
    #[arg(long)]
    pub window: Option<u64>,
    /// Bootstrap resamples [default: 10000]
    #[arg(long)]
    pub n_boot: Option<u64>,
    /// Bootstrap seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip the solvent-accessibility analysis
    #[arg(long)]
    pub no_rsa: bool,
    /// Also write SVG plots
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// kan | mlp | both [default: both]
    #[arg(long)]
    pub mode: Option<String>,
    /// First seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of consecutive seeds [default: 20]
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Residues per random instance [default: 12]
    #[arg(long)]
    pub residues: Option<u64>,
    /// Feature width [default: 3]
    #[arg(long)]
    pub dim: Option<u64>,
    /// [default: 4,4]
    #[arg(long)]
    pub hidden: Option<String>,
    /// [default: 5]
    #[arg(long)]
    pub grid_size: Option<u64>,
    /// [default: 0.5]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Maximum relative error [default: 1e-5]
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// JSON report path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON outputs of train, evaluate or gradcheck
    #[arg(long = "input", value_name = "JSON")]
    pub inputs: Vec<PathBuf>,
    /// Markdown file to write
    #[arg(long)]
    pub out: Option<PathBuf>,
}
