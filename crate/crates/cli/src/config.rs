//! Run configuration resolved from defaults, an optional TOML file and
//! command-line flags, in that order of precedence.
//!
//! The config file holds one table per subcommand:
//!
//! ```toml
//! [ingest]
//! cutoff = 6.0
//! seed = 3
//!
//! [train]
//! mode = "mlp"
//! hidden = "32,32"
//! ```
//!
//! Keys are the long flag names with `-` replaced by `_`. Unknown tables and
//! unknown keys are rejected. Relative paths are taken relative to the
//! working directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Default,
    ConfigFile,
    Flag,
}

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Str,
    Path,
    Float,
    /// Non-negative integer.
    Int,
    Bool,
    PathList,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    /// `None` with `required` unset means the key is optional.
    pub default: Option<Value>,
    pub required: bool,
}

fn key(name: &'static str, kind: Kind, default: Value) -> KeySpec {
    KeySpec {
        name,
        kind,
        default: Some(default),
        required: false,
    }
}

fn required(name: &'static str, kind: Kind) -> KeySpec {
    KeySpec {
        name,
        kind,
        default: None,
        required: true,
    }
}

fn optional(name: &'static str, kind: Kind) -> KeySpec {
    KeySpec {
        name,
        kind,
        default: None,
        required: false,
    }
}

pub const COMMANDS: [&str; 6] = ["ingest", "train", "predict", "evaluate", "gradcheck", "report"];

const MODES: &[&str] = &["kan", "mlp"];
const SCHEMES: &[&str] = &["onehot", "physchem", "external"];
const SPLITS: &[&str] = &["all", "train", "val"];

/// Accepted keys for each subcommand.
pub fn schema(command: &str) -> Vec<KeySpec> {
    use Kind::*;
    match command {
        "ingest" => vec![
            required("pdb_dir", Path),
            required("out", Path),
            key("cutoff", Float, json!(6.0)),
            key("seed", Int, json!(0)),
            key("train_fraction", Float, json!(0.9)),
            key("max_resolution", Float, json!(2.5)),
        ],
        "train" => vec![
            required("manifest", Path),
            required("out", Path),
            key("mode", Choice(MODES), json!("kan")),
            key("scheme", Choice(SCHEMES), json!("onehot")),
            optional("embeddings", Path),
            key("loss", Choice(&["composite", "ce_only"]), json!("composite")),
            key("struct_mode", Choice(&["continuous", "hard_fp"]), json!("continuous")),
            key("threshold", Float, json!(0.8)),
            key("lambda", Float, json!(0.5)),
            key("epochs", Int, json!(100)),
            key("lr", Float, json!(1e-3)),
            key("batch_size", Int, json!(1)),
            key("patience", Int, json!(20)),
            key("seed", Int, json!(0)),
            key("hidden", Str, json!("64,64")),
            key("grid_size", Int, json!(8)),
            key("degree", Int, json!(3)),
        ],
        "predict" => vec![
            required("checkpoint", Path),
            required("manifest", Path),
            required("out", Path),
            key("split", Choice(SPLITS), json!("all")),
            optional("embeddings", Path),
        ],
        "evaluate" => vec![
            required("predictions", PathList),
            optional("names", Str),
            required("manifest", Path),
            required("out", Path),
            key("threshold", Float, json!(0.8)),
            key("window", Int, json!(0)),
            key("n_boot", Int, json!(10_000)),
            key("seed", Int, json!(0)),
            key("rsa", Bool, json!(true)),
            key("svg", Bool, json!(false)),
        ],
        "gradcheck" => vec![
            key("mode", Choice(&["kan", "mlp", "both"]), json!("both")),
            key("seed", Int, json!(0)),
            key("seeds", Int, json!(20)),
            key("residues", Int, json!(12)),
            key("dim", Int, json!(3)),
            key("hidden", Str, json!("4,4")),
            key("grid_size", Int, json!(5)),
            key("lambda", Float, json!(0.5)),
            key("tolerance", Float, json!(1e-5)),
            optional("out", Path),
        ],
        "report" => vec![required("inputs", PathList), required("out", Path)],
        _ => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub value: Value,
    pub source: Source,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    entries: BTreeMap<String, Entry>,
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

/// Checks `value` against `kind`, normalizing integers given for floats.
fn check(spec: &KeySpec, value: Value, origin: &str) -> Result<Value, CliError> {
    let bad = |what: &str| usage(format!("{origin}: '{}' expects {what}, got {value}", spec.name));
    let ok = match spec.kind {
        Kind::Str | Kind::Path => value.is_string(),
        Kind::Float => {
            return match value.as_f64() {
                Some(v) if v.is_finite() => Ok(json!(v)),
                _ => Err(bad("a finite number")),
            }
        }
        Kind::Int => value.is_u64(),
        Kind::Bool => value.is_boolean(),
        Kind::PathList => value
            .as_array()
            .is_some_and(|a| !a.is_empty() && a.iter().all(Value::is_string)),
        Kind::Choice(options) => {
            return match value.as_str() {
                Some(s) if options.contains(&s) => Ok(value),
                _ => Err(bad(&format!("one of {}", options.join("|")))),
            }
        }
    };
    if !ok {
        let what = match spec.kind {
            Kind::Str => "a string",
            Kind::Path => "a path",
            Kind::Int => "a non-negative integer",
            Kind::Bool => "true or false",
            _ => "a non-empty list of paths",
        };
        return Err(bad(what));
    }
    Ok(value)
}

/// Parses a config file and checks every table against its schema.
/// Returns the entries for `command`.
pub fn parse_config_file(text: &str, origin: &str, command: &str) -> Result<Vec<(String, Value)>, CliError> {
    let doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| usage(format!("{origin}: {}", e.message())))?;
    let mut mine = Vec::new();
    for (table, body) in &doc {
        if !COMMANDS.contains(&table.as_str()) {
            return Err(usage(format!(
                "{origin}: unknown section '{table}' (expected one of {})",
                COMMANDS.join(", ")
            )));
        }
        let body = body
            .as_table()
            .ok_or_else(|| usage(format!("{origin}: '{table}' must be a table")))?;
        let specs = schema(table);
        for (k, v) in body {
            let spec = specs
                .iter()
                .find(|s| s.name == k)
                .ok_or_else(|| usage(format!("{origin}: unknown key '{k}' in [{table}]")))?;
            let v = serde_json::to_value(v).map_err(|e| usage(format!("{origin}: {e}")))?;
            let v = check(spec, v, origin)?;
            if table == command {
                mine.push((k.clone(), v));
            }
        }
    }
    Ok(mine)
}

impl RunConfig {
    /// Layers `file` entries and then `flags` over the defaults of `command`.
    pub fn resolve(command: &str, file: &[(String, Value)], flags: &[(&str, Value)]) -> Result<Self, CliError> {
        let specs = schema(command);
        if specs.is_empty() {
            return Err(usage(format!("unknown command '{command}'")));
        }
        let mut entries = BTreeMap::new();
        for s in &specs {
            if let Some(d) = &s.default {
                entries.insert(
                    s.name.to_string(),
                    Entry {
                        value: d.clone(),
                        source: Source::Default,
                    },
                );
            }
        }
        let layers = file
            .iter()
            .map(|(k, v)| (k.as_str(), v, Source::ConfigFile))
            .chain(flags.iter().map(|(k, v)| (*k, v, Source::Flag)));
        for (k, v, source) in layers {
            let spec = specs
                .iter()
                .find(|s| s.name == k)
                .ok_or_else(|| usage(format!("unknown key '{k}' for {command}")))?;
            let origin = if source == Source::Flag { "flag" } else { "config file" };
            let value = check(spec, v.clone(), origin)?;
            entries.insert(k.to_string(), Entry { value, source });
        }
        for s in &specs {
            if s.required && !entries.contains_key(s.name) {
                return Err(usage(format!("{command}: missing required '{}'", s.name.replace('_', "-"))));
            }
        }
        Ok(RunConfig {
            command: command.to_string(),
            entries,
        })
    }

    pub fn entry(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    pub fn source(&self, key: &str) -> Option<Source> {
        self.entries.get(key).map(|e| e.source)
    }

    fn value(&self, key: &str) -> &Value {
        &self
            .entries
            .get(key)
            .unwrap_or_else(|| panic!("config key '{key}' has no value"))
            .value
    }

    pub fn f64(&self, key: &str) -> f64 {
        self.value(key).as_f64().expect("checked float")
    }

    pub fn u64(&self, key: &str) -> u64 {
        self.value(key).as_u64().expect("checked integer")
    }

    pub fn usize(&self, key: &str) -> usize {
        self.u64(key) as usize
    }

    pub fn bool(&self, key: &str) -> bool {
        self.value(key).as_bool().expect("checked bool")
    }

    pub fn str(&self, key: &str) -> &str {
        self.value(key).as_str().expect("checked string")
    }

    pub fn opt_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).and_then(|e| e.value.as_str())
    }

    pub fn path(&self, key: &str) -> PathBuf {
        PathBuf::from(self.str(key))
    }

    pub fn opt_path(&self, key: &str) -> Option<PathBuf> {
        self.opt_str(key).map(PathBuf::from)
    }

    pub fn paths(&self, key: &str) -> Vec<PathBuf> {
        self.value(key)
            .as_array()
            .expect("checked list")
            .iter()
            .map(|v| PathBuf::from(v.as_str().expect("checked string")))
            .collect()
    }

    /// `{"command": .., "values": {key: {"value": .., "source": ..}}}`
    pub fn to_json(&self) -> Value {
        json!({ "command": self.command, "values": self.entries })
    }

    pub fn log(&self) {
        for (k, e) in &self.entries {
            log::info!("config {}.{k} = {} ({:?})", self.command, e.value, e.source);
        }
    }
}

/// Comma-separated layer widths such as `64,64`.
pub fn parse_widths(text: &str) -> Result<Vec<usize>, CliError> {
    let widths: Result<Vec<usize>, _> = text.split(',').map(|w| w.trim().parse::<usize>()).collect();
    match widths {
        Ok(w) if !w.is_empty() && w.iter().all(|&x| x > 0) => Ok(w),
        _ => Err(usage(format!("hidden: expected comma-separated positive widths, got '{text}'"))),
    }
}

pub fn read_config(path: &Path, command: &str) -> Result<Vec<(String, Value)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_config_file(&text, &path.display().to_string(), command)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_provenance() {
        let file = parse_config_file("[ingest]\ncutoff = 5\nseed = 4\n", "cfg", "ingest").unwrap();
        let flags = [("seed", json!(9)), ("pdb_dir", json!("in")), ("out", json!("o"))];
        let c = RunConfig::resolve("ingest", &file, &flags).unwrap();
        assert_eq!(c.f64("cutoff"), 5.0);
        assert_eq!(c.source("cutoff"), Some(Source::ConfigFile));
        assert_eq!(c.u64("seed"), 9);
        assert_eq!(c.source("seed"), Some(Source::Flag));
        assert_eq!(c.source("train_fraction"), Some(Source::Default));
        let j = c.to_json();
        assert_eq!(j["values"]["seed"]["source"], "flag");
        assert_eq!(j["values"]["cutoff"]["value"], 5.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = parse_config_file("[ingest]\ncutof = 5\n", "cfg", "ingest").unwrap_err();
        assert!(e.to_string().contains("unknown key 'cutof'"), "{e}");
        let e = parse_config_file("[trian]\nseed = 1\n", "cfg", "train").unwrap_err();
        assert!(e.to_string().contains("unknown section"), "{e}");
        // other sections are checked too
        assert!(parse_config_file("[train]\nbogus = 1\n", "cfg", "ingest").is_err());
        let e = RunConfig::resolve("report", &[], &[("bogus", json!(1))]).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn type_checks() {
        assert!(parse_config_file("[train]\nmode = \"rnn\"\n", "cfg", "train").is_err());
        assert!(parse_config_file("[train]\nepochs = -1\n", "cfg", "train").is_err());
        assert!(parse_config_file("[train]\nlambda = \"big\"\n", "cfg", "train").is_err());
        assert!(parse_config_file("[evaluate]\npredictions = []\n", "cfg", "evaluate").is_err());
        assert!(parse_config_file("[evaluate]\npredictions = [\"a.csv\"]\n", "cfg", "evaluate").is_ok());
    }

    #[test]
    fn required_keys() {
        let e = RunConfig::resolve("ingest", &[], &[("out", json!("o"))]).unwrap_err();
        assert!(e.to_string().contains("pdb-dir"), "{e}");
    }

    #[test]
    fn widths() {
        assert_eq!(parse_widths("64, 32").unwrap(), vec![64, 32]);
        assert!(parse_widths("64,0").is_err());
        assert!(parse_widths("").is_err());
    }
}
