//! Plain-text checkpoints.
//!
//! ```text
//! # geopep checkpoint v1
//! mode kan
//! scheme onehot
//! feature_dim 21
//! hidden 64 64
//! degree 3
//! grid_size 8
//! grid_range -1 1
//! use_base true
//! seed 7
//! scaler_mean <2D values>
//! scaler_std <2D values>
//! tensor <name> <len> <values...>
//! ```
//! Floats are written in Rust's shortest round-trip form, so loading gives
//! back bit-identical parameters.

use std::fmt::Write as _;
use std::path::Path;

use super::{InputScaler, KanStack, Mode, ModelError, StackConfig};
use crate::dataset::FeatureScheme;

const MAGIC: &str = "# geopep checkpoint v1";

fn join(xs: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in xs.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v}").unwrap();
    }
    s
}

impl KanStack {
    pub fn to_checkpoint_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        writeln!(s, "{MAGIC}").unwrap();
        writeln!(s, "mode {}", c.mode.as_str()).unwrap();
        writeln!(s, "scheme {}", c.scheme.as_str()).unwrap();
        writeln!(s, "feature_dim {}", c.feature_dim).unwrap();
        let hidden: Vec<String> = c.hidden.iter().map(|h| h.to_string()).collect();
        writeln!(s, "hidden {}", hidden.join(" ")).unwrap();
        writeln!(s, "degree {}", c.degree).unwrap();
        writeln!(s, "grid_size {}", c.grid_size).unwrap();
        writeln!(s, "grid_range {} {}", c.grid_range.0, c.grid_range.1).unwrap();
        writeln!(s, "use_base {}", c.use_base).unwrap();
        match self.seed {
            Some(seed) => writeln!(s, "seed {seed}").unwrap(),
            None => writeln!(s, "seed none").unwrap(),
        }
        writeln!(s, "scaler_mean {}", join(&self.scaler.mean)).unwrap();
        writeln!(s, "scaler_std {}", join(&self.scaler.std)).unwrap();
        for (name, t) in self.tensor_names().iter().zip(self.tensors()) {
            if t.is_empty() {
                writeln!(s, "tensor {name} 0").unwrap();
            } else {
                writeln!(s, "tensor {name} {} {}", t.len(), join(t)).unwrap();
            }
        }
        s
    }

    pub fn from_checkpoint_text(text: &str) -> Result<Self, ModelError> {
        let mut header: Vec<(usize, &str, &str)> = Vec::new();
        let mut tensors: Vec<(usize, &str)> = Vec::new();
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => {
                return Err(ModelError::Checkpoint {
                    line: 1,
                    message: "missing checkpoint header".into(),
                })
            }
        }
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            if key == "tensor" {
                tensors.push((i + 1, rest));
            } else {
                header.push((i + 1, key, rest));
            }
        }
        let field = |name: &str| -> Result<(usize, &str), ModelError> {
            header
                .iter()
                .find(|(_, k, _)| *k == name)
                .map(|(l, _, v)| (*l, *v))
                .ok_or_else(|| ModelError::Checkpoint {
                    line: 0,
                    message: format!("missing field '{name}'"),
                })
        };
        fn bad(line: usize, message: String) -> ModelError {
            ModelError::Checkpoint { line, message }
        }
        fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, ModelError> {
            s.trim().parse().map_err(|_| bad(line, format!("bad number '{s}'")))
        }
        fn floats(line: usize, s: &str) -> Result<Vec<f64>, ModelError> {
            s.split_whitespace().map(|t| num(line, t)).collect()
        }

        let (l, v) = field("mode")?;
        let mode = Mode::parse(v.trim()).ok_or_else(|| bad(l, format!("unknown mode '{v}'")))?;
        let (l, v) = field("scheme")?;
        let scheme = FeatureScheme::parse(v.trim()).ok_or_else(|| bad(l, format!("unknown scheme '{v}'")))?;
        let (l, v) = field("feature_dim")?;
        let feature_dim = num(l, v)?;
        let (l, v) = field("hidden")?;
        let hidden = v.split_whitespace().map(|t| num(l, t)).collect::<Result<Vec<usize>, _>>()?;
        let (l, v) = field("degree")?;
        let degree = num(l, v)?;
        let (l, v) = field("grid_size")?;
        let grid_size = num(l, v)?;
        let (l, v) = field("grid_range")?;
        let gr = floats(l, v)?;
        if gr.len() != 2 {
            return Err(bad(l, "grid_range needs two values".into()));
        }
        let (l, v) = field("use_base")?;
        let use_base = match v.trim() {
            "true" => true,
            "false" => false,
            other => return Err(bad(l, format!("bad boolean '{other}'"))),
        };
        let (l, v) = field("seed")?;
        let seed = match v.trim() {
            "none" => None,
            s => Some(num(l, s)?),
        };

        let config = StackConfig {
            mode,
            scheme,
            feature_dim,
            hidden,
            degree,
            grid_size,
            grid_range: (gr[0], gr[1]),
            use_base,
        };
        let mut stack = KanStack::new(config)?;
        stack.seed = seed;
        let dim = stack.config.input_dim();
        let (l, v) = field("scaler_mean")?;
        let mean = floats(l, v)?;
        let (l2, v) = field("scaler_std")?;
        let std = floats(l2, v)?;
        if mean.len() != dim || std.len() != dim {
            return Err(bad(l, format!("scaler needs {dim} values")));
        }
        stack.scaler = InputScaler { mean, std };

        let names = stack.tensor_names();
        if tensors.len() != names.len() {
            return Err(bad(0, format!("expected {} tensors, found {}", names.len(), tensors.len())));
        }
        let mut slots = stack.tensors_mut();
        for ((line, rest), (name, slot)) in tensors.iter().zip(names.iter().zip(slots.iter_mut())) {
            let mut it = rest.splitn(3, ' ');
            let got_name = it.next().unwrap_or("");
            if got_name != name {
                return Err(bad(*line, format!("expected tensor '{name}', found '{got_name}'")));
            }
            let len: usize = num(*line, it.next().unwrap_or(""))?;
            let values = floats(*line, it.next().unwrap_or(""))?;
            if len != slot.len() || values.len() != len {
                return Err(bad(
                    *line,
                    format!("tensor '{name}' should hold {} values, found {}", slot.len(), values.len()),
                ));
            }
            slot.copy_from_slice(&values);
        }
        Ok(stack)
    }
}

pub fn save_checkpoint(stack: &KanStack, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, stack.to_checkpoint_text())?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<KanStack, ModelError> {
    KanStack::from_checkpoint_text(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_exact_round_trip() {
        for mode in [Mode::Kan, Mode::Mlp] {
            let mut c = StackConfig::new(FeatureScheme::Onehot, 21);
            c.mode = mode;
            c.hidden = vec![5, 3];
            let mut s = KanStack::new(c).unwrap();
            s.init_params(99);
            s.scaler.mean[3] = 1.0 / 3.0;
            s.scaler.std[7] = 2.0f64.sqrt();
            let back = KanStack::from_checkpoint_text(&s.to_checkpoint_text()).unwrap();
            assert_eq!(back.config, s.config);
            assert_eq!(back.scaler, s.scaler);
            assert_eq!(back.seed, Some(99));
            for (a, b) in s.tensors().iter().zip(back.tensors()) {
                assert_eq!(a.len(), b.len());
                assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
            }
            assert_eq!(back.to_checkpoint_text(), s.to_checkpoint_text());
        }
    }

    #[test]
    fn no_base_round_trip() {
        let mut c = StackConfig::new(FeatureScheme::Physchem, 7);
        c.use_base = false;
        c.hidden = vec![2];
        let mut s = KanStack::new(c).unwrap();
        s.init_params(1);
        let back = KanStack::from_checkpoint_text(&s.to_checkpoint_text()).unwrap();
        assert_eq!(back.tensors(), s.tensors());
    }

    #[test]
    fn corrupt_tensor_rejected() {
        let mut c = StackConfig::new(FeatureScheme::Physchem, 7);
        c.hidden = vec![2];
        let s = KanStack::new(c).unwrap();
        let text = s.to_checkpoint_text().replace("tensor head.bias 1 0", "tensor head.bias 1 zero");
        assert!(matches!(
            KanStack::from_checkpoint_text(&text),
            Err(ModelError::Checkpoint { .. })
        ));
        assert!(KanStack::from_checkpoint_text("hello").is_err());
    }
}
