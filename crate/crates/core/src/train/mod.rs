//! Deterministic training: Adam, the epoch loop, logs and gradient checks.

mod adam;
mod gradcheck;

pub use adam::{adam_step, OptimizerState};
pub use gradcheck::{
    analytic_gradients, compare_gradients, gradient_check, random_instance, relative_error, GradCheckReport, InstanceGradients,
    TensorError,
};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{encode_features, DatasetError, FeatureEncoding, FeatureMatrix, LabeledPair};
use crate::loss::{distance_field, total_loss, DistanceField, LossError, StructMode, DEFAULT_LAMBDA};
use crate::metrics::roc_auc;
use crate::model::{InputScaler, KanStack, ModelError, StackConfig};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite gradient in tensor '{tensor}'{}", instance.as_ref().map(|i| format!(" (instance {i})")).unwrap_or_default())]
    NonFinite { instance: Option<String>, tensor: String },
    #[error("training diverged at epoch {epoch} on instance {instance}: {reason}")]
    Diverged {
        epoch: usize,
        instance: String,
        reason: String,
        last_good: Box<KanStack>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    Composite,
    CeOnly,
}

impl LossMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            LossMode::Composite => "composite",
            LossMode::CeOnly => "ce_only",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "composite" => Some(LossMode::Composite),
            "ce_only" => Some(LossMode::CeOnly),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Instances whose gradients are averaged per optimizer step.
    pub batch_size: usize,
    pub seed: u64,
    pub lr: f64,
    pub lambda: f64,
    pub loss_mode: LossMode,
    pub struct_mode: StructMode,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 1,
            seed: 0,
            lr: 1e-3,
            lambda: DEFAULT_LAMBDA,
            loss_mode: LossMode::Composite,
            struct_mode: StructMode::Continuous,
            patience: 20,
        }
    }
}

impl TrainConfig {
    /// Weight actually applied to the structural term. The term itself is
    /// still computed and logged under `CeOnly`.
    pub fn effective_lambda(&self) -> f64 {
        match self.loss_mode {
            LossMode::Composite => self.lambda,
            LossMode::CeOnly => 0.0,
        }
    }

    fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::Config("batch_size must be >= 1".into()));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(TrainError::Config(format!("lr must be finite and >= 0, got {}", self.lr)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(TrainError::Config(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// Everything the loss needs for one chain pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainInstance {
    pub id: String,
    pub features: FeatureMatrix,
    pub labels: Vec<u8>,
    pub mask: Vec<u8>,
    /// `None` when the pair has no binding residues.
    pub field: Option<DistanceField>,
}

impl TrainInstance {
    pub fn from_pair(pair: &LabeledPair, encoding: FeatureEncoding<'_>) -> Result<Self, TrainError> {
        let features = encode_features(pair, encoding)?;
        let field = match distance_field(&pair.atoms, &pair.labels) {
            Ok(f) => Some(f),
            Err(LossError::NoBindingResidues) => None,
            Err(e) => return Err(e.into()),
        };
        Ok(TrainInstance {
            id: pair.instance_id(),
            features,
            labels: pair.labels.clone(),
            mask: pair.mask.clone(),
            field,
        })
    }

    fn real_inputs(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.mask.len())
            .filter(|&i| self.mask[i] == 1)
            .map(|i| self.features.residue_input(i))
    }
}

/// Fits the input scaler on every real residue of the training instances.
pub fn fit_scaler(instances: &[TrainInstance], input_dim: usize) -> InputScaler {
    let rows: Vec<Vec<f64>> = instances.iter().flat_map(|t| t.real_inputs()).collect();
    InputScaler::fit(rows.iter().map(|r| r.as_slice()), input_dim)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub instances: usize,
    pub ce: f64,
    #[serde(rename = "struct")]
    pub structural: f64,
    pub total: f64,
    pub val_auc: Option<f64>,
}

pub const LOG_HEADER: &str = "mode,epoch,instances,ce,struct,total,val_auc";

/// Training log as CSV, one row per epoch.
pub fn log_to_csv(mode: &str, log: &[EpochLog]) -> String {
    let mut s = String::from(LOG_HEADER);
    s.push('\n');
    for e in log {
        let auc = e.val_auc.map(|a| format!("{a:.10}")).unwrap_or_default();
        s.push_str(&format!(
            "{mode},{},{},{:.10},{:.10},{:.10},{auc}\n",
            e.epoch, e.instances, e.ce, e.structural, e.total
        ));
    }
    s
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the best epoch by validation AUC (training loss when
    /// no validation AUC is available).
    pub best: KanStack,
    pub last: KanStack,
    pub best_epoch: usize,
    pub log: Vec<EpochLog>,
    /// Mean training loss at initialization.
    pub initial_loss: f64,
    pub stopped_early: bool,
}

/// Mean loss breakdown over `instances` without touching parameters.
pub fn mean_loss(stack: &KanStack, instances: &[TrainInstance], config: &TrainConfig) -> Result<(f64, f64, f64), TrainError> {
    let lambda = config.effective_lambda();
    let mut sums = (0.0, 0.0, 0.0);
    for inst in instances {
        let probs = stack.predict(&inst.features, &inst.mask)?;
        let (b, _) = total_loss(&probs, &inst.labels, inst.field.as_ref(), lambda, &inst.mask, config.struct_mode)?;
        sums.0 += b.ce;
        sums.1 += b.structural;
        sums.2 += b.total;
    }
    let n = instances.len().max(1) as f64;
    Ok((sums.0 / n, sums.1 / n, sums.2 / n))
}

/// Pooled ROC AUC over every real residue; `None` if a class is missing.
pub fn validation_auc(stack: &KanStack, instances: &[TrainInstance]) -> Result<Option<f64>, TrainError> {
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for inst in instances {
        let p = stack.predict(&inst.features, &inst.mask)?;
        for i in 0..p.len() {
            if inst.mask[i] == 1 {
                scores.push(p[i]);
                labels.push(inst.labels[i]);
            }
        }
    }
    let mask = vec![1u8; scores.len()];
    Ok(roc_auc(&scores, &labels, &mask).ok())
}

/// Initializes a stack from `stack_config` with `config.seed`, fits the
/// input scaler on `train`, and runs Adam over per-instance losses.
pub fn train_model(
    stack_config: &StackConfig,
    train: &[TrainInstance],
    val: &[TrainInstance],
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    if train.is_empty() {
        return Err(TrainError::Config("empty training split".into()));
    }
    let mut stack = KanStack::new(stack_config.clone())?;
    stack.init_params(config.seed);
    stack.scaler = fit_scaler(train, stack_config.input_dim());
    let initial_loss = mean_loss(&stack, train, config)?.2;

    let names = stack.tensor_names();
    let shapes: Vec<usize> = stack.tensors().iter().map(|t| t.len()).collect();
    let mut opt = OptimizerState::new(&shapes, config.lr);
    let mut grads = stack.zero_grads();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let lambda = config.effective_lambda();

    let mut log = Vec::new();
    let mut best = stack.clone();
    let mut best_score = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut stopped_early = false;
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let (mut ce, mut st, mut tot) = (0.0, 0.0, 0.0);
        let mut pending = 0;
        for (k, &idx) in order.iter().enumerate() {
            let inst = &train[idx];
            let diverged = |reason: String, last: &KanStack| TrainError::Diverged {
                epoch,
                instance: inst.id.clone(),
                reason,
                last_good: Box::new(last.clone()),
            };
            let fwd = stack.forward_instance(&inst.features, &inst.mask)?;
            let (b, dl_dp) = total_loss(
                &fwd.probs,
                &inst.labels,
                inst.field.as_ref(),
                lambda,
                &inst.mask,
                config.struct_mode,
            )?;
            if !b.total.is_finite() {
                return Err(diverged(format!("loss is {}", b.total), &best));
            }
            ce += b.ce;
            st += b.structural;
            tot += b.total;
            stack.backward_instance(&fwd, &dl_dp, &mut grads)?;
            pending += 1;
            if pending == config.batch_size || k + 1 == order.len() {
                grads.scale(1.0 / pending as f64);
                let mut params = stack.tensors_mut();
                match adam_step(&mut params, &grads, &mut opt, &names) {
                    Ok(()) => {}
                    Err(TrainError::NonFinite { tensor, .. }) => {
                        return Err(diverged(format!("non-finite gradient in tensor '{tensor}'"), &best));
                    }
                    Err(e) => return Err(e),
                }
                grads.zero();
                pending = 0;
            }
        }
        let n = train.len() as f64;
        let val_auc = if val.is_empty() { None } else { validation_auc(&stack, val)? };
        let entry = EpochLog {
            epoch,
            instances: train.len(),
            ce: ce / n,
            structural: st / n,
            total: tot / n,
            val_auc,
        };
        log::debug!("epoch {epoch}: total {:.6} val_auc {:?}", entry.total, entry.val_auc);
        let score = val_auc.unwrap_or(-entry.total);
        log.push(entry);
        if score > best_score {
            best_score = score;
            best = stack.clone();
            best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                stopped_early = true;
                break;
            }
        }
    }
    Ok(TrainOutcome {
        best,
        last: stack,
        best_epoch,
        log,
        initial_loss,
        stopped_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{label_interface, FeatureScheme, DEFAULT_CUTOFF};
    use crate::model::Mode;
    use crate::synth::{synthetic_complex, SynthOptions};

    fn instances(n: usize, offset: u64) -> Vec<TrainInstance> {
        let opts = SynthOptions::default();
        (0..n as u64)
            .map(|k| {
                let c = synthetic_complex(&format!("S{k:03}"), offset + k, &opts);
                let pair = label_interface(&c, 'P', 'A', DEFAULT_CUTOFF).unwrap();
                TrainInstance::from_pair(&pair, FeatureEncoding::Onehot).unwrap()
            })
            .collect()
    }

    fn small(mode: Mode) -> StackConfig {
        let mut c = StackConfig::new(FeatureScheme::Onehot, 21);
        c.hidden = vec![8];
        c.grid_size = 5;
        if mode == Mode::Mlp {
            c = c.matched_mlp();
        }
        c
    }

    fn config(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            lr: 1e-2,
            seed: 7,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_lr_keeps_init() {
        let data = instances(4, 0);
        let cfg = TrainConfig { lr: 0.0, ..config(3) };
        let out = train_model(&small(Mode::Kan), &data, &[], &cfg).unwrap();
        let mut init = KanStack::new(small(Mode::Kan)).unwrap();
        init.init_params(cfg.seed);
        assert_eq!(out.last.tensors(), init.tensors());
    }

    #[test]
    fn deterministic_log_bytes() {
        let data = instances(4, 0);
        let val = instances(2, 100);
        let a = train_model(&small(Mode::Kan), &data, &val, &config(3)).unwrap();
        let b = train_model(&small(Mode::Kan), &data, &val, &config(3)).unwrap();
        assert_eq!(log_to_csv("kan", &a.log), log_to_csv("kan", &b.log));
        assert_eq!(a.best.tensors(), b.best.tensors());
    }

    #[test]
    fn ce_only_equals_zero_lambda() {
        let data = instances(3, 0);
        let ce_only = TrainConfig {
            loss_mode: LossMode::CeOnly,
            ..config(3)
        };
        let zero = TrainConfig { lambda: 0.0, ..config(3) };
        let a = train_model(&small(Mode::Kan), &data, &[], &ce_only).unwrap();
        let b = train_model(&small(Mode::Kan), &data, &[], &zero).unwrap();
        assert_eq!(a.log, b.log);
        let composite = train_model(&small(Mode::Kan), &data, &[], &config(3)).unwrap();
        assert_ne!(a.log, composite.log);
    }

    #[test]
    fn separable_data_is_learned() {
        // a residue type that occurs only at the interface is a perfect signal
        let mut data = instances(6, 0);
        for inst in &mut data {
            let dim = inst.features.dim;
            let n = inst.mask.iter().filter(|&&m| m == 1).count();
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let mut r = vec![0.0; dim];
                    r[if inst.labels[i] == 1 { 0 } else { 1 }] = 1.0;
                    r
                })
                .collect();
            inst.features = FeatureMatrix::from_rows(&rows, dim, inst.features.scheme, inst.mask.len());
        }
        let cfg = TrainConfig {
            loss_mode: LossMode::CeOnly,
            ..config(30)
        };
        let out = train_model(&small(Mode::Kan), &data, &data, &cfg).unwrap();
        assert!(validation_auc(&out.best, &data).unwrap().unwrap() > 0.95);
        assert!(out.log.last().unwrap().total < out.initial_loss);
    }

    #[test]
    fn rejects_bad_config() {
        let data = instances(1, 0);
        for cfg in [
            TrainConfig { epochs: 0, ..config(1) },
            TrainConfig { lr: -1.0, ..config(1) },
            TrainConfig { lambda: f64::NAN, ..config(1) },
            TrainConfig { batch_size: 0, ..config(1) },
        ] {
            assert!(matches!(train_model(&small(Mode::Kan), &data, &[], &cfg), Err(TrainError::Config(_))));
        }
        assert!(train_model(&small(Mode::Kan), &[], &[], &config(1)).is_err());
    }

    #[test]
    fn log_csv_shape() {
        let log = vec![EpochLog {
            epoch: 1,
            instances: 2,
            ce: 0.5,
            structural: 0.25,
            total: 0.625,
            val_auc: None,
        }];
        let csv = log_to_csv("mlp", &log);
        assert_eq!(
            csv,
            "mode,epoch,instances,ce,struct,total,val_auc\nmlp,1,2,0.5000000000,0.2500000000,0.6250000000,\n"
        );
    }
}
