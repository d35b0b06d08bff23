use serde::{Deserialize, Serialize};

use super::{
    bootstrap_ci, confusion_at_threshold, distance_loss_eval, interface_ratio_recall, pr_curve, recall_vs_interface_ratio,
    roc_auc, roc_curve, tpvr, wilcoxon_signed_rank, Alternative, ConfusionCounts, CurvePoints, DistanceEvalMode,
    MetricsError, RecallBin, Statistic, ThresholdMetrics, RATIO_BIN_WIDTH,
};
use crate::dataset::{expand_labels, LabeledPair};

/// One chain pair with a method's predictions.
#[derive(Debug, Clone)]
pub struct EvalInstance<'a> {
    pub pair: &'a LabeledPair,
    /// Padded like `pair.labels`.
    pub probs: Vec<f64>,
    /// ΔRSA per real residue, when structures are available.
    pub delta_rsa: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub threshold: f64,
    /// Label relaxation window; 0 is strict evaluation.
    pub window: usize,
    pub n_boot: usize,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            threshold: super::DEFAULT_THRESHOLD,
            window: 0,
            n_boot: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexRecord {
    pub id: String,
    pub n_residues: usize,
    pub n_interface: usize,
    pub metrics: ThresholdMetrics,
    pub auc: Option<f64>,
    pub tpvr: Option<f64>,
    pub distance_loss_raw: Option<f64>,
    pub distance_loss_thresholded: Option<f64>,
    pub interface_ratio: f64,
    pub delta_rsa_pos_mean: Option<f64>,
    pub delta_rsa_neg_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRsaStats {
    pub n_entries: usize,
    pub per_entry_pos_mean: Vec<f64>,
    pub per_entry_neg_mean: Vec<f64>,
    pub diff_mean: f64,
    pub diff_median: f64,
    pub wilcoxon_w: f64,
    pub p_value: f64,
    pub effect_r: f64,
    pub exact: bool,
    pub degenerate: bool,
    pub ci_mean: (f64, f64),
    pub ci_median: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub window: usize,
    pub relaxed: bool,
    pub threshold: f64,
    pub n_complexes: usize,
    pub pooled: ThresholdMetrics,
    pub roc_auc: Option<f64>,
    pub pr_auc: Option<f64>,
    pub roc: Option<CurvePoints>,
    pub pr: Option<CurvePoints>,
    pub tpvr_mean: Option<f64>,
    pub tpvr_defined: usize,
    pub tpvr_null: usize,
    pub distance_loss_raw_mean: Option<f64>,
    pub distance_loss_thresholded_mean: Option<f64>,
    pub recall_bins: Vec<RecallBin>,
    pub delta_rsa: Option<DeltaRsaStats>,
    pub complexes: Vec<ComplexRecord>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

fn record(inst: &EvalInstance<'_>, options: &EvalOptions) -> Result<(ComplexRecord, Vec<u8>), MetricsError> {
    let pair = inst.pair;
    if inst.probs.len() != pair.labels.len() {
        return Err(MetricsError::Shape {
            what: "predictions",
            expected: pair.labels.len(),
            found: inst.probs.len(),
        });
    }
    let labels = if options.window > 0 {
        expand_labels(&pair.labels, &pair.mask, options.window)
    } else {
        pair.labels.clone()
    };
    let p = &inst.probs;
    let mask = &pair.mask;
    let metrics = confusion_at_threshold(p, &labels, mask, options.threshold)?;
    let auc = roc_auc(p, &labels, mask).ok();

    let n = pair.len();
    let mut pred = Vec::new();
    let mut tp = Vec::new();
    for i in 0..n {
        if mask[i] == 1 && p[i] >= options.threshold {
            pred.push(pair.centers[i]);
            if labels[i] == 1 {
                tp.push(pair.centers[i]);
            }
        }
    }
    let tpvr = tpvr(&pred, &tp)?;
    let distance_loss_raw = distance_loss_eval(p, &pair.labels, &pair.atoms, mask, DistanceEvalMode::Raw)?;
    let distance_loss_thresholded = distance_loss_eval(
        p,
        &pair.labels,
        &pair.atoms,
        mask,
        DistanceEvalMode::Thresholded {
            threshold: options.threshold,
        },
    )?;
    let n_interface = labels.iter().filter(|&&l| l == 1).count();

    let (mut pos_mean, mut neg_mean) = (None, None);
    if let Some(d) = &inst.delta_rsa {
        if d.len() != n {
            return Err(MetricsError::Shape {
                what: "delta RSA",
                expected: n,
                found: d.len(),
            });
        }
        let pos: Vec<f64> = (0..n).filter(|&i| p[i] >= options.threshold).map(|i| d[i]).collect();
        let neg: Vec<f64> = (0..n).filter(|&i| p[i] < options.threshold).map(|i| d[i]).collect();
        pos_mean = mean(&pos);
        neg_mean = mean(&neg);
    }

    Ok((
        ComplexRecord {
            id: pair.instance_id(),
            n_residues: n,
            n_interface,
            metrics,
            auc,
            tpvr,
            distance_loss_raw,
            distance_loss_thresholded,
            interface_ratio: n_interface as f64 / n.max(1) as f64,
            delta_rsa_pos_mean: pos_mean,
            delta_rsa_neg_mean: neg_mean,
        },
        labels,
    ))
}

/// Full metric suite for one method over a set of chain pairs.
pub fn evaluate_method(method: &str, instances: &[EvalInstance<'_>], options: &EvalOptions) -> Result<MethodReport, MetricsError> {
    if instances.is_empty() {
        return Err(MetricsError::EmptyValues);
    }
    let mut complexes = Vec::with_capacity(instances.len());
    let mut pooled = ConfusionCounts::default();
    let (mut all_p, mut all_y) = (Vec::new(), Vec::new());
    let mut recall_points = Vec::new();
    for inst in instances {
        let (rec, labels) = record(inst, options)?;
        pooled.add(&rec.metrics.counts);
        for i in 0..labels.len() {
            if inst.pair.mask[i] == 1 {
                all_p.push(inst.probs[i]);
                all_y.push(labels[i]);
            }
        }
        if let Some(pt) = interface_ratio_recall(&inst.probs, &labels, &inst.pair.mask, options.threshold)? {
            recall_points.push(pt);
        }
        complexes.push(rec);
    }
    let all_mask = vec![1u8; all_p.len()];
    let roc = roc_curve(&all_p, &all_y, &all_mask).ok();
    let pr = pr_curve(&all_p, &all_y, &all_mask).ok();
    let tpvrs: Vec<f64> = complexes.iter().filter_map(|c| c.tpvr).collect();
    let raw: Vec<f64> = complexes.iter().filter_map(|c| c.distance_loss_raw).collect();
    let thr: Vec<f64> = complexes.iter().filter_map(|c| c.distance_loss_thresholded).collect();

    let (pos, neg): (Vec<f64>, Vec<f64>) = complexes
        .iter()
        .filter_map(|c| Some((c.delta_rsa_pos_mean?, c.delta_rsa_neg_mean?)))
        .unzip();
    let delta_rsa = if pos.is_empty() {
        None
    } else {
        let diffs: Vec<f64> = pos.iter().zip(&neg).map(|(a, b)| a - b).collect();
        let w = wilcoxon_signed_rank(&diffs, Alternative::Less)?;
        Some(DeltaRsaStats {
            n_entries: diffs.len(),
            diff_mean: Statistic::Mean.apply(&diffs),
            diff_median: Statistic::Median.apply(&diffs),
            wilcoxon_w: w.w,
            p_value: w.p_value,
            effect_r: w.effect_r,
            exact: w.exact,
            degenerate: w.degenerate,
            ci_mean: bootstrap_ci(&diffs, Statistic::Mean, options.n_boot, options.seed)?,
            ci_median: bootstrap_ci(&diffs, Statistic::Median, options.n_boot, options.seed)?,
            per_entry_pos_mean: pos,
            per_entry_neg_mean: neg,
        })
    };

    Ok(MethodReport {
        method: method.to_string(),
        window: options.window,
        relaxed: options.window > 0,
        threshold: options.threshold,
        n_complexes: complexes.len(),
        pooled: pooled.summary(),
        roc_auc: roc_auc(&all_p, &all_y, &all_mask).ok(),
        pr_auc: pr.as_ref().map(|c| c.area),
        roc,
        pr,
        tpvr_mean: mean(&tpvrs),
        tpvr_defined: tpvrs.len(),
        tpvr_null: complexes.len() - tpvrs.len(),
        distance_loss_raw_mean: mean(&raw),
        distance_loss_thresholded_mean: mean(&thr),
        recall_bins: recall_vs_interface_ratio(&recall_points, RATIO_BIN_WIDTH),
        delta_rsa,
        complexes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{label_interface, DEFAULT_CUTOFF};
    use crate::synth::{synthetic_complex, SynthOptions};

    fn pairs(n: u64) -> Vec<LabeledPair> {
        (0..n)
            .map(|k| label_interface(&synthetic_complex("E", k, &SynthOptions::default()), 'P', 'A', DEFAULT_CUTOFF).unwrap())
            .collect()
    }

    fn oracle(pair: &LabeledPair) -> Vec<f64> {
        pair.labels.iter().map(|&l| if l == 1 { 0.95 } else { 0.05 }).collect()
    }

    #[test]
    fn perfect_predictions() {
        let ps = pairs(3);
        let inst: Vec<EvalInstance> = ps
            .iter()
            .map(|p| EvalInstance {
                pair: p,
                probs: oracle(p),
                delta_rsa: None,
            })
            .collect();
        let r = evaluate_method("oracle", &inst, &EvalOptions::default()).unwrap();
        assert_eq!(r.roc_auc, Some(1.0));
        assert_eq!((r.pooled.precision, r.pooled.recall), (1.0, 1.0));
        assert_eq!(r.distance_loss_thresholded_mean, Some(0.0));
        assert_eq!(r.n_complexes, 3);
        assert!(!r.relaxed && r.delta_rsa.is_none());
        assert_eq!(r.tpvr_defined + r.tpvr_null, 3);
        assert!(r.complexes.iter().filter_map(|c| c.tpvr).all(|t| t == 1.0));
    }

    #[test]
    fn window_relaxation_is_flagged_and_lenient() {
        let ps = pairs(2);
        let inst: Vec<EvalInstance> = ps
            .iter()
            .map(|p| {
                // shift every positive call one residue along the sequence
                let mut probs = vec![0.05; p.labels.len()];
                for i in 0..p.len() {
                    if p.labels[i] == 1 && i + 1 < p.len() {
                        probs[i + 1] = 0.95;
                    }
                }
                EvalInstance {
                    pair: p,
                    probs,
                    delta_rsa: None,
                }
            })
            .collect();
        let strict = evaluate_method("m", &inst, &EvalOptions::default()).unwrap();
        let relaxed = evaluate_method(
            "m",
            &inst,
            &EvalOptions {
                window: 1,
                ..EvalOptions::default()
            },
        )
        .unwrap();
        assert!(relaxed.relaxed && relaxed.window == 1);
        assert_eq!(relaxed.pooled.precision, 1.0);
        assert!(relaxed.pooled.precision > strict.pooled.precision);
    }

    #[test]
    fn delta_rsa_statistics() {
        let ps = pairs(6);
        let inst: Vec<EvalInstance> = ps
            .iter()
            .map(|p| {
                let probs = oracle(p);
                // predicted residues are buried, the rest unchanged
                let d = (0..p.len()).map(|i| if probs[i] >= 0.8 { -0.3 } else { 0.0 }).collect();
                EvalInstance {
                    pair: p,
                    probs,
                    delta_rsa: Some(d),
                }
            })
            .collect();
        let opts = EvalOptions {
            n_boot: 200,
            ..EvalOptions::default()
        };
        let s = evaluate_method("m", &inst, &opts).unwrap().delta_rsa.unwrap();
        assert_eq!(s.n_entries, 6);
        assert!((s.diff_mean + 0.3).abs() < 1e-12);
        assert_eq!(s.p_value, 1.0 / 64.0);
    }

    #[test]
    fn rejects_misaligned_and_empty() {
        let ps = pairs(1);
        let bad = [EvalInstance {
            pair: &ps[0],
            probs: vec![0.5; 3],
            delta_rsa: None,
        }];
        assert!(matches!(
            evaluate_method("m", &bad, &EvalOptions::default()),
            Err(MetricsError::Shape { .. })
        ));
        assert_eq!(evaluate_method("m", &[], &EvalOptions::default()).unwrap_err(), MetricsError::EmptyValues);
    }
}
