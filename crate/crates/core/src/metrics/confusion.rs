use serde::{Deserialize, Serialize};

use super::{check_aligned, MetricsError};

pub const DEFAULT_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn add(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }

    /// `tp / (tp + fp)`, 0 with no predicted positives.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// `tp / (tp + fn)`, 0 with no actual positives.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn summary(&self) -> ThresholdMetrics {
        ThresholdMetrics {
            counts: *self,
            precision: self.precision(),
            recall: self.recall(),
            f1: self.f1(),
            accuracy: self.accuracy(),
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

/// Residues with `p >= threshold` are predicted binding.
pub fn confusion_at_threshold(p: &[f64], y: &[u8], mask: &[u8], threshold: f64) -> Result<ThresholdMetrics, MetricsError> {
    check_aligned(p, y, mask)?;
    let mut c = ConfusionCounts::default();
    for i in 0..p.len() {
        if mask[i] == 0 {
            continue;
        }
        match (p[i] >= threshold, y[i] == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    if c.total() == 0 {
        return Err(MetricsError::EmptyInstance);
    }
    Ok(c.summary())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect() {
        let m = confusion_at_threshold(&[0.9, 0.1, 0.85], &[1, 0, 1], &[1, 1, 1], 0.8).unwrap();
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn counts_arithmetic() {
        let c = ConfusionCounts { tp: 2, fp: 1, fn_: 1, tn: 6 };
        assert_eq!(c.precision(), 2.0 / 3.0);
        assert_eq!(c.recall(), 2.0 / 3.0);
        assert_eq!(c.accuracy(), 0.8);
        assert!((c.f1() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn threshold_inclusive_and_masked() {
        let m = confusion_at_threshold(&[0.8, 0.79, 0.99], &[1, 1, 0], &[1, 1, 0], 0.8).unwrap();
        assert_eq!(m.counts, ConfusionCounts { tp: 1, fp: 0, fn_: 1, tn: 0 });
        assert_eq!(confusion_at_threshold(&[0.5], &[1], &[0], 0.8), Err(MetricsError::EmptyInstance));
        let none = ConfusionCounts { tp: 0, fp: 0, fn_: 3, tn: 1 };
        assert_eq!(none.f1(), 0.0);
    }

    proptest! {
        #[test]
        fn confusion_algebra(tp in 0usize..50, fp in 0usize..50, fn_ in 0usize..50, tn in 0usize..50) {
            let c = ConfusionCounts { tp, fp, fn_, tn };
            // a newly found positive: one fn becomes tp
            if fn_ > 0 {
                let better = ConfusionCounts { tp: tp + 1, fn_: fn_ - 1, ..c };
                prop_assert!(better.recall() >= c.recall());
            }
            // an added predicted negative leaves precision alone
            let more_neg = ConfusionCounts { tn: tn + 1, ..c };
            prop_assert_eq!(more_neg.precision(), c.precision());
            let more_fn = ConfusionCounts { fn_: fn_ + 1, ..c };
            prop_assert_eq!(more_fn.precision(), c.precision());
        }
    }
}
