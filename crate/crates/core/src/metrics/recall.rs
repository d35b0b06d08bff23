use serde::{Deserialize, Serialize};

use super::{confusion_at_threshold, MetricsError};

pub const RATIO_BIN_WIDTH: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallBin {
    pub lo: f64,
    pub hi: f64,
    pub mean_recall: f64,
    pub count: usize,
}

/// Interface ratio (interface residues over real residues) and recall at
/// `threshold` for one complex; `None` without interface residues.
pub fn interface_ratio_recall(p: &[f64], y: &[u8], mask: &[u8], threshold: f64) -> Result<Option<(f64, f64)>, MetricsError> {
    let m = confusion_at_threshold(p, y, mask, threshold)?;
    let c = m.counts;
    if c.tp + c.fn_ == 0 {
        return Ok(None);
    }
    Ok(Some(((c.tp + c.fn_) as f64 / c.total() as f64, m.recall)))
}

/// Mean per-complex recall in equal-width interface-ratio bins. Only
/// occupied bins are returned, in ascending order.
pub fn recall_vs_interface_ratio(points: &[(f64, f64)], bin_width: f64) -> Vec<RecallBin> {
    let n_bins = (1.0 / bin_width).round() as usize;
    let mut sums = vec![(0.0, 0usize); n_bins];
    for &(ratio, recall) in points {
        let b = ((ratio / bin_width).floor() as usize).min(n_bins - 1);
        sums[b].0 += recall;
        sums[b].1 += 1;
    }
    sums.iter()
        .enumerate()
        .filter(|(_, s)| s.1 > 0)
        .map(|(b, s)| RecallBin {
            lo: b as f64 * bin_width,
            hi: (b + 1) as f64 * bin_width,
            mean_recall: s.0 / s.1 as f64,
            count: s.1,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_perfect() {
        let pt = interface_ratio_recall(&[0.9, 0.1, 0.1, 0.1], &[1, 0, 0, 0], &[1; 4], 0.8).unwrap().unwrap();
        assert_eq!(pt, (0.25, 1.0));
        let bins = recall_vs_interface_ratio(&[pt], RATIO_BIN_WIDTH);
        assert_eq!(bins.len(), 1);
        assert_eq!((bins[0].mean_recall, bins[0].count), (1.0, 1));
        assert!(bins[0].lo <= 0.25 && 0.25 < bins[0].hi);
    }

    #[test]
    fn nothing_predicted_is_zero_recall() {
        let pt = interface_ratio_recall(&[0.1; 4], &[1, 1, 0, 0], &[1; 4], 0.8).unwrap().unwrap();
        assert_eq!(pt.1, 0.0);
        assert_eq!(interface_ratio_recall(&[0.9; 2], &[0, 0], &[1; 2], 0.8).unwrap(), None);
    }

    /// `n` residues, the first `pos` are interface, the first `hit` predicted.
    fn instance(n: usize, pos: usize, hit: usize) -> (Vec<f64>, Vec<u8>) {
        let p = (0..n).map(|i| if i < hit { 0.9 } else { 0.1 }).collect();
        let y = (0..n).map(|i| (i < pos) as u8).collect();
        (p, y)
    }

    #[test]
    fn hand_computed_bins() {
        // ratios 0.1, 0.16, 0.5 with recalls 1/2, 1/4, 2/3
        let complexes = [instance(20, 2, 1), instance(25, 4, 1), instance(6, 3, 2)];
        let pts: Vec<(f64, f64)> = complexes
            .iter()
            .map(|(p, y)| interface_ratio_recall(p, y, &vec![1u8; p.len()], 0.8).unwrap().unwrap())
            .collect();
        assert_eq!(pts, vec![(0.1, 0.5), (0.16, 0.25), (0.5, 2.0 / 3.0)]);
        let bins = recall_vs_interface_ratio(&pts, 0.05);
        assert_eq!(bins.len(), 3);
        assert_eq!(bins[0].mean_recall, 0.5);
        assert_eq!(bins[1].mean_recall, 0.25);
        assert_eq!(bins[2].mean_recall, 2.0 / 3.0);
        let merged = recall_vs_interface_ratio(&[(0.11, 0.5), (0.12, 0.25)], 0.05);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].mean_recall, 0.375);
    }
}
