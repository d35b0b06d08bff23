use serde::{Deserialize, Serialize};

use super::{check_aligned, MetricsError};

/// Points of a threshold sweep. `thresholds[k]` produced `(xs[k], ys[k])`;
/// the first point is the empty-prediction anchor with threshold `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoints {
    pub thresholds: Vec<f64>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub area: f64,
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / 2.0)
        .sum()
}

/// Cumulative (tp, fp) after each distinct score, scores descending.
fn sweep(p: &[f64], y: &[u8], mask: &[u8]) -> Result<(Vec<f64>, Vec<(usize, usize)>, usize, usize), MetricsError> {
    check_aligned(p, y, mask)?;
    let mut pts: Vec<(f64, u8)> = (0..p.len()).filter(|&i| mask[i] == 1).map(|i| (p[i], y[i])).collect();
    if pts.is_empty() {
        return Err(MetricsError::EmptyInstance);
    }
    let pos = pts.iter().filter(|t| t.1 == 1).count();
    let neg = pts.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut thresholds = Vec::new();
    let mut cum = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    let mut i = 0;
    while i < pts.len() {
        let s = pts[i].0;
        while i < pts.len() && pts[i].0 == s {
            if pts[i].1 == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        thresholds.push(s);
        cum.push((tp, fp));
    }
    Ok((thresholds, cum, pos, neg))
}

/// ROC curve (x = FPR, y = TPR). Tied scores move along the diagonal, so
/// the trapezoid area counts ties as one half.
pub fn roc_curve(p: &[f64], y: &[u8], mask: &[u8]) -> Result<CurvePoints, MetricsError> {
    let (ths, cum, pos, neg) = sweep(p, y, mask)?;
    let mut thresholds = vec![f64::INFINITY];
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    for (t, (tp, fp)) in ths.into_iter().zip(cum) {
        thresholds.push(t);
        xs.push(fp as f64 / neg as f64);
        ys.push(tp as f64 / pos as f64);
    }
    let area = trapezoid(&xs, &ys);
    Ok(CurvePoints { thresholds, xs, ys, area })
}

/// Precision-recall curve (x = recall, y = precision). The anchor at recall
/// 0 carries the precision of the highest threshold.
pub fn pr_curve(p: &[f64], y: &[u8], mask: &[u8]) -> Result<CurvePoints, MetricsError> {
    let (ths, cum, pos, _) = sweep(p, y, mask)?;
    let mut thresholds = vec![f64::INFINITY];
    let (tp0, fp0) = cum[0];
    let mut xs = vec![0.0];
    let mut ys = vec![tp0 as f64 / (tp0 + fp0) as f64];
    for (t, (tp, fp)) in ths.into_iter().zip(cum) {
        thresholds.push(t);
        xs.push(tp as f64 / pos as f64);
        ys.push(tp as f64 / (tp + fp) as f64);
    }
    let area = trapezoid(&xs, &ys);
    Ok(CurvePoints { thresholds, xs, ys, area })
}

/// Mann-Whitney AUC from mid-ranks: exactly `(wins + ties / 2) / (pos * neg)`.
pub fn roc_auc(p: &[f64], y: &[u8], mask: &[u8]) -> Result<f64, MetricsError> {
    check_aligned(p, y, mask)?;
    let mut pts: Vec<(f64, u8)> = (0..p.len()).filter(|&i| mask[i] == 1).map(|i| (p[i], y[i])).collect();
    if pts.is_empty() {
        return Err(MetricsError::EmptyInstance);
    }
    let pos = pts.iter().filter(|t| t.1 == 1).count() as u64;
    let neg = pts.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    // doubled mid-ranks keep everything integral
    let mut twice_rank_sum: u64 = 0;
    let mut i = 0;
    while i < pts.len() {
        let mut j = i;
        while j < pts.len() && pts[j].0 == pts[i].0 {
            j += 1;
        }
        let twice_mid = (i + 1 + j) as u64;
        let k = pts[i..j].iter().filter(|t| t.1 == 1).count() as u64;
        twice_rank_sum += twice_mid * k;
        i = j;
    }
    let twice_u = twice_rank_sum - pos * (pos + 1);
    Ok(twice_u as f64 / 2.0 / (pos * neg) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn pairwise(p: &[f64], y: &[u8]) -> f64 {
        let mut twice = 0u64;
        let mut pairs = 0u64;
        for i in 0..p.len() {
            for j in 0..p.len() {
                if y[i] == 1 && y[j] == 0 {
                    pairs += 1;
                    twice += if p[i] > p[j] {
                        2
                    } else if p[i] == p[j] {
                        1
                    } else {
                        0
                    };
                }
            }
        }
        twice as f64 / 2.0 / pairs as f64
    }

    #[test]
    fn examples() {
        let m = [1u8; 4];
        assert_eq!(roc_auc(&[0.9, 0.8, 0.1, 0.2], &[1, 1, 0, 0], &m).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.3; 4], &[1, 0, 1, 0], &m).unwrap(), 0.5);
        assert_eq!(roc_auc(&[0.9, 0.4, 0.6], &[1, 1, 0], &m[..3]).unwrap(), 0.5);
        assert_eq!(roc_auc(&[0.9, 0.4], &[1, 1], &m[..2]), Err(MetricsError::SingleClass));
    }

    #[test]
    fn curve_area_matches_rank_auc() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let n = rng.random_range(2..200);
            let p: Vec<f64> = (0..n).map(|_| (rng.random_range(0..20) as f64) / 20.0).collect();
            let mut y: Vec<u8> = (0..n).map(|_| rng.random_bool(0.4) as u8).collect();
            y[0] = 1;
            y[1] = 0;
            let mask = vec![1u8; n];
            let c = roc_curve(&p, &y, &mask).unwrap();
            assert!((c.area - roc_auc(&p, &y, &mask).unwrap()).abs() < 1e-12);
            assert_eq!(*c.xs.last().unwrap(), 1.0);
            assert!(c.thresholds.windows(2).all(|w| w[0] > w[1]));
            let pr = pr_curve(&p, &y, &mask).unwrap();
            assert!((0.0..=1.0).contains(&pr.area));
            assert_eq!(*pr.xs.last().unwrap(), 1.0);
        }
    }

    #[test]
    fn rank_auc_equals_pairwise_exactly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for case in 0..100 {
            let n = rng.random_range(2..=500);
            // coarse scores force ties in about half the cases
            let levels = if case % 2 == 0 { 10 } else { 1_000_000 };
            let p: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 / levels as f64).collect();
            let mut y: Vec<u8> = (0..n).map(|_| rng.random_bool(0.3) as u8).collect();
            y[0] = 1;
            y[n - 1] = 0;
            let mask = vec![1u8; n];
            assert_eq!(roc_auc(&p, &y, &mask).unwrap(), pairwise(&p, &y));
        }
    }

    #[test]
    fn perfect_pr() {
        let c = pr_curve(&[0.9, 0.8, 0.1], &[1, 1, 0], &[1, 1, 1]).unwrap();
        assert_eq!(c.area, 1.0);
    }
}
