use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::MetricsError;

/// Largest number of nonzero differences for which the null distribution
/// is enumerated exactly.
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// Differences tend to be negative.
    Less,
    Greater,
    TwoSided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of the positive differences.
    pub w: f64,
    pub p_value: f64,
    /// Continuity-corrected normal score.
    pub z: f64,
    /// `|z| / sqrt(n)` over all `n` differences, capped at 1.
    pub effect_r: f64,
    pub n: usize,
    pub n_zero: usize,
    pub exact: bool,
    /// All differences were zero.
    pub degenerate: bool,
}

/// Mid-ranks (1-based) of `values`.
fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Number of sign assignments per attainable doubled rank sum.
fn null_counts(twice_ranks: &[usize]) -> Vec<f64> {
    let total: usize = twice_ranks.iter().sum();
    let mut counts = vec![0.0; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in twice_ranks {
        for s in (0..=reach).rev() {
            if counts[s] > 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

/// Signed-rank test with Pratt's zero handling: zeros take part in the
/// ranking of `|d|` and are dropped afterwards. Exact null distribution up to
/// [`EXACT_MAX_N`] nonzero differences, normal approximation beyond.
pub fn wilcoxon_signed_rank(differences: &[f64], alternative: Alternative) -> Result<WilcoxonResult, MetricsError> {
    if differences.is_empty() {
        return Err(MetricsError::EmptyValues);
    }
    if differences.iter().any(|d| !d.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    let n = differences.len();
    let abs: Vec<f64> = differences.iter().map(|d| d.abs()).collect();
    let ranks = mid_ranks(&abs);
    let nonzero: Vec<usize> = (0..n).filter(|&i| differences[i] != 0.0).collect();
    let n_zero = n - nonzero.len();
    if nonzero.is_empty() {
        return Ok(WilcoxonResult {
            w: 0.0,
            p_value: 1.0,
            z: 0.0,
            effect_r: 0.0,
            n,
            n_zero,
            exact: true,
            degenerate: true,
        });
    }
    let w: f64 = nonzero.iter().filter(|&&i| differences[i] > 0.0).map(|&i| ranks[i]).sum();
    let mean: f64 = nonzero.iter().map(|&i| ranks[i]).sum::<f64>() / 2.0;
    let var: f64 = nonzero.iter().map(|&i| ranks[i] * ranks[i]).sum::<f64>() / 4.0;
    let sd = var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let (z, p_normal) = match alternative {
        Alternative::Less => {
            let z = (w - mean + 0.5) / sd;
            (z, std_normal.cdf(z))
        }
        Alternative::Greater => {
            let z = (w - mean - 0.5) / sd;
            (z, std_normal.sf(z))
        }
        Alternative::TwoSided => {
            let z = (((w - mean).abs() - 0.5).max(0.0) / sd).copysign(w - mean);
            (z, (2.0 * std_normal.sf(z.abs())).min(1.0))
        }
    };
    let exact = nonzero.len() <= EXACT_MAX_N;
    let p_value = if exact {
        let twice: Vec<usize> = nonzero.iter().map(|&i| (2.0 * ranks[i]).round() as usize).collect();
        let counts = null_counts(&twice);
        let total = 2f64.powi(nonzero.len() as i32);
        let w2 = (2.0 * w).round() as usize;
        let le: f64 = counts[..=w2].iter().sum();
        let ge: f64 = counts[w2..].iter().sum();
        match alternative {
            Alternative::Less => le / total,
            Alternative::Greater => ge / total,
            Alternative::TwoSided => (2.0 * le.min(ge) / total).min(1.0),
        }
    } else {
        p_normal
    };
    Ok(WilcoxonResult {
        w,
        p_value,
        z,
        effect_r: (z.abs() / (n as f64).sqrt()).min(1.0),
        n,
        n_zero,
        exact,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Mean,
    Median,
}

impl Statistic {
    pub fn apply(&self, values: &[f64]) -> f64 {
        match self {
            Statistic::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Statistic::Median => {
                let mut v = values.to_vec();
                v.sort_by(|a, b| a.total_cmp(b));
                let m = v.len() / 2;
                if v.len() % 2 == 1 {
                    v[m]
                } else {
                    (v[m - 1] + v[m]) / 2.0
                }
            }
        }
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile bootstrap 95% interval.
pub fn bootstrap_ci(values: &[f64], statistic: Statistic, n_boot: usize, seed: u64) -> Result<(f64, f64), MetricsError> {
    if values.is_empty() || n_boot == 0 {
        return Err(MetricsError::EmptyValues);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = values.len();
    let mut sample = vec![0.0; n];
    let mut stats: Vec<f64> = (0..n_boot)
        .map(|_| {
            for s in sample.iter_mut() {
                *s = values[rng.random_range(0..n)];
            }
            statistic.apply(&sample)
        })
        .collect();
    stats.sort_by(|a, b| a.total_cmp(b));
    Ok((quantile(&stats, 0.025), quantile(&stats, 0.975)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    /// P(W+ <= observed) by walking all 2^n sign patterns.
    fn enumerate_less(ranks: &[f64], w: f64) -> f64 {
        let n = ranks.len();
        let mut hits = 0u64;
        for mask in 0u64..(1 << n) {
            let s: f64 = (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| ranks[k]).sum();
            if s <= w + 1e-9 {
                hits += 1;
            }
        }
        hits as f64 / (1u64 << n) as f64
    }

    #[test]
    fn five_negatives() {
        let r = wilcoxon_signed_rank(&[-1.0, -2.0, -3.0, -4.0, -5.0], Alternative::Less).unwrap();
        assert_eq!(r.w, 0.0);
        assert_eq!(r.p_value, 0.03125);
        assert!(r.exact);
    }

    #[test]
    fn symmetric_tie() {
        let r = wilcoxon_signed_rank(&[-1.0, 1.0], Alternative::Less).unwrap();
        assert!(r.p_value >= 0.5);
    }

    #[test]
    fn all_zero() {
        let r = wilcoxon_signed_rank(&[0.0, 0.0, 0.0], Alternative::Less).unwrap();
        assert!(r.degenerate);
        assert_eq!((r.w, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn pratt_keeps_zero_ranks() {
        // |d| = 0, 1, 2: zero takes rank 1, so the nonzero ranks are 2 and 3
        let r = wilcoxon_signed_rank(&[0.0, 1.0, -2.0], Alternative::Less).unwrap();
        assert_eq!(r.w, 2.0);
        assert_eq!(r.n_zero, 1);
        assert_eq!(r.p_value, enumerate_less(&[2.0, 3.0], 2.0));
    }

    #[test]
    fn exact_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=12 {
            for _ in 0..5 {
                // integer-valued differences give ties and zeros
                let d: Vec<f64> = (0..n).map(|_| rng.random_range(-4i32..=3) as f64).collect();
                let r = wilcoxon_signed_rank(&d, Alternative::Less).unwrap();
                if r.degenerate {
                    continue;
                }
                let ranks = mid_ranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
                let nz: Vec<f64> = (0..n).filter(|&i| d[i] != 0.0).map(|i| ranks[i]).collect();
                assert_eq!(r.p_value, enumerate_less(&nz, r.w), "{d:?}");
            }
        }
    }

    #[test]
    fn normal_branch_agrees_with_exact_near_cutoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d: Vec<f64> = (0..25).map(|_| rng.random_range(-1.0..0.6)).collect();
        let exact = wilcoxon_signed_rank(&d, Alternative::Less).unwrap();
        let mut d30 = d.clone();
        d30.extend((0..5).map(|_| rng.random_range(-1.0..0.6)));
        let approx = wilcoxon_signed_rank(&d30, Alternative::Less).unwrap();
        assert!(exact.exact && !approx.exact);
        assert!((0.0..=1.0).contains(&approx.p_value));
        // z for the exact case still yields a comparable tail
        let ncdf = Normal::new(0.0, 1.0).unwrap().cdf(exact.z);
        assert!((ncdf - exact.p_value).abs() < 0.02);
    }

    #[test]
    fn bootstrap_constant_and_seeded() {
        assert_eq!(bootstrap_ci(&[2.5; 20], Statistic::Mean, 1000, 1).unwrap(), (2.5, 2.5));
        let v: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        assert_eq!(
            bootstrap_ci(&v, Statistic::Median, 500, 9).unwrap(),
            bootstrap_ci(&v, Statistic::Median, 500, 9).unwrap()
        );
    }

    #[test]
    fn bootstrap_normal_theory_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let v: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let (lo, hi) = bootstrap_ci(&v, Statistic::Mean, 10_000, 5).unwrap();
        assert!(lo < 0.0 && hi > 0.0);
        let target = 2.0 * 1.96 / 1000f64.sqrt();
        assert!(((hi - lo) - target).abs() / target < 0.15);
    }
}
