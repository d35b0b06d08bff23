//! B-spline bases over uniform extended knot grids.

use super::ModelError;

/// Highest supported spline degree.
pub const MAX_DEGREE: usize = 7;

/// Uniform knot grid on `[lo, hi]` with `grid_size` intervals, extended by
/// `degree` knots on each side so the `grid_size + degree` bases form a
/// partition of unity on the whole range.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineGrid {
    knots: Vec<f64>,
    degree: usize,
    grid_size: usize,
    lo: f64,
    hi: f64,
}

impl SplineGrid {
    pub fn uniform(lo: f64, hi: f64, grid_size: usize, degree: usize) -> Result<Self, ModelError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(ModelError::InvalidConfig(format!("grid range [{lo}, {hi}]")));
        }
        if grid_size == 0 {
            return Err(ModelError::InvalidConfig("grid_size must be >= 1".into()));
        }
        if degree == 0 || degree > MAX_DEGREE {
            return Err(ModelError::InvalidConfig(format!("degree {degree} outside 1..={MAX_DEGREE}")));
        }
        let h = (hi - lo) / grid_size as f64;
        let knots = (0..=grid_size + 2 * degree)
            .map(|j| lo + (j as f64 - degree as f64) * h)
            .collect();
        Ok(SplineGrid {
            knots,
            degree,
            grid_size,
            lo,
            hi,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn n_basis(&self) -> usize {
        self.grid_size + self.degree
    }

    /// Knot interval index `j` with `t_j <= x < t_{j+1}`, restricted to the
    /// interior intervals; `x == hi` falls in the last one.
    fn span(&self, x: f64) -> usize {
        let p = self.degree;
        let last = p + self.grid_size - 1;
        let h = (self.hi - self.lo) / self.grid_size as f64;
        let mut j = (p as i64 + ((x - self.lo) / h).floor() as i64).clamp(p as i64, last as i64) as usize;
        while j > p && x < self.knots[j] {
            j -= 1;
        }
        while j < last && x >= self.knots[j + 1] {
            j += 1;
        }
        j
    }

    /// Nonzero bases (and their x-derivatives) at `x`, which is clamped to
    /// the grid range first. Derivatives are zero when clamping was active.
    pub fn local_basis(&self, x: f64) -> LocalBasis {
        let p = self.degree;
        let inside = x >= self.lo && x <= self.hi;
        let xc = x.clamp(self.lo, self.hi);
        let span = self.span(xc);
        let t = &self.knots;

        // de Boor's triangular scheme, keeping the degree p-1 row for derivatives
        let mut n = [0.0; MAX_DEGREE + 1];
        let mut prev = [0.0; MAX_DEGREE + 1];
        let mut left = [0.0; MAX_DEGREE + 1];
        let mut right = [0.0; MAX_DEGREE + 1];
        n[0] = 1.0;
        for j in 1..=p {
            if j == p {
                prev[..p].copy_from_slice(&n[..p]);
            }
            left[j] = xc - t[span + 1 - j];
            right[j] = t[span + j] - xc;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }

        let mut d = [0.0; MAX_DEGREE + 1];
        if inside {
            let pf = p as f64;
            for k in 0..=p {
                let i = span - p + k;
                let mut v = 0.0;
                if k >= 1 {
                    v += prev[k - 1] / (t[i + p] - t[i]);
                }
                if k < p {
                    v -= prev[k] / (t[i + p + 1] - t[i + 1]);
                }
                d[k] = pf * v;
            }
        }
        LocalBasis {
            first: span - p,
            len: p + 1,
            inside,
            values: n,
            derivs: d,
        }
    }
}

/// The `degree + 1` bases that can be nonzero at a point.
#[derive(Debug, Clone, Copy)]
pub struct LocalBasis {
    /// Index of the first nonzero basis.
    pub first: usize,
    pub len: usize,
    /// `x` was within the grid range (not clamped).
    pub inside: bool,
    pub values: [f64; MAX_DEGREE + 1],
    pub derivs: [f64; MAX_DEGREE + 1],
}

/// Plain Cox-de Boor recursion over an arbitrary non-decreasing knot vector.
///
/// Returns the `knots.len() - degree - 1` bases of the requested degree at
/// `x`, using half-open knot intervals except that `x` equal to the last
/// distinct knot is assigned to the final nonempty interval. Degree 0 gives
/// the interval indicator vector.
pub fn cox_de_boor(knots: &[f64], degree: usize, x: f64) -> Vec<f64> {
    let m = knots.len();
    assert!(m >= degree + 2, "need at least degree + 2 knots");
    let last_nonempty = (0..m - 1).rev().find(|&j| knots[j] < knots[j + 1]);
    let mut b: Vec<f64> = (0..m - 1)
        .map(|j| {
            let hit = knots[j] <= x && x < knots[j + 1];
            let at_end = Some(j) == last_nonempty && x == knots[j + 1];
            if hit || at_end {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for k in 1..=degree {
        let next: Vec<f64> = (0..m - 1 - k)
            .map(|j| {
                let mut v = 0.0;
                let d1 = knots[j + k] - knots[j];
                if d1 > 0.0 {
                    v += (x - knots[j]) / d1 * b[j];
                }
                let d2 = knots[j + k + 1] - knots[j + 1];
                if d2 > 0.0 {
                    v += (knots[j + k + 1] - x) / d2 * b[j + 1];
                }
                v
            })
            .collect();
        b = next;
    }
    b
}

/// All `n_basis` basis values at `x` (clamped to the grid range).
pub fn bspline_basis(x: f64, grid: &SplineGrid) -> Vec<f64> {
    let (lo, hi) = grid.range();
    cox_de_boor(grid.knots(), grid.degree(), x.clamp(lo, hi))
}
