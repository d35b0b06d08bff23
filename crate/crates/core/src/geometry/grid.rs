use std::collections::HashMap;

use crate::Vec3;

/// Uniform hash grid over a fixed point set. Immutable after construction.
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    cell_size: f64,
    cells: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl SpatialGrid {
    /// # Panics
    /// If `cell_size` is not strictly positive and finite.
    pub fn new(points: &[Vec3], cell_size: f64) -> Self {
        assert!(cell_size > 0.0 && cell_size.is_finite(), "cell_size must be > 0");
        let mut cells: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::cell_of(p, cell_size)).or_default().push(i);
        }
        SpatialGrid { cell_size, cells }
    }

    fn cell_of(p: &Vec3, size: f64) -> (i64, i64, i64) {
        (
            (p[0] / size).floor() as i64,
            (p[1] / size).floor() as i64,
            (p[2] / size).floor() as i64,
        )
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cell(&self, key: (i64, i64, i64)) -> &[usize] {
        self.cells.get(&key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Indices of all points whose cell overlaps the cube of half-width
    /// `radius` around `p`. A superset of the points within `radius`.
    pub fn candidates(&self, p: &Vec3, radius: f64) -> impl Iterator<Item = usize> + '_ {
        let reach = (radius / self.cell_size).ceil().max(1.0) as i64;
        let (cx, cy, cz) = Self::cell_of(p, self.cell_size);
        (-reach..=reach).flat_map(move |dx| {
            (-reach..=reach).flat_map(move |dy| {
                (-reach..=reach).flat_map(move |dz| self.cell((cx + dx, cy + dy, cz + dz)).iter().copied())
            })
        })
    }

    /// Indices of points within `radius` (inclusive) of `p`, given the point
    /// set the grid was built from.
    pub fn within<'a>(&'a self, points: &'a [Vec3], p: &'a Vec3, radius: f64) -> impl Iterator<Item = usize> + 'a {
        let r2 = radius * radius;
        self.candidates(p, radius)
            .filter(move |&j| crate::dist2(&points[j], p) <= r2)
    }
}

/// All `(i, j)` with `|a[i] - b[j]| <= cutoff`, sorted. Uses a grid over `b`
/// with cell size equal to the cutoff.
pub fn neighbor_pairs(a: &[Vec3], b: &[Vec3], cutoff: f64) -> Vec<(usize, usize)> {
    if a.is_empty() || b.is_empty() || !(cutoff > 0.0) {
        return Vec::new();
    }
    let grid = SpatialGrid::new(b, cutoff);
    let mut out = Vec::new();
    for (i, p) in a.iter().enumerate() {
        let mut hits: Vec<usize> = grid.within(b, p, cutoff).collect();
        hits.sort_unstable();
        out.extend(hits.into_iter().map(|j| (i, j)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(a: &[Vec3], b: &[Vec3], cutoff: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, p) in a.iter().enumerate() {
            for (j, q) in b.iter().enumerate() {
                let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
                if d <= cutoff {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn boundary_inclusive() {
        let pairs = neighbor_pairs(&[[0.0; 3]], &[[6.0, 0.0, 0.0]], 6.0);
        assert_eq!(pairs, vec![(0, 0)]);
        assert!(neighbor_pairs(&[[0.0; 3]], &[[6.001, 0.0, 0.0]], 6.0).is_empty());
    }

    #[test]
    fn empty_inputs() {
        assert!(neighbor_pairs(&[], &[[0.0; 3]], 6.0).is_empty());
    }

    #[test]
    fn every_point_retrievable() {
        let pts: Vec<Vec3> = (0..50).map(|i| [i as f64 * 0.7 - 10.0, (i * 3 % 7) as f64, -(i as f64)]).collect();
        let g = SpatialGrid::new(&pts, 2.5);
        for (i, p) in pts.iter().enumerate() {
            assert!(g.within(&pts, p, 0.0).any(|j| j == i));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn equals_brute_force(seed in any::<u64>(), cutoff in 1.0f64..8.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut cloud = |n: usize| -> Vec<Vec3> {
                (0..n).map(|_| [rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)]).collect()
            };
            let a = cloud(200);
            let b = cloud(200);
            prop_assert_eq!(neighbor_pairs(&a, &b, cutoff), brute(&a, &b, cutoff));
        }
    }
}
