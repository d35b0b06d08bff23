//! Quickhull in three dimensions.
//!
//! Faces are kept as outward-oriented triangles over input indices. Points
//! within `1e-9 * extent` of a face plane count as on the plane, so coplanar
//! and duplicate points never create new faces.

use std::collections::{HashMap, VecDeque};

use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullResult {
    pub volume: f64,
    pub vertex_count: usize,
    /// True iff the input has fewer than four affinely independent points,
    /// in which case `volume` is zero.
    pub degenerate: bool,
}

/// A closed triangulated convex polytope over a point set.
#[derive(Debug, Clone)]
pub struct Hull {
    /// Input indices of hull vertices, ascending.
    pub vertices: Vec<usize>,
    /// Outward (counter-clockwise seen from outside) triangles.
    pub faces: Vec<[usize; 3]>,
    /// Unit outward normal and plane offset per face: `n · x = offset`.
    pub planes: Vec<(Vec3, f64)>,
    pub volume: f64,
}

impl Hull {
    /// True if `p` lies inside or on the hull, within `tol` of every face plane.
    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        self.planes.iter().all(|(n, off)| dot(n, p) - off <= tol)
    }
}

fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

struct Face {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(v: [usize; 3], pts: &[Vec3]) -> Face {
        let n = cross(&sub(&pts[v[1]], &pts[v[0]]), &sub(&pts[v[2]], &pts[v[0]]));
        let len = norm(&n);
        let normal = if len > 0.0 { [n[0] / len, n[1] / len, n[2] / len] } else { [0.0; 3] };
        Face {
            v,
            normal,
            offset: dot(&normal, &pts[v[0]]),
            outside: Vec::new(),
            alive: true,
        }
    }

    fn distance(&self, p: &Vec3) -> f64 {
        dot(&self.normal, p) - self.offset
    }

    fn edges(&self) -> [(usize, usize); 3] {
        [(self.v[0], self.v[1]), (self.v[1], self.v[2]), (self.v[2], self.v[0])]
    }
}

/// Finds four affinely independent extreme points, or `None`.
fn initial_simplex(pts: &[Vec3], eps: f64) -> Option<[usize; 4]> {
    let i0 = (0..pts.len())
        .min_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]))
        .unwrap();
    let i1 = (0..pts.len())
        .max_by(|&a, &b| crate::dist2(&pts[a], &pts[i0]).total_cmp(&crate::dist2(&pts[b], &pts[i0])))
        .unwrap();
    if crate::dist(&pts[i0], &pts[i1]) <= eps {
        return None;
    }
    let axis = sub(&pts[i1], &pts[i0]);
    let axis_len = norm(&axis);
    let line_dist = |p: &Vec3| norm(&cross(&axis, &sub(p, &pts[i0]))) / axis_len;
    let i2 = (0..pts.len())
        .max_by(|&a, &b| line_dist(&pts[a]).total_cmp(&line_dist(&pts[b])))
        .unwrap();
    if line_dist(&pts[i2]) <= eps {
        return None;
    }
    let plane = Face::new([i0, i1, i2], pts);
    let i3 = (0..pts.len())
        .max_by(|&a, &b| plane.distance(&pts[a]).abs().total_cmp(&plane.distance(&pts[b]).abs()))
        .unwrap();
    if plane.distance(&pts[i3]).abs() <= eps {
        return None;
    }
    Some([i0, i1, i2, i3])
}

/// Builds the convex hull, or `None` when the points span fewer than three
/// dimensions.
pub fn convex_hull(points: &[Vec3]) -> Option<Hull> {
    if points.len() < 4 || points.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
        return None;
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let extent = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    if extent <= 0.0 {
        return None;
    }
    let eps = 1e-9 * extent;
    let simplex = initial_simplex(points, eps)?;

    let mut centroid = [0.0; 3];
    for &i in &simplex {
        for k in 0..3 {
            centroid[k] += points[i][k] / 4.0;
        }
    }

    let mut faces: Vec<Face> = Vec::new();
    let mut edge_face: HashMap<(usize, usize), usize> = HashMap::new();
    let [a, b, c, d] = simplex;
    for tri in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        let mut f = Face::new(tri, points);
        if f.distance(&centroid) > 0.0 {
            f = Face::new([tri[0], tri[2], tri[1]], points);
        }
        for e in f.edges() {
            edge_face.insert(e, faces.len());
        }
        faces.push(f);
    }

    for (i, p) in points.iter().enumerate() {
        if simplex.contains(&i) {
            continue;
        }
        if let Some(f) = faces.iter_mut().find(|f| f.distance(p) > eps) {
            f.outside.push(i);
        }
    }

    let mut pending: Vec<usize> = (0..faces.len()).collect();
    while let Some(fi) = pending.pop() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        let apex = *faces[fi]
            .outside
            .iter()
            .max_by(|&&x, &&y| faces[fi].distance(&points[x]).total_cmp(&faces[fi].distance(&points[y])))
            .unwrap();
        let eye = points[apex];

        // Visible region grown across shared edges from the seed face.
        let mut visible = vec![fi];
        let mut is_visible: HashMap<usize, bool> = HashMap::from([(fi, true)]);
        let mut queue = VecDeque::from([fi]);
        while let Some(cur) = queue.pop_front() {
            for (u, v) in faces[cur].edges() {
                let nb = edge_face[&(v, u)];
                if is_visible.contains_key(&nb) {
                    continue;
                }
                let vis = faces[nb].distance(&eye) > eps;
                is_visible.insert(nb, vis);
                if vis {
                    visible.push(nb);
                    queue.push_back(nb);
                }
            }
        }

        let mut horizon = Vec::new();
        let mut orphans = Vec::new();
        for &vf in &visible {
            for (u, v) in faces[vf].edges() {
                let nb = edge_face[&(v, u)];
                if !is_visible.get(&nb).copied().unwrap_or(false) {
                    horizon.push((u, v));
                }
            }
            orphans.append(&mut faces[vf].outside);
            faces[vf].alive = false;
        }
        for &vf in &visible {
            for e in faces[vf].edges() {
                if edge_face.get(&e) == Some(&vf) {
                    edge_face.remove(&e);
                }
            }
        }

        let first_new = faces.len();
        for (u, v) in horizon {
            let f = Face::new([u, v, apex], points);
            for e in f.edges() {
                edge_face.insert(e, faces.len());
            }
            faces.push(f);
        }
        for p in orphans {
            if p == apex {
                continue;
            }
            if let Some(f) = faces[first_new..]
                .iter_mut()
                .find(|f| f.distance(&points[p]) > eps)
            {
                f.outside.push(p);
            }
        }
        pending.extend(first_new..faces.len());
    }

    let live: Vec<&Face> = faces.iter().filter(|f| f.alive).collect();
    let mut volume = 0.0;
    for f in &live {
        let pa = sub(&points[f.v[0]], &centroid);
        let pb = sub(&points[f.v[1]], &centroid);
        let pc = sub(&points[f.v[2]], &centroid);
        volume += dot(&pa, &cross(&pb, &pc)) / 6.0;
    }
    let mut vertices: Vec<usize> = live.iter().flat_map(|f| f.v).collect();
    vertices.sort_unstable();
    vertices.dedup();
    Some(Hull {
        vertices,
        faces: live.iter().map(|f| f.v).collect(),
        planes: live.iter().map(|f| (f.normal, f.offset)).collect(),
        volume,
    })
}

pub fn convex_hull_volume(points: &[Vec3]) -> HullResult {
    match convex_hull(points) {
        Some(h) => HullResult {
            volume: h.volume.max(0.0),
            vertex_count: h.vertices.len(),
            degenerate: false,
        },
        None => HullResult {
            volume: 0.0,
            vertex_count: 0,
            degenerate: true,
        },
    }
}
