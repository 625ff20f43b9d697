//! Geodesic polar meshes of hyperbolic balls `B(o, R)`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::DirichletError;
use crate::hyperbolic::{dist, BPoint, HPoint};
use crate::linalg::Vector;
use crate::sphere::fibonacci_nodes;
use crate::Real;

pub const RADIUS_RANGE: (f64, f64) = (0.5, 8.0);
pub const SPACING_RANGE: (f64, f64) = (0.01, 0.5);

/// Edge weights of the discrete Dirichlet energy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeWeights {
    /// Every edge weighs 1.
    Uniform,
    /// `(cot a + cot b) / 2` from the angles opposite the edge in the
    /// triangulation of the disc chart. The planar Dirichlet energy is
    /// conformally invariant, so these are the cotangent weights of the
    /// hyperbolic plane as well. Available when the domain is two-dimensional.
    #[default]
    Cotangent,
}

/// Vertices on concentric geodesic spheres `S(o, k R / K)`, `k = 0..=K`, with
/// weighted adjacency.
#[derive(Clone, Debug)]
pub struct BallMesh<T> {
    vertices: Vec<HPoint<T>>,
    boundary: Vec<bool>,
    neighbors: Vec<Vec<(usize, T)>>,
    /// Index of the first vertex of each ring, plus the total count.
    ring_starts: Vec<usize>,
    radius: T,
    spacing: T,
    weights: EdgeWeights,
}

impl<T: Real> BallMesh<T> {
    pub fn vertices(&self) -> &[HPoint<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    /// Neighbors of `v` with their edge weights.
    pub fn neighbors(&self, v: usize) -> &[(usize, T)] {
        &self.neighbors[v]
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn edge_weights(&self) -> EdgeWeights {
        self.weights
    }

    /// Ambient dimension of the ball.
    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn ring_count(&self) -> usize {
        self.ring_starts.len() - 1
    }

    /// Radial distance between consecutive rings.
    pub fn ring_step(&self) -> T {
        self.radius / T::lit(self.ring_count() as f64 - 1.0)
    }

    pub fn ring(&self, k: usize) -> std::ops::Range<usize> {
        self.ring_starts[k]..self.ring_starts[k + 1]
    }

    /// Each undirected edge once, as `(i, j, weight)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().filter(move |(j, _)| *j > i).map(move |(j, w)| (i, *j, *w)))
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for (u, _) in &self.neighbors[v] {
                if !seen[*u] {
                    seen[*u] = true;
                    stack.push(*u);
                }
            }
        }
        seen.iter().all(|s| *s)
    }

    /// Greedy coloring such that no two neighbors share a color; vertices of
    /// one class can be updated simultaneously.
    pub fn color_classes(&self) -> Vec<Vec<usize>> {
        let mut color = vec![usize::MAX; self.len()];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for v in 0..self.len() {
            let mut used: Vec<usize> = self.neighbors[v].iter().map(|(u, _)| color[*u]).collect();
            used.sort_unstable();
            let mut c = 0;
            for u in used {
                if u == c {
                    c += 1;
                } else if u > c {
                    break;
                }
            }
            color[v] = c;
            if classes.len() <= c {
                classes.resize(c + 1, Vec::new());
            }
            classes[c].push(v);
        }
        classes
    }

    /// Up to `per_ring` vertices from each of the three rings around the
    /// radius of `p`, closest in direction to `p`.
    pub fn nearby(&self, p: &HPoint<T>, per_ring: usize) -> Vec<usize> {
        let step = self.ring_step();
        let k = (p.radius() / step).floor().to_f64_lossy().max(0.0) as usize;
        let k = k.min(self.ring_count() - 1);
        let dir = p.coords().normalized();
        let mut out = Vec::new();
        for ring in [k.saturating_sub(1), k, (k + 1).min(self.ring_count() - 1)] {
            let range = self.ring(ring);
            if out.iter().any(|v| range.contains(v)) {
                continue;
            }
            let Some(dir) = dir else {
                out.extend(range.take(per_ring));
                continue;
            };
            let mut scored: Vec<(T, usize)> = range
                .map(|v| {
                    let u = self.vertices[v].coords().normalized().unwrap_or(dir);
                    (-(u.dot(&dir)), v)
                })
                .collect();
            let take = per_ring.min(scored.len());
            scored.select_nth_unstable_by(take - 1, |a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            out.extend(scored[..take].iter().map(|s| s.1));
        }
        out
    }
}

fn check_parameters(radius: f64, spacing: f64) -> Result<(), DirichletError> {
    if !(RADIUS_RANGE.0..=RADIUS_RANGE.1).contains(&radius) {
        return Err(DirichletError::RadiusOutOfRange(radius));
    }
    if !(SPACING_RANGE.0..=SPACING_RANGE.1).contains(&spacing) {
        return Err(DirichletError::SpacingOutOfRange(spacing));
    }
    Ok(())
}

/// Polar mesh of `B(o, R)` in `H^{n+1}` with edge lengths close to `h`.
/// The domain is two-dimensional for `n = 1`, where vertices on circles are
/// joined by stitching consecutive circles, and three-dimensional for `n = 2`,
/// where Fibonacci spheres are joined within distance `1.5 h`.
pub fn build_mesh<T: Real>(n: usize, radius: f64, spacing: f64, weights: EdgeWeights) -> Result<BallMesh<T>, DirichletError> {
    check_parameters(radius, spacing)?;
    let rings = (radius / spacing).ceil() as usize;
    let step = radius / rings as f64;
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut dirs: Vec<Vec<Vector<f64>>> = vec![vec![]];
    for k in 1..=rings {
        let r = k as f64 * step;
        let ring: Vec<Vector<f64>> = match n {
            1 => {
                let count = ((2.0 * std::f64::consts::PI * r.sinh() / spacing).ceil() as usize).max(3);
                let offset = (k as f64 * golden).fract();
                (0..count)
                    .map(|i| {
                        let t = 2.0 * std::f64::consts::PI * (i as f64 + offset) / count as f64;
                        Vector::from_f64(&[t.cos(), t.sin()])
                    })
                    .collect()
            }
            2 => {
                let area = 4.0 * std::f64::consts::PI * r.sinh().powi(2);
                let count = ((area / (spacing * spacing * 0.75f64.sqrt())).round() as usize).max(4);
                let twist = 2.0 * std::f64::consts::PI * (k as f64 * golden).fract();
                let (s, c) = twist.sin_cos();
                fibonacci_nodes::<f64>(count)
                    .iter()
                    .map(|p| {
                        let v = p.as_vector();
                        Vector::from_f64(&[c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]])
                    })
                    .collect()
            }
            _ => return Err(DirichletError::UnsupportedSphere(n)),
        };
        dirs.push(ring);
    }
    let dim = n + 1;
    let mut vertices = vec![HPoint::origin(dim)];
    let mut ring_starts = vec![0, 1];
    for (k, ring) in dirs.iter().enumerate().skip(1) {
        let t = T::lit(k as f64 * step);
        for d in ring {
            let dir = BPoint::new(d.cast()).map_err(DirichletError::Geometry)?;
            vertices.push(HPoint::radial(&dir, t));
        }
        ring_starts.push(vertices.len());
    }
    let boundary_start = ring_starts[rings];
    let boundary: Vec<bool> = (0..vertices.len()).map(|v| v >= boundary_start).collect();
    let neighbors = match (n, weights) {
        (1, _) => planar_adjacency(&vertices, &ring_starts, weights),
        (_, EdgeWeights::Uniform) => spatial_adjacency(&vertices, &ring_starts, 1.5 * spacing),
        (_, EdgeWeights::Cotangent) => return Err(DirichletError::UnsupportedWeights),
    };
    let mesh = BallMesh {
        vertices,
        boundary,
        neighbors,
        ring_starts,
        radius: T::lit(radius),
        spacing: T::lit(spacing),
        weights,
    };
    if !mesh.is_connected() {
        return Err(DirichletError::Disconnected);
    }
    Ok(mesh)
}

/// Triangulates the disc chart by stitching consecutive circles in angular
/// order (the origin is fanned to the first circle, and each step of the
/// merged angular sweep of two circles closes one triangle), then flipping
/// to a Delaunay triangulation.
fn planar_adjacency<T: Real>(vertices: &[HPoint<T>], ring_starts: &[usize], weights: EdgeWeights) -> Vec<Vec<(usize, T)>> {
    let points: Vec<[f64; 2]> = vertices
        .iter()
        .map(|v| {
            let c = v.coords().to_f64_vec();
            [c[0], c[1]]
        })
        .collect();
    let angle = |v: usize| points[v][1].atan2(points[v][0]).rem_euclid(2.0 * std::f64::consts::PI);
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let first = ring_starts[1]..ring_starts[2];
    for v in first.clone() {
        let next = if v + 1 == first.end { first.start } else { v + 1 };
        triangles.push([0, v, next]);
    }
    for k in 1..ring_starts.len() - 2 {
        let mut sweep: Vec<(f64, bool, usize)> = (ring_starts[k]..ring_starts[k + 1])
            .map(|v| (angle(v), false, v))
            .chain((ring_starts[k + 1]..ring_starts[k + 2]).map(|v| (angle(v), true, v)))
            .collect();
        sweep.sort_by(|a, b| a.0.total_cmp(&b.0));
        let last = |outer: bool| sweep.iter().rev().find(|s| s.1 == outer).map(|s| s.2);
        let (Some(mut inner), Some(mut outer)) = (last(false), last(true)) else { continue };
        for &(_, on_outer, v) in &sweep {
            if on_outer {
                triangles.push([inner, outer, v]);
                outer = v;
            } else {
                triangles.push([inner, outer, v]);
                inner = v;
            }
        }
    }
    delaunay_flips(&points, &mut triangles);
    let mut cot: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for t in &triangles {
        for k in 0..3 {
            let (a, b, apex) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            *cot.entry(edge(a, b)).or_insert(0.0) += 0.5 * cotangent(points[a], points[b], points[apex]);
        }
    }
    let mut neighbors = vec![Vec::new(); vertices.len()];
    for ((a, b), w) in cot {
        let w = match weights {
            EdgeWeights::Uniform => 1.0,
            EdgeWeights::Cotangent if w > 1e-9 => w,
            EdgeWeights::Cotangent => continue,
        };
        neighbors[a].push((b, T::lit(w)));
        neighbors[b].push((a, T::lit(w)));
    }
    for nb in &mut neighbors {
        nb.sort_by_key(|(v, _)| *v);
    }
    neighbors
}

fn edge(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Cotangent of the angle at `apex` in the triangle `(p, q, apex)`.
fn cotangent(p: [f64; 2], q: [f64; 2], apex: [f64; 2]) -> f64 {
    let (ux, uy) = (p[0] - apex[0], p[1] - apex[1]);
    let (vx, vy) = (q[0] - apex[0], q[1] - apex[1]);
    (ux * vx + uy * vy) / (ux * vy - uy * vx).abs()
}

/// Lawson flips until every interior edge has opposite angles summing to at
/// most `pi`, which makes the triangulation Delaunay.
fn delaunay_flips(points: &[[f64; 2]], triangles: &mut [[usize; 3]]) {
    let mut owners: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            owners.entry(edge(tri[k], tri[(k + 1) % 3])).or_default().push(t);
        }
    }
    let apex = |tri: &[usize; 3], a: usize, b: usize| *tri.iter().find(|v| **v != a && **v != b).expect("triangle has three vertices");
    let mut queue: Vec<(usize, usize)> = owners.keys().copied().collect();
    queue.sort_unstable();
    while let Some((a, b)) = queue.pop() {
        let Some(pair) = owners.get(&(a, b)).filter(|o| o.len() == 2).cloned() else { continue };
        let (t, u) = (pair[0], pair[1]);
        let (c, d) = (apex(&triangles[t], a, b), apex(&triangles[u], a, b));
        let sum = cotangent(points[a], points[b], points[c]) + cotangent(points[a], points[b], points[d]);
        if sum >= -1e-12 {
            continue;
        }
        owners.remove(&(a, b));
        triangles[t] = [a, c, d];
        triangles[u] = [b, c, d];
        for (e, from, to) in [(edge(b, c), t, u), (edge(a, d), u, t)] {
            if let Some(o) = owners.get_mut(&e) {
                o.iter_mut().filter(|x| **x == from).for_each(|x| *x = to);
            }
        }
        owners.insert(edge(c, d), vec![t, u]);
        queue.extend([edge(a, c), edge(a, d), edge(b, c), edge(b, d)]);
    }
}

/// Joins vertices on the same or adjacent rings within `cutoff`. Fibonacci
/// rings are sorted by height, so candidates come from a height band.
fn spatial_adjacency<T: Real>(vertices: &[HPoint<T>], ring_starts: &[usize], cutoff: f64) -> Vec<Vec<(usize, T)>> {
    let rings = ring_starts.len() - 1;
    let unit: Vec<Vector<f64>> = vertices
        .iter()
        .map(|v| v.coords().cast::<f64>().normalized().unwrap_or(Vector::from_f64(&[0.0, 0.0, 1.0])))
        .collect();
    let radius: Vec<f64> = vertices.iter().map(|v| v.radius().to_f64_lossy()).collect();
    let mut neighbors = vec![Vec::new(); vertices.len()];
    for k in 0..rings {
        for j in k..(k + 2).min(rings) {
            let (lo, hi) = (ring_starts[j], ring_starts[j + 1]);
            for a in ring_starts[k]..ring_starts[k + 1] {
                // Angular radius at which two points on these spheres are
                // `cutoff` apart, by the hyperbolic law of cosines.
                let (ra, rb) = (radius[a], radius[lo]);
                let cos_max = if ra == 0.0 || rb == 0.0 {
                    -1.0
                } else {
                    ((ra.cosh() * rb.cosh() - cutoff.cosh()) / (ra.sinh() * rb.sinh())).clamp(-1.0, 1.0)
                };
                let angle = cos_max.acos();
                let za = unit[a][2];
                let polar = za.clamp(-1.0, 1.0).acos();
                let z_top = (polar - angle).max(0.0).cos();
                let z_bottom = (polar + angle).min(std::f64::consts::PI).cos();
                // Heights decrease with the index inside a ring.
                let start = lo + unit[lo..hi].partition_point(|u| u[2] > z_top + 1e-12);
                let end = lo + unit[lo..hi].partition_point(|u| u[2] >= z_bottom - 1e-12);
                for b in start..end.max(start) {
                    if b <= a && j == k {
                        continue;
                    }
                    if ra != 0.0 && rb != 0.0 && unit[a].dot(&unit[b]) < cos_max {
                        continue;
                    }
                    if dist(&vertices[a], &vertices[b]).to_f64_lossy() <= cutoff {
                        neighbors[a].push((b, T::one()));
                        neighbors[b].push((a, T::one()));
                    }
                }
            }
        }
    }
    for nb in &mut neighbors {
        nb.sort_by_key(|(v, _)| *v);
    }
    neighbors
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_disc_is_connected() {
        let mesh = build_mesh::<f64>(1, 1.0, 0.5, EdgeWeights::Cotangent).unwrap();
        assert!(mesh.ring_count() >= 3 && mesh.is_connected());
        assert!(build_mesh::<f64>(1, 20.0, 0.1, EdgeWeights::Uniform).is_err());
        assert!(build_mesh::<f64>(1, 2.0, 0.001, EdgeWeights::Uniform).is_err());
    }

    #[test]
    fn edges_have_the_requested_scale() {
        for (n, r, h) in [(1, 2.0, 0.1), (1, 1.0, 0.5), (2, 1.5, 0.25)] {
            let weights = if n == 1 { EdgeWeights::Cotangent } else { EdgeWeights::Uniform };
            let mesh = build_mesh::<f64>(n, r, h, weights).unwrap();
            for (i, j, w) in mesh.edges() {
                let len = dist(&mesh.vertices()[i], &mesh.vertices()[j]);
                assert!(len >= h / 2.0 && len <= 2.0 * h, "{n} {r} {h}: edge {i}-{j} has length {len}");
                assert!(w > 0.0);
            }
            for v in 0..mesh.len() {
                if !mesh.is_boundary(v) {
                    assert!(mesh.neighbors(v).len() >= 2);
                }
            }
        }
    }

    #[test]
    fn boundary_lies_on_the_sphere() {
        for n in [1, 2] {
            let weights = if n == 1 { EdgeWeights::Cotangent } else { EdgeWeights::Uniform };
            let mesh = build_mesh::<f64>(n, 2.0, 0.3, weights).unwrap();
            let mut count = 0;
            for (v, p) in mesh.vertices().iter().enumerate() {
                if mesh.is_boundary(v) {
                    assert!((p.radius() - 2.0).abs() < 1e-9);
                    count += 1;
                }
            }
            assert!(count > 0);
        }
    }

    #[test]
    fn coloring_separates_neighbors() {
        let mesh = build_mesh::<f64>(1, 1.5, 0.2, EdgeWeights::Cotangent).unwrap();
        let classes = mesh.color_classes();
        let mut color = vec![0; mesh.len()];
        for (c, class) in classes.iter().enumerate() {
            for v in class {
                color[*v] = c;
            }
        }
        for (i, j, _) in mesh.edges() {
            assert_ne!(color[i], color[j]);
        }
    }
}
