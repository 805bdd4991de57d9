//! Small meshes shipped with the crate: marked disks, 3-fold symmetric spheres and a flat torus.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::construct::{ConstructError, MarkedDisk};
use crate::energy::cotan_weights;
use crate::mesh::SurfaceMesh;
use crate::scalar::{cross3, dot3, norm3, orient2, sub3};

/// A planar disk with suggested marks.
#[derive(Debug, Clone)]
pub struct DiskFixture {
    pub mesh: SurfaceMesh<f64>,
    pub marks: Vec<usize>,
}

impl DiskFixture {
    pub fn marked(&self) -> MarkedDisk<f64> {
        MarkedDisk::new(self.mesh.clone(), self.marks.clone()).expect("fixture marks are valid")
    }

    pub fn with_marks(&self, marks: Vec<usize>) -> Result<MarkedDisk<f64>, ConstructError> {
        MarkedDisk::new(self.mesh.clone(), marks)
    }
}

/// A sphere with an order-3 symmetry fixing `p_o`, and a good seed for the cut paths.
#[derive(Debug, Clone)]
pub struct SphereFixture {
    pub mesh: SurfaceMesh<f64>,
    pub p_o: usize,
    pub sigma: Vec<usize>,
    pub seed_target: usize,
}

fn planar(points: &[[f64; 2]], faces: Vec<[usize; 3]>) -> SurfaceMesh<f64> {
    SurfaceMesh::new(points.iter().map(|p| [p[0], p[1], 0.0]).collect(), faces).expect("fixture mesh is valid")
}

/// One acute triangle.
pub fn single_triangle() -> DiskFixture {
    DiskFixture { mesh: planar(&[[0.0, 0.0], [1.0, 0.0], [0.4, 0.9]], vec![[0, 1, 2]]), marks: vec![0, 1, 2] }
}

/// Unit square split along a diagonal; all four corners marked.
pub fn quad() -> DiskFixture {
    DiskFixture {
        mesh: planar(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![[0, 1, 2], [0, 2, 3]]),
        marks: vec![0, 1, 2, 3],
    }
}

/// Unit square fanned around its center vertex 4; all four corners marked.
pub fn square_fan() -> DiskFixture {
    DiskFixture {
        mesh: planar(
            &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]],
            vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]],
        ),
        marks: vec![0, 1, 2, 3],
    }
}

/// Equilateral triangle subdivided into `n^2` congruent triangles, corners marked. Mirror
/// symmetric about the height through the first corner.
pub fn symmetric_disk(n: usize) -> DiskFixture {
    assert!(n >= 1);
    let mut index = HashMap::new();
    let mut pts = Vec::new();
    let h = 3f64.sqrt() / 2.0;
    for j in 0..=n {
        for i in 0..=n - j {
            index.insert((i, j), pts.len());
            pts.push([(i as f64 + 0.5 * j as f64) / n as f64, h * j as f64 / n as f64]);
        }
    }
    let mut faces = Vec::new();
    for j in 0..n {
        for i in 0..n - j {
            faces.push([index[&(i, j)], index[&(i + 1, j)], index[&(i, j + 1)]]);
            if i + j + 1 < n {
                faces.push([index[&(i + 1, j)], index[&(i + 1, j + 1)], index[&(i, j + 1)]]);
            }
        }
    }
    let marks = vec![index[&(0, 0)], index[&(n, 0)], index[&(0, n)]];
    DiskFixture { mesh: planar(&pts, faces), marks }
}

/// Delaunay triangulation of random points in the unit disk, with 3 marks spread around the
/// boundary. See [`random_delaunay_disk_marked`].
pub fn random_delaunay_disk(n: usize, seed: u64) -> DiskFixture {
    random_delaunay_disk_marked(n, seed, 3)
}

/// Delaunay triangulation of about `n` points: jittered points on the unit circle plus random
/// interior points, with `marks` boundary vertices at roughly equal angles. Samples are redrawn
/// deterministically until every cotangent weight is positive and no interior edge joins two
/// vertices of one boundary path.
pub fn random_delaunay_disk_marked(n: usize, seed: u64, marks: usize) -> DiskFixture {
    assert!(n >= 8 && marks >= 3);
    let nb = ((3.5 * (n as f64).sqrt()).round() as usize).clamp(2 * marks, n - 3);
    for attempt in 0u64..10_000 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(attempt));
        let step = 2.0 * PI / nb as f64;
        let mut pts: Vec<[f64; 2]> = (0..nb)
            .map(|i| {
                let a = step * (i as f64 + rng.random_range(-0.3..0.3));
                [a.cos(), a.sin()]
            })
            .collect();
        let min_dist = 0.7 / ((n - nb) as f64).sqrt();
        let mut tries = 0;
        while pts.len() < n && tries < 100_000 {
            tries += 1;
            let p = [rng.random_range(-0.88..0.88), rng.random_range(-0.88..0.88)];
            if p[0] * p[0] + p[1] * p[1] > 0.88 * 0.88 {
                continue;
            }
            if pts.iter().all(|q| (q[0] - p[0]).hypot(q[1] - p[1]) >= min_dist) {
                pts.push(p);
            }
        }
        if pts.len() < n {
            continue;
        }
        let tri = delaunator::triangulate(&pts.iter().map(|p| delaunator::Point { x: p[0], y: p[1] }).collect::<Vec<_>>());
        let faces: Vec<[usize; 3]> = tri
            .triangles
            .chunks(3)
            .map(|t| if orient2(pts[t[0]], pts[t[1]], pts[t[2]]) > 0.0 { [t[0], t[1], t[2]] } else { [t[0], t[2], t[1]] })
            .collect();
        let Ok(mesh) = SurfaceMesh::new(pts.iter().map(|p| [p[0], p[1], 0.0]).collect(), faces) else { continue };
        if !mesh.zero_area_faces(1e-6).is_empty() {
            continue;
        }
        match mesh.boundary_loop() {
            Ok(bl) if bl.len() == nb => {}
            _ => continue,
        }
        if !cotan_weights(&mesh).edge_weights().iter().all(|&w| w > 1e-9) {
            continue;
        }
        let marks: Vec<usize> = (0..marks).map(|j| (j * nb + marks / 2) / marks).collect();
        let Ok(d) = MarkedDisk::new(mesh.clone(), marks.clone()) else { continue };
        if !d.same_side_chords().is_empty() {
            continue;
        }
        return DiskFixture { mesh, marks };
    }
    panic!("no admissible Delaunay disk for n = {n}, seed = {seed}");
}

fn oriented_outward(pts: &[[f64; 3]], mut faces: Vec<[usize; 3]>, center: [f64; 3]) -> Vec<[usize; 3]> {
    for f in &mut faces {
        let [a, b, c] = f.map(|v| pts[v]);
        let n = cross3(sub3(b, a), sub3(c, a));
        let centroid = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0, (a[2] + b[2] + c[2]) / 3.0];
        if dot3(n, sub3(centroid, center)) < 0.0 {
            f.swap(1, 2);
        }
    }
    faces
}

/// Regular tetrahedron with apex 0 on the z axis; `sigma` rotates the base `1 -> 2 -> 3`.
pub fn tetrahedron() -> SphereFixture {
    let r = 8f64.sqrt() / 3.0;
    let mut pts = vec![[0.0, 0.0, 1.0]];
    for i in 0..3 {
        let a = 2.0 * PI * i as f64 / 3.0;
        pts.push([r * a.cos(), r * a.sin(), -1.0 / 3.0]);
    }
    let faces = oriented_outward(&pts, vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]], [0.0; 3]);
    SphereFixture {
        mesh: SurfaceMesh::new(pts, faces).expect("tetrahedron is valid"),
        p_o: 0,
        sigma: vec![0, 2, 3, 1],
        seed_target: 1,
    }
}

/// Triangular bipyramid refined `levels` times by midpoint subdivision and projected to the unit
/// sphere, then deformed by a twist about the z axis and an egg-shaped radial stretch. Both
/// deformations commute with the rotation by a third of a turn, so `sigma` is exact. `p_o` is
/// the north pole; the seed target is the first equator vertex.
pub fn symmetric_sphere(levels: usize, twist: f64, stretch: f64) -> SphereFixture {
    let mut pts: Vec<[f64; 3]> = vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
    for i in 0..3 {
        let a = 2.0 * PI * i as f64 / 3.0;
        pts.push([a.cos(), a.sin(), 0.0]);
    }
    let mut faces: Vec<[usize; 3]> = (0..3).flat_map(|i| [[0, 2 + i, 2 + (i + 1) % 3], [1, 2 + (i + 1) % 3, 2 + i]]).collect();
    faces = oriented_outward(&pts, faces, [0.0; 3]);
    for _ in 0..levels {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut m = [0; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                m[k] = *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let p = [(pts[a][0] + pts[b][0]) / 2.0, (pts[a][1] + pts[b][1]) / 2.0, (pts[a][2] + pts[b][2]) / 2.0];
                    let l = norm3(p);
                    pts.push([p[0] / l, p[1] / l, p[2] / l]);
                    pts.len() - 1
                });
            }
            next.push([f[0], m[0], m[2]]);
            next.push([m[0], f[1], m[1]]);
            next.push([m[2], m[1], f[2]]);
            next.push([m[0], m[1], m[2]]);
        }
        faces = next;
    }
    let third = |p: [f64; 3]| {
        let (c, s) = ((2.0 * PI / 3.0).cos(), (2.0 * PI / 3.0).sin());
        [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]]
    };
    let sigma: Vec<usize> = pts
        .iter()
        .map(|&p| {
            let q = third(p);
            pts.iter().position(|&r| norm3(sub3(r, q)) < 1e-9).expect("subdivision is 3-fold symmetric")
        })
        .collect();
    let deformed: Vec<[f64; 3]> = pts
        .iter()
        .map(|p| {
            let z = p[2];
            let (c, s) = ((twist * z).cos(), (twist * z).sin());
            let r = 1.0 + stretch * z;
            [r * (c * p[0] - s * p[1]), r * (s * p[0] + c * p[1]), r * z]
        })
        .collect();
    delaunay_flips(&deformed, &mut faces, &sigma);
    SphereFixture {
        mesh: SurfaceMesh::new(deformed, faces).expect("subdivided sphere is valid"),
        p_o: 0,
        sigma,
        seed_target: 2,
    }
}

fn opposite_angle(pts: &[[f64; 3]], a: usize, b: usize, c: usize) -> f64 {
    let (u, v) = (sub3(pts[a], pts[c]), sub3(pts[b], pts[c]));
    (dot3(u, v) / (norm3(u) * norm3(v))).clamp(-1.0, 1.0).acos()
}

/// Flips edges whose opposite angles sum past pi, one `sigma` orbit at a time.
fn delaunay_flips(pts: &[[f64; 3]], faces: &mut [[usize; 3]], sigma: &[usize]) {
    let find = |faces: &[[usize; 3]], a: usize, b: usize| {
        faces.iter().enumerate().find_map(|(f, t)| (0..3).find(|&k| t[k] == a && t[(k + 1) % 3] == b).map(|k| (f, t[(k + 2) % 3])))
    };
    let bad = |faces: &[[usize; 3]], a: usize, b: usize| -> Option<(usize, usize, usize, usize)> {
        let (f, c) = find(faces, a, b)?;
        let (g, d) = find(faces, b, a)?;
        if c == d || find(faces, c, d).is_some() || find(faces, d, c).is_some() {
            return None;
        }
        (opposite_angle(pts, a, b, c) + opposite_angle(pts, a, b, d) > PI + 1e-9).then_some((f, g, c, d))
    };
    for _ in 0..faces.len() {
        let Some((a, b)) = faces.iter().flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3]))).find(|&(a, b)| bad(faces, a, b).is_some()) else {
            return;
        };
        let (mut a, mut b) = (a, b);
        for _ in 0..3 {
            if let Some((f, g, c, d)) = bad(faces, a, b) {
                faces[f] = [c, d, b];
                faces[g] = [d, c, a];
            }
            (a, b) = (sigma[a], sigma[b]);
        }
    }
}

/// An `n x n` grid triangulation of the flat square torus, with its identity map onto
/// `R^2 / Z^2`.
#[derive(Debug, Clone)]
pub struct FlatTorusFixture {
    /// Grid vertices placed on a torus of revolution; only the combinatorics are flat.
    pub mesh: SurfaceMesh<f64>,
    /// Cotangent of the flat angle opposite every halfedge.
    pub flat_cotangents: Vec<f64>,
    pub uv: Vec<[f64; 2]>,
    /// Lattice translation, in unit-square coefficients, from the lift of each halfedge's
    /// origin to the lift of its head.
    pub jumps: Vec<[i64; 2]>,
}

pub fn flat_torus(n: usize) -> FlatTorusFixture {
    assert!(n >= 3, "grid torus needs at least 3 cells per side");
    let id = |i: usize, j: usize| (i % n) + n * (j % n);
    let mut faces = Vec::with_capacity(2 * n * n);
    let mut corners: Vec<[[usize; 2]; 3]> = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = ([i, j], [i + 1, j], [i + 1, j + 1], [i, j + 1]);
            for tri in [[a, b, c], [a, c, d]] {
                faces.push(tri.map(|p| id(p[0], p[1])));
                corners.push(tri);
            }
        }
    }
    let s = 1.0 / n as f64;
    let uv: Vec<[f64; 2]> = (0..n * n).map(|v| [(v % n) as f64 * s, (v / n) as f64 * s]).collect();
    let mut jumps = Vec::with_capacity(6 * n * n);
    let mut flat_cotangents = Vec::with_capacity(6 * n * n);
    for tri in &corners {
        let p = tri.map(|q| [q[0] as f64 * s, q[1] as f64 * s]);
        for k in 0..3 {
            let (u, v) = (tri[k], tri[(k + 1) % 3]);
            jumps.push([(v[0] / n) as i64 - (u[0] / n) as i64, (v[1] / n) as i64 - (u[1] / n) as i64]);
            let o = p[(k + 2) % 3];
            let (x, y) = ([p[k][0] - o[0], p[k][1] - o[1]], [p[(k + 1) % 3][0] - o[0], p[(k + 1) % 3][1] - o[1]]);
            flat_cotangents.push((x[0] * y[0] + x[1] * y[1]) / (x[0] * y[1] - x[1] * y[0]).abs());
        }
    }
    let positions = (0..n * n)
        .map(|v| {
            let (a, b) = (2.0 * PI * uv[v][0], 2.0 * PI * uv[v][1]);
            [(2.0 + b.cos()) * a.cos(), (2.0 + b.cos()) * a.sin(), b.sin()]
        })
        .collect();
    let mesh = SurfaceMesh::new(positions, faces).expect("grid torus is valid");
    FlatTorusFixture { mesh, flat_cotangents, uv, jumps }
}

/// The symmetric sphere used by the test suite.
pub fn default_symmetric_sphere() -> SphereFixture {
    symmetric_sphere(2, 0.4, 0.15)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::check_sigma;

    #[test]
    fn random_disk_is_deterministic_and_admissible() {
        let a = random_delaunay_disk(50, 7);
        let b = random_delaunay_disk(50, 7);
        assert_eq!(a.mesh.faces(), b.mesh.faces());
        assert_eq!(a.mesh.positions(), b.mesh.positions());
        assert_eq!(a.mesh.n_vertices(), 50);
        assert!(a.mesh.classify().is_disk());
        assert!(cotan_weights(&a.mesh).all_positive());
        assert!(a.marked().same_side_chords().is_empty());
        let four = random_delaunay_disk_marked(50, 7, 4);
        assert_eq!(four.marks.len(), 4);
        assert!(four.marked().same_side_chords().is_empty());
    }

    #[test]
    fn symmetric_disk_counts() {
        let d = symmetric_disk(3);
        assert_eq!(d.mesh.n_vertices(), 10);
        assert_eq!(d.mesh.n_faces(), 9);
        assert!(d.mesh.classify().is_disk());
    }

    #[test]
    fn spheres_carry_their_symmetry() {
        for s in [tetrahedron(), default_symmetric_sphere(), symmetric_sphere(1, 0.0, 0.0)] {
            assert!(s.mesh.classify().is_sphere());
            check_sigma(&s.mesh, &s.sigma, s.p_o).unwrap();
            // outward orientation: positive enclosed volume
            let vol: f64 = s.mesh.faces().iter().map(|f| {
                let [a, b, c] = f.map(|v| s.mesh.position(v));
                dot3(a, cross3(b, c))
            }).sum();
            assert!(vol > 0.0);
        }
    }

    #[test]
    fn symmetric_sphere_has_positive_cotan_weights() {
        let s = default_symmetric_sphere();
        assert_eq!(s.mesh.n_vertices(), 50);
        assert!(cotan_weights(&s.mesh).all_positive());
    }
}
