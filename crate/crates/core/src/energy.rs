//! Edge weights and the simplicial Dirichlet and conformal energies.
//!
//! Weights are accumulated per halfedge: each face contributes, to each of its three edges, the
//! cotangent of the angle opposite that edge (cotangent scheme) or `1/2` (uniform scheme). An
//! edge weight is the sum over its halfedges, so interior edges get `cot a + cot b` (or 1) and
//! boundary edges a single term. Gluing faces of two copies along an edge then simply adds
//! their contributions. Energies are `1/4 * sum_e w_e |u_i - u_j|^2`, which for cotangent
//! weights is the Dirichlet energy of the piecewise affine map.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::SurfaceMesh;
use crate::scalar::{cross3, dot3, norm2, norm3, orient2, sub2, sub3, Real, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    #[serde(alias = "cotan")]
    Cotangent,
    Uniform,
}

impl std::str::FromStr for WeightScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cotan" | "cotangent" => Ok(Self::Cotangent),
            "uniform" => Ok(Self::Uniform),
            other => Err(format!("unknown weight scheme `{other}` (expected cotan or uniform)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("weights contain degenerate-face sentinels (faces {faces:?})")]
    Sentinel { faces: Vec<usize> },
    #[error("expected {expected} per-vertex coordinates, got {got}")]
    UvLength { expected: usize, got: usize },
}

#[derive(Debug, Clone)]
pub struct EdgeWeights<T> {
    scheme: WeightScheme,
    halfedge: Vec<T>,
    edge: Vec<T>,
    degenerate_faces: Vec<usize>,
}

/// Cotangent of the angle between `a` and `b`, or `None` when the two vectors are (nearly)
/// parallel: `|a x b| < 1e-14 |a| |b|`.
pub fn cotangent<T: Real>(a: [T; 3], b: [T; 3]) -> Option<T> {
    let cross = norm3(cross3(a, b));
    if cross < T::lit(1e-14) * norm3(a) * norm3(b) || cross == T::zero() {
        return None;
    }
    Some(dot3(a, b) / cross)
}

/// Cotangent weights from the 3D geometry of `mesh`. Faces whose corners are degenerate yield
/// `+inf` on all three of their edges and are listed in [`EdgeWeights::degenerate_faces`].
pub fn cotan_weights<T: Real>(mesh: &SurfaceMesh<T>) -> EdgeWeights<T> {
    let mut halfedge = vec![T::zero(); mesh.n_halfedges()];
    let mut degenerate_faces = Vec::new();
    for f in 0..mesh.n_faces() {
        let tri = mesh.face(f);
        let mut bad = false;
        for k in 0..3 {
            // halfedge 3f+k joins tri[k] -> tri[k+1]; the opposite corner is tri[k+2]
            let c = mesh.position(tri[(k + 2) % 3]);
            let a = sub3(mesh.position(tri[k]), c);
            let b = sub3(mesh.position(tri[(k + 1) % 3]), c);
            match cotangent(a, b) {
                Some(cot) => halfedge[3 * f + k] = cot,
                None => bad = true,
            }
        }
        if bad {
            degenerate_faces.push(f);
            for k in 0..3 {
                halfedge[3 * f + k] = T::infinity();
            }
        }
    }
    if !degenerate_faces.is_empty() {
        log::warn!("{} degenerate faces produce infinite cotangent weights", degenerate_faces.len());
    }
    EdgeWeights::from_halfedges(mesh, WeightScheme::Cotangent, halfedge, degenerate_faces)
}

/// Uniform (Tutte) weights: every face contributes `1/2` to each of its edges.
pub fn uniform_weights<T: Real>(mesh: &SurfaceMesh<T>) -> EdgeWeights<T> {
    EdgeWeights::from_halfedges(mesh, WeightScheme::Uniform, vec![T::half(); mesh.n_halfedges()], Vec::new())
}

pub fn weights_for<T: Real>(mesh: &SurfaceMesh<T>, scheme: WeightScheme) -> EdgeWeights<T> {
    match scheme {
        WeightScheme::Cotangent => cotan_weights(mesh),
        WeightScheme::Uniform => uniform_weights(mesh),
    }
}

impl<T: Real> EdgeWeights<T> {
    pub fn from_halfedges(mesh: &SurfaceMesh<T>, scheme: WeightScheme, halfedge: Vec<T>, degenerate_faces: Vec<usize>) -> Self {
        assert_eq!(halfedge.len(), mesh.n_halfedges());
        let mut edge = vec![T::zero(); mesh.n_edges()];
        for (h, &w) in halfedge.iter().enumerate() {
            edge[mesh.edge(h)] += w;
        }
        Self { scheme, halfedge, edge, degenerate_faces }
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    /// Weight of edge `e`.
    pub fn weight(&self, e: usize) -> T {
        self.edge[e]
    }

    pub fn edge_weights(&self) -> &[T] {
        &self.edge
    }

    /// Contribution of halfedge `h`'s face to the weight of its edge.
    pub fn halfedge_weight(&self, h: usize) -> T {
        self.halfedge[h]
    }

    pub fn degenerate_faces(&self) -> &[usize] {
        &self.degenerate_faces
    }

    pub fn has_sentinel(&self) -> bool {
        !self.degenerate_faces.is_empty()
    }

    pub fn all_positive(&self) -> bool {
        self.edge.iter().all(|&w| w > T::zero())
    }

    fn check(&self) -> Result<(), EnergyError> {
        if self.has_sentinel() {
            return Err(EnergyError::Sentinel { faces: self.degenerate_faces.clone() });
        }
        Ok(())
    }

    /// Energy of one face given its three corner images (in face order).
    pub fn face_energy(&self, f: usize, corners: [Vec2<T>; 3]) -> T {
        let mut e = T::zero();
        for k in 0..3 {
            let d = sub2(corners[(k + 1) % 3], corners[k]);
            e += self.halfedge[3 * f + k] * (d[0] * d[0] + d[1] * d[1]);
        }
        e * T::lit(0.25)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityReport {
    pub negative_edge_count: usize,
    pub min_weight: f64,
}

pub fn weight_positivity_report<T: Real>(w: &EdgeWeights<T>) -> PositivityReport {
    PositivityReport {
        negative_edge_count: w.edge.iter().filter(|&&x| x < T::zero()).count(),
        min_weight: w.edge.iter().map(|x| x.as_f64()).fold(f64::INFINITY, f64::min),
    }
}

fn check_uv<T: Real>(mesh: &SurfaceMesh<T>, uv: &[Vec2<T>]) -> Result<(), EnergyError> {
    if uv.len() != mesh.n_vertices() {
        return Err(EnergyError::UvLength { expected: mesh.n_vertices(), got: uv.len() });
    }
    Ok(())
}

/// `1/4 * sum over edges of w_e |uv_i - uv_j|^2`.
pub fn dirichlet_energy<T: Real>(mesh: &SurfaceMesh<T>, w: &EdgeWeights<T>, uv: &[Vec2<T>]) -> Result<T, EnergyError> {
    w.check()?;
    check_uv(mesh, uv)?;
    let mut e = T::zero();
    for edge in 0..mesh.n_edges() {
        let [i, j] = mesh.edge_vertices(edge);
        let d = norm2(sub2(uv[j], uv[i]));
        e += w.weight(edge) * d * d;
    }
    Ok(e * T::lit(0.25))
}

/// Sum of signed image areas, positive for counterclockwise image faces.
pub fn signed_area<T: Real>(mesh: &SurfaceMesh<T>, uv: &[Vec2<T>]) -> T {
    mesh.faces().iter().map(|&[a, b, c]| orient2(uv[a], uv[b], uv[c]) * T::half()).sum()
}

/// Dirichlet energy minus the signed image area; zero exactly when every face map is a
/// similarity.
pub fn conformal_energy<T: Real>(mesh: &SurfaceMesh<T>, w: &EdgeWeights<T>, uv: &[Vec2<T>]) -> Result<T, EnergyError> {
    Ok(dirichlet_energy(mesh, w, uv)? - signed_area(mesh, uv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn flat(points: &[[f64; 2]], faces: Vec<[usize; 3]>) -> SurfaceMesh<f64> {
        SurfaceMesh::new(points.iter().map(|p| [p[0], p[1], 0.0]).collect(), faces).unwrap()
    }

    fn unit_square() -> SurfaceMesh<f64> {
        flat(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![[0, 1, 2], [0, 2, 3]])
    }

    fn planar_uv(m: &SurfaceMesh<f64>) -> Vec<[f64; 2]> {
        m.positions().iter().map(|p| [p[0], p[1]]).collect()
    }

    /// Per-face `1/2 tr(J^T J) area`, computed from the affine map's Jacobian.
    fn affine_face_energy(p: [[f64; 2]; 3], q: [[f64; 2]; 3]) -> f64 {
        let e1 = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
        let e2 = [p[2][0] - p[0][0], p[2][1] - p[0][1]];
        let f1 = [q[1][0] - q[0][0], q[1][1] - q[0][1]];
        let f2 = [q[2][0] - q[0][0], q[2][1] - q[0][1]];
        let det = e1[0] * e2[1] - e1[1] * e2[0];
        // J = F E^{-1}
        let inv = [[e2[1] / det, -e2[0] / det], [-e1[1] / det, e1[0] / det]];
        let j = [
            [f1[0] * inv[0][0] + f2[0] * inv[1][0], f1[0] * inv[0][1] + f2[0] * inv[1][1]],
            [f1[1] * inv[0][0] + f2[1] * inv[1][0], f1[1] * inv[0][1] + f2[1] * inv[1][1]],
        ];
        let fro = j[0][0].powi(2) + j[0][1].powi(2) + j[1][0].powi(2) + j[1][1].powi(2);
        0.5 * fro * det.abs() * 0.5
    }

    #[test]
    fn equilateral_pair_shared_edge() {
        let h = 3f64.sqrt() / 2.0;
        let m = flat(&[[0.0, 0.0], [1.0, 0.0], [0.5, h], [0.5, -h]], vec![[0, 1, 2], [1, 0, 3]]);
        let w = cotan_weights(&m);
        let shared = (0..m.n_edges()).find(|&e| !m.is_boundary_edge(e)).unwrap();
        assert_abs_diff_eq!(w.weight(shared), 2.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(w.weight(shared), 1.154700538, epsilon = 1e-9);
        let report = weight_positivity_report(&w);
        assert_eq!(report.negative_edge_count, 0);
        // boundary edges carry a single cot 60 = 1/sqrt(3)
        assert_abs_diff_eq!(report.min_weight, 1.0 / 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn right_angle_gives_zero_weight() {
        let m = flat(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]);
        let w = cotan_weights(&m);
        let hyp = (0..m.n_edges()).find(|&e| m.edge_vertices(e).contains(&1) && m.edge_vertices(e).contains(&2)).unwrap();
        assert_abs_diff_eq!(w.weight(hyp), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn obtuse_kite_has_negative_weight() {
        let h = 1.0 / (50f64.to_radians()).tan();
        let m = flat(&[[-1.0, 0.0], [1.0, 0.0], [0.0, h], [0.0, -h]], vec![[0, 1, 2], [1, 0, 3]]);
        let w = cotan_weights(&m);
        let shared = (0..m.n_edges()).find(|&e| !m.is_boundary_edge(e)).unwrap();
        assert_abs_diff_eq!(w.weight(shared), 2.0 / (100f64.to_radians()).tan(), epsilon = 1e-12);
        assert!(weight_positivity_report(&w).negative_edge_count >= 1);
        assert_eq!(weight_positivity_report(&uniform_weights(&m)).negative_edge_count, 0);
    }

    #[test]
    fn degenerate_face_yields_sentinel() {
        let m = flat(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![[0, 1, 2]]);
        let w = cotan_weights(&m);
        assert_eq!(w.degenerate_faces(), &[0]);
        assert!(w.weight(0).is_infinite());
        assert!(matches!(dirichlet_energy(&m, &w, &planar_uv(&m)), Err(EnergyError::Sentinel { .. })));
    }

    #[test]
    fn identity_energy_is_area() {
        let h = 3f64.sqrt() / 2.0;
        let m = flat(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]], vec![[0, 1, 2]]);
        let w = cotan_weights(&m);
        let e = dirichlet_energy(&m, &w, &planar_uv(&m)).unwrap();
        assert_abs_diff_eq!(e, 3f64.sqrt() / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(conformal_energy(&m, &w, &planar_uv(&m)).unwrap(), 0.0, epsilon = 1e-12);
        let constant = vec![[0.3, -2.0]; 3];
        assert_eq!(dirichlet_energy(&m, &w, &constant).unwrap(), 0.0);
    }

    #[test]
    fn stretched_square_energy() {
        let m = unit_square();
        let w = cotan_weights(&m);
        let uv: Vec<[f64; 2]> = planar_uv(&m).iter().map(|p| [2.0 * p[0], p[1]]).collect();
        let oracle: f64 = m
            .faces()
            .iter()
            .map(|f| {
                let p = f.map(|v| planar_uv(&m)[v]);
                let q = f.map(|v| uv[v]);
                affine_face_energy(p, q)
            })
            .sum();
        assert_abs_diff_eq!(oracle, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(dirichlet_energy(&m, &w, &uv).unwrap(), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(conformal_energy(&m, &w, &uv).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn delaunay_interior_weights_are_nonnegative() {
        let disk = fixtures::random_delaunay_disk(80, 17);
        let m = &disk.mesh;
        let w = cotan_weights(m);
        // brute force: every interior edge's opposite angles sum to at most pi
        for e in 0..m.n_edges() {
            let (h, t) = m.edge_halfedges(e);
            let Some(t) = t else { continue };
            let angle = |h: usize| {
                let c = m.position(m.origin(m.prev(h)));
                let a = sub3(m.position(m.origin(h)), c);
                let b = sub3(m.position(m.head(h)), c);
                (dot3(a, b) / (norm3(a) * norm3(b))).clamp(-1.0, 1.0).acos()
            };
            let total = angle(h) + angle(t);
            assert!(total <= std::f64::consts::PI + 1e-12);
            assert!(w.weight(e) >= -1e-12, "edge {e}: {}", w.weight(e));
        }
    }

    #[test]
    fn face_energies_sum_to_edge_energy() {
        let disk = fixtures::random_delaunay_disk(40, 3);
        let m = &disk.mesh;
        let w = cotan_weights(m);
        let uv: Vec<[f64; 2]> = m.positions().iter().map(|p| [p[0] * p[0] - p[1], 0.3 * p[1] + p[0]]).collect();
        let per_face: f64 = (0..m.n_faces()).map(|f| w.face_energy(f, m.face(f).map(|v| uv[v]))).sum();
        assert_abs_diff_eq!(per_face, dirichlet_energy(m, &w, &uv).unwrap(), epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn energy_transforms(angle in 0.0f64..std::f64::consts::TAU, tx in -5.0f64..5.0, ty in -5.0f64..5.0, s in 0.1f64..10.0) {
            let m = unit_square();
            let w = cotan_weights(&m);
            let uv = vec![[0.1, 0.0], [1.3, 0.2], [0.9, 1.1], [-0.2, 0.8]];
            let e0 = dirichlet_energy(&m, &w, &uv).unwrap();
            let (c, sn) = (angle.cos(), angle.sin());
            let moved: Vec<[f64; 2]> = uv.iter().map(|p| [c * p[0] - sn * p[1] + tx, sn * p[0] + c * p[1] + ty]).collect();
            prop_assert!((dirichlet_energy(&m, &w, &moved).unwrap() - e0).abs() <= 1e-10 * e0.max(1.0));
            let scaled: Vec<[f64; 2]> = uv.iter().map(|p| [s * p[0], s * p[1]]).collect();
            prop_assert!((dirichlet_energy(&m, &w, &scaled).unwrap() - s * s * e0).abs() <= 1e-10 * s * s * e0);
            // similarity maps are conformal; orientation preserving maps have nonnegative conformal energy
            let sim: Vec<[f64; 2]> = planar_uv(&m).iter().map(|p| [s * (c * p[0] - sn * p[1]) + tx, s * (sn * p[0] + c * p[1]) + ty]).collect();
            prop_assert!(conformal_energy(&m, &w, &sim).unwrap().abs() <= 1e-10 * s * s);
            prop_assert!(conformal_energy(&m, &w, &uv).unwrap() >= -1e-12);
        }

        #[test]
        fn cotangents_invariant_under_rigid_motion_and_scale(angle in 0.0f64..std::f64::consts::TAU, s in 0.01f64..100.0, tz in -3.0f64..3.0) {
            let disk = fixtures::random_delaunay_disk(20, 5);
            let m = &disk.mesh;
            let (c, sn) = (angle.cos(), angle.sin());
            let moved = m.with_positions(m.positions().iter().map(|p| [s * (c * p[0] - sn * p[2]), s * p[1] + tz, s * (sn * p[0] + c * p[2])]).collect());
            let (w0, w1) = (cotan_weights(m), cotan_weights(&moved));
            for e in 0..m.n_edges() {
                prop_assert!((w0.weight(e) - w1.weight(e)).abs() <= 1e-9 * (1.0 + w0.weight(e).abs()));
            }
        }
    }
}
