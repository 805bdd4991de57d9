//! Indexed triangle meshes with halfedge connectivity.
//!
//! Halfedge `3 * f + k` runs from `faces[f][k]` to `faces[f][(k + 1) % 3]`, so `next`, `prev`
//! and the owning face are pure index arithmetic. Twins are stored explicitly, which lets the
//! same type describe glued complexes with multi-edges (two distinct edges between the same
//! pair of vertices) as well as ordinary meshes whose twins are inferred from vertex pairs.

mod obj;
mod cut;

use std::collections::HashMap;

use thiserror::Error;

use crate::scalar::{cross3, norm3, sub3, Real, Vec3};

pub use cut::{cut_along_edges, CutMesh};
pub use obj::{load_obj, load_obj_with_uv, parse_obj, save_obj, save_obj_with_uv, write_obj_with_uv, ObjData};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: face has {count} vertices, only triangles are supported")]
    NonTriangular { line: usize, count: usize },
    #[error("face {face} repeats a vertex: {vertices:?}")]
    DegenerateFace { face: usize, vertices: [usize; 3] },
    #[error("face {face} references vertex {vertex} but the mesh has {count} vertices")]
    IndexOutOfRange { face: usize, vertex: usize, count: usize },
    #[error("edge ({a}, {b}) is shared by more than two faces")]
    NonManifoldEdge { a: usize, b: usize },
    #[error("edge ({a}, {b}) is traversed in the same direction by two faces (inconsistent orientation)")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("vertex {vertex} has a link that is not a single disk or half-disk")]
    NonManifoldVertex { vertex: usize },
    #[error("vertex {vertex} is not referenced by any face")]
    IsolatedVertex { vertex: usize },
    #[error("halfedge {halfedge}: twin table is not a symmetric pairing of reversed halfedges")]
    BadTwin { halfedge: usize },
    #[error("mesh has no faces")]
    Empty,
    #[error("mesh is not a disk (euler characteristic {euler}, {loops} boundary loops)")]
    NotADisk { euler: i64, loops: usize },
    #[error("expected {expected} per-vertex coordinates, got {got}")]
    UvLength { expected: usize, got: usize },
    #[error("vertex {vertex} carries conflicting texture coordinates")]
    UvSeam { vertex: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Topological summary of a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct TopologyReport {
    pub euler_characteristic: i64,
    pub boundary_loop_count: usize,
    /// `Some(g)` for closed meshes, `None` when a boundary is present.
    pub genus_if_closed: Option<i64>,
}

impl TopologyReport {
    pub fn is_disk(&self) -> bool {
        self.euler_characteristic == 1 && self.boundary_loop_count == 1
    }

    pub fn is_sphere(&self) -> bool {
        self.euler_characteristic == 2 && self.boundary_loop_count == 0
    }

    pub fn is_torus(&self) -> bool {
        self.euler_characteristic == 0 && self.boundary_loop_count == 0
    }
}

/// Cyclic list of boundary vertices with the surface on the left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryLoop {
    pub vertices: Vec<usize>,
}

impl BoundaryLoop {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn position(&self, v: usize) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }

    /// Splits the loop at `marks` into paths `marks[j] -> marks[j + 1]` (cyclically), endpoints
    /// included. Returns `None` unless the marks are distinct loop vertices listed in loop order.
    pub fn split_at(&self, marks: &[usize]) -> Option<Vec<Vec<usize>>> {
        if marks.is_empty() {
            return None;
        }
        let n = self.vertices.len();
        let start = self.position(marks[0])?;
        let mut offsets = Vec::with_capacity(marks.len());
        for &m in marks {
            let p = self.position(m)?;
            offsets.push((p + n - start) % n);
        }
        if offsets.windows(2).any(|w| w[0] >= w[1]) {
            return None;
        }
        let mut paths = Vec::with_capacity(marks.len());
        for j in 0..marks.len() {
            let from = offsets[j];
            let to = if j + 1 < marks.len() { offsets[j + 1] } else { n };
            paths.push((from..=to).map(|i| self.vertices[(start + i) % n]).collect());
        }
        Some(paths)
    }
}

/// Sentinel for a halfedge without a twin.
pub const NO_TWIN: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct SurfaceMesh<T> {
    positions: Vec<Vec3<T>>,
    faces: Vec<[usize; 3]>,
    twin: Vec<usize>,
    edge_of: Vec<usize>,
    edge_halfedge: Vec<usize>,
    out: Vec<usize>,
}

impl<T: Real> SurfaceMesh<T> {
    /// Builds a mesh from positions and counterclockwise faces, pairing twins by vertex pairs.
    pub fn new(positions: Vec<Vec3<T>>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        check_faces(positions.len(), &faces)?;
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 3);
        let mut undirected: HashMap<(usize, usize), u32> = HashMap::with_capacity(faces.len() * 3);
        for (f, tri) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let count = undirected.entry(key).or_insert(0);
                *count += 1;
                if *count > 2 {
                    return Err(MeshError::NonManifoldEdge { a: key.0, b: key.1 });
                }
                if directed.insert((a, b), 3 * f + k).is_some() {
                    return Err(MeshError::InconsistentOrientation { a, b });
                }
            }
        }
        let mut twin = vec![NO_TWIN; faces.len() * 3];
        for (&(a, b), &h) in &directed {
            if let Some(&g) = directed.get(&(b, a)) {
                twin[h] = g;
            }
        }
        Self::assemble(positions, faces, twin)
    }

    /// Builds a mesh with an explicit twin table (`NO_TWIN` marks boundary halfedges). Used for
    /// glued complexes, where two faces may share a vertex pair without sharing an edge.
    pub fn with_twins(positions: Vec<Vec3<T>>, faces: Vec<[usize; 3]>, twin: Vec<usize>) -> Result<Self, MeshError> {
        check_faces(positions.len(), &faces)?;
        if twin.len() != faces.len() * 3 {
            return Err(MeshError::BadTwin { halfedge: twin.len().min(faces.len() * 3) });
        }
        for (h, &t) in twin.iter().enumerate() {
            if t == NO_TWIN {
                continue;
            }
            let ok = t < twin.len()
                && t != h
                && twin[t] == h
                && he_origin(&faces, h) == he_head(&faces, t)
                && he_head(&faces, h) == he_origin(&faces, t);
            if !ok {
                return Err(MeshError::BadTwin { halfedge: h });
            }
        }
        Self::assemble(positions, faces, twin)
    }

    fn assemble(positions: Vec<Vec3<T>>, faces: Vec<[usize; 3]>, twin: Vec<usize>) -> Result<Self, MeshError> {
        let nv = positions.len();
        let mut edge_of = vec![usize::MAX; twin.len()];
        let mut edge_halfedge = Vec::with_capacity(twin.len() / 2 + 1);
        for h in 0..twin.len() {
            if edge_of[h] != usize::MAX {
                continue;
            }
            let e = edge_halfedge.len();
            edge_halfedge.push(h);
            edge_of[h] = e;
            if twin[h] != NO_TWIN {
                edge_of[twin[h]] = e;
            }
        }
        let out = vertex_fans(nv, &faces, &twin)?;
        Ok(Self { positions, faces, twin, edge_of, edge_halfedge, out })
    }

    pub fn n_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edge_halfedge.len()
    }

    pub fn n_halfedges(&self) -> usize {
        self.twin.len()
    }

    pub fn positions(&self) -> &[Vec3<T>] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> Vec3<T> {
        self.positions[v]
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> [usize; 3] {
        self.faces[f]
    }

    pub fn twins(&self) -> &[usize] {
        &self.twin
    }

    #[inline]
    pub fn origin(&self, h: usize) -> usize {
        he_origin(&self.faces, h)
    }

    #[inline]
    pub fn head(&self, h: usize) -> usize {
        he_head(&self.faces, h)
    }

    #[inline]
    pub fn next(&self, h: usize) -> usize {
        he_next(h)
    }

    #[inline]
    pub fn prev(&self, h: usize) -> usize {
        he_prev(h)
    }

    #[inline]
    pub fn twin(&self, h: usize) -> Option<usize> {
        let t = self.twin[h];
        (t != NO_TWIN).then_some(t)
    }

    #[inline]
    pub fn face_of(&self, h: usize) -> usize {
        h / 3
    }

    #[inline]
    pub fn edge(&self, h: usize) -> usize {
        self.edge_of[h]
    }

    /// The halfedges of edge `e`: the canonical one and its twin, if any.
    pub fn edge_halfedges(&self, e: usize) -> (usize, Option<usize>) {
        let h = self.edge_halfedge[e];
        (h, self.twin(h))
    }

    pub fn edge_vertices(&self, e: usize) -> [usize; 2] {
        let h = self.edge_halfedge[e];
        [self.origin(h), self.head(h)]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.twin[self.edge_halfedge[e]] == NO_TWIN
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.twin[self.out[v]] == NO_TWIN
    }

    pub fn is_closed(&self) -> bool {
        self.twin.iter().all(|&t| t != NO_TWIN)
    }

    /// Outgoing halfedges of `v` in fan order. For boundary vertices the fan starts at the
    /// outgoing boundary halfedge.
    pub fn outgoing(&self, v: usize) -> Vec<usize> {
        let start = self.out[v];
        let mut fan = vec![start];
        let mut h = start;
        loop {
            let t = self.twin[he_prev(h)];
            if t == NO_TWIN || t == start {
                break;
            }
            fan.push(t);
            h = t;
        }
        fan
    }

    /// Neighbouring vertex indices of `v` (with multiplicity for multi-edges).
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let fan = self.outgoing(v);
        let mut out: Vec<usize> = fan.iter().map(|&h| self.head(h)).collect();
        if self.is_boundary_vertex(v) {
            out.push(self.origin(he_prev(*fan.last().expect("non-empty fan"))));
        }
        out
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_faces() as i64
    }

    pub fn boundary_loops(&self) -> Vec<BoundaryLoop> {
        let mut seen = vec![false; self.n_halfedges()];
        let mut loops = Vec::new();
        for h0 in 0..self.n_halfedges() {
            if self.twin[h0] != NO_TWIN || seen[h0] {
                continue;
            }
            let mut verts = Vec::new();
            let mut h = h0;
            loop {
                seen[h] = true;
                verts.push(self.origin(h));
                h = self.out[self.head(h)];
                if h == h0 {
                    break;
                }
            }
            loops.push(BoundaryLoop { vertices: verts });
        }
        loops
    }

    pub fn classify(&self) -> TopologyReport {
        let chi = self.euler_characteristic();
        let loops = self.boundary_loops().len();
        TopologyReport {
            euler_characteristic: chi,
            boundary_loop_count: loops,
            genus_if_closed: (loops == 0).then_some((2 - chi) / 2),
        }
    }

    /// The single boundary loop of a disk, starting at its lowest-index vertex.
    pub fn boundary_loop(&self) -> Result<BoundaryLoop, MeshError> {
        let topo = self.classify();
        if !topo.is_disk() {
            return Err(MeshError::NotADisk { euler: topo.euler_characteristic, loops: topo.boundary_loop_count });
        }
        let mut bl = self.boundary_loops().pop().expect("disk has a boundary loop");
        let min_at = bl
            .vertices
            .iter()
            .enumerate()
            .min_by_key(|&(_, v)| *v)
            .map(|(i, _)| i)
            .unwrap_or(0);
        bl.vertices.rotate_left(min_at);
        Ok(bl)
    }

    pub fn face_normal_area(&self, f: usize) -> T {
        let [a, b, c] = self.faces[f];
        let n = cross3(sub3(self.positions[b], self.positions[a]), sub3(self.positions[c], self.positions[a]));
        norm3(n) * T::half()
    }

    pub fn total_area(&self) -> T {
        (0..self.n_faces()).map(|f| self.face_normal_area(f)).sum()
    }

    /// Faces whose 3D area is below `rel_tol` times the squared longest edge.
    pub fn zero_area_faces(&self, rel_tol: T) -> Vec<usize> {
        (0..self.n_faces())
            .filter(|&f| {
                let [a, b, c] = self.faces[f];
                let p = &self.positions;
                let l = [norm3(sub3(p[b], p[a])), norm3(sub3(p[c], p[b])), norm3(sub3(p[a], p[c]))];
                let longest = l[0].max(l[1]).max(l[2]);
                self.face_normal_area(f) <= rel_tol * longest * longest
            })
            .collect()
    }

    /// Length of the longest axis of the bounding box.
    pub fn diameter(&self) -> T {
        let mut lo = [T::infinity(); 3];
        let mut hi = [T::neg_infinity(); 3];
        for p in &self.positions {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        norm3(sub3(hi, lo))
    }

    /// Same connectivity with every face orientation reversed.
    pub fn reversed(&self) -> Self {
        let faces = self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect();
        Self::new(self.positions.clone(), faces).expect("reversal preserves validity")
    }

    /// Same mesh with vertex and face indices renamed: new vertex `i` is old `vperm[i]`,
    /// new face `j` is old `fperm[j]`.
    pub fn permuted(&self, vperm: &[usize], fperm: &[usize]) -> Result<Self, MeshError> {
        let mut inv = vec![0; vperm.len()];
        for (new, &old) in vperm.iter().enumerate() {
            inv[old] = new;
        }
        let positions = vperm.iter().map(|&o| self.positions[o]).collect();
        let faces = fperm.iter().map(|&f| self.faces[f].map(|v| inv[v])).collect();
        Self::new(positions, faces)
    }

    pub fn with_positions(&self, positions: Vec<Vec3<T>>) -> Self {
        assert_eq!(positions.len(), self.positions.len());
        Self { positions, ..self.clone() }
    }

    pub fn convert<U: Real>(&self) -> SurfaceMesh<U> {
        SurfaceMesh {
            positions: self.positions.iter().map(|p| p.map(|x| U::lit(x.as_f64()))).collect(),
            faces: self.faces.clone(),
            twin: self.twin.clone(),
            edge_of: self.edge_of.clone(),
            edge_halfedge: self.edge_halfedge.clone(),
            out: self.out.clone(),
        }
    }
}

#[inline]
fn he_origin(faces: &[[usize; 3]], h: usize) -> usize {
    faces[h / 3][h % 3]
}

#[inline]
fn he_head(faces: &[[usize; 3]], h: usize) -> usize {
    faces[h / 3][(h % 3 + 1) % 3]
}

#[inline]
fn he_next(h: usize) -> usize {
    3 * (h / 3) + (h % 3 + 1) % 3
}

#[inline]
fn he_prev(h: usize) -> usize {
    3 * (h / 3) + (h % 3 + 2) % 3
}

fn check_faces(nv: usize, faces: &[[usize; 3]]) -> Result<(), MeshError> {
    if faces.is_empty() {
        return Err(MeshError::Empty);
    }
    for (f, tri) in faces.iter().enumerate() {
        for &v in tri {
            if v >= nv {
                return Err(MeshError::IndexOutOfRange { face: f, vertex: v, count: nv });
            }
        }
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return Err(MeshError::DegenerateFace { face: f, vertices: *tri });
        }
    }
    Ok(())
}

/// Verifies that every vertex link is a single disk or half-disk and returns, per vertex, the
/// halfedge its fan starts from.
fn vertex_fans(nv: usize, faces: &[[usize; 3]], twin: &[usize]) -> Result<Vec<usize>, MeshError> {
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for h in 0..twin.len() {
        outgoing[he_origin(faces, h)].push(h);
    }
    let mut out = vec![0; nv];
    for (v, hs) in outgoing.iter().enumerate() {
        if hs.is_empty() {
            return Err(MeshError::IsolatedVertex { vertex: v });
        }
        let starts: Vec<usize> = hs.iter().copied().filter(|&h| twin[h] == NO_TWIN).collect();
        if starts.len() > 1 {
            return Err(MeshError::NonManifoldVertex { vertex: v });
        }
        let start = starts.first().copied().unwrap_or(hs[0]);
        let mut count = 1;
        let mut h = start;
        loop {
            let t = twin[he_prev(h)];
            if t == NO_TWIN || t == start {
                break;
            }
            count += 1;
            if count > hs.len() {
                return Err(MeshError::NonManifoldVertex { vertex: v });
            }
            h = t;
        }
        if count != hs.len() {
            return Err(MeshError::NonManifoldVertex { vertex: v });
        }
        out[v] = start;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn triangle() -> SurfaceMesh<f64> {
        SurfaceMesh::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2]]).unwrap()
    }

    fn quad() -> SurfaceMesh<f64> {
        SurfaceMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    fn tetrahedron() -> SurfaceMesh<f64> {
        SurfaceMesh::new(
            vec![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [-0.5, 0.8, 0.0], [-0.5, -0.8, 0.0]],
            vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]],
        )
        .unwrap()
    }

    #[test]
    fn classify_small_meshes() {
        let t = triangle().classify();
        assert_eq!((t.euler_characteristic, t.boundary_loop_count), (1, 1));
        assert!(t.is_disk());
        let q = quad().classify();
        assert_eq!((q.euler_characteristic, q.boundary_loop_count), (1, 1));
        let s = tetrahedron().classify();
        assert_eq!((s.euler_characteristic, s.boundary_loop_count, s.genus_if_closed), (2, 0, Some(0)));
        assert!(s.is_sphere());
    }

    #[test]
    fn boundary_loops_are_counterclockwise() {
        assert_eq!(triangle().boundary_loop().unwrap().vertices, vec![0, 1, 2]);
        assert_eq!(quad().boundary_loop().unwrap().vertices, vec![0, 1, 2, 3]);
        assert!(matches!(tetrahedron().boundary_loop(), Err(MeshError::NotADisk { .. })));
    }

    #[test]
    fn halfedge_identities() {
        for m in [quad(), tetrahedron()] {
            for h in 0..m.n_halfedges() {
                assert_eq!(m.next(m.next(m.next(h))), h);
                if let Some(t) = m.twin(h) {
                    assert_eq!(m.twin(t), Some(h));
                    assert_eq!(m.origin(t), m.head(h));
                }
            }
        }
    }

    #[test]
    fn rejects_bad_connectivity() {
        let p = vec![[0.0; 3]; 5];
        assert!(matches!(
            SurfaceMesh::<f64>::new(p.clone(), vec![[0, 1, 1]]),
            Err(MeshError::DegenerateFace { .. })
        ));
        assert!(matches!(
            SurfaceMesh::<f64>::new(p.clone(), vec![[0, 1, 2], [0, 1, 3], [0, 4, 1], [0, 2, 4]]),
            Err(MeshError::InconsistentOrientation { .. })
        ));
        assert!(matches!(
            SurfaceMesh::<f64>::new(p.clone(), vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]),
            Err(MeshError::NonManifoldEdge { .. })
        ));
        // two triangles touching at a single vertex
        assert!(matches!(
            SurfaceMesh::<f64>::new(p, vec![[0, 1, 2], [0, 3, 4]]),
            Err(MeshError::NonManifoldVertex { vertex: 0 })
        ));
    }

    #[test]
    fn split_loop_at_marks() {
        let bl = BoundaryLoop { vertices: vec![0, 1, 2, 3, 4, 5] };
        assert_eq!(bl.split_at(&[1, 3, 4]).unwrap(), vec![vec![1, 2, 3], vec![3, 4], vec![4, 5, 0, 1]]);
        assert!(bl.split_at(&[1, 4, 3]).is_none());
        assert!(bl.split_at(&[1, 9, 3]).is_none());
    }

    #[test]
    fn permutation_invariance_of_classification() {
        let m = tetrahedron();
        let p = m.permuted(&[2, 0, 3, 1], &[3, 1, 0, 2]).unwrap();
        assert_eq!(m.classify(), p.classify());
    }
}
