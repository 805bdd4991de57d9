use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{Construction, ConstructError, MarkedDisk};
use crate::energy::EdgeWeights;
use crate::lattice::{iadd, isub, IVec, Lattice, PatternFrame};
use crate::mesh::{SurfaceMesh, NO_TWIN};
use crate::scalar::{Real, Vec3};

/// The disk that gets copied, its boundary paths, and its projection to the covered surface.
#[derive(Debug, Clone)]
pub struct TileBase<T> {
    pub mesh: SurfaceMesh<T>,
    /// Boundary paths in loop order; path `j` starts at corner `j`.
    pub sides: Vec<Vec<usize>>,
    /// Vertex of `covered` each disk vertex projects to.
    pub origin: Vec<usize>,
    /// Surface the glued torus covers: the disk itself, or the uncut sphere.
    pub covered: SurfaceMesh<T>,
}

impl<T: Real> TileBase<T> {
    pub fn from_disk(d: &MarkedDisk<T>) -> Self {
        Self {
            mesh: d.mesh().clone(),
            sides: d.sides().to_vec(),
            origin: (0..d.mesh().n_vertices()).collect(),
            covered: d.mesh().clone(),
        }
    }

    pub fn corners(&self) -> Vec<usize> {
        self.sides.iter().map(|s| s[0]).collect()
    }
}

/// Identifies side `a.1` of copy `a.0` with side `b.1` of copy `b.0`. Vertex `i` of the first
/// path meets vertex `i` of the second, or vertex `m - i` when `reversed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SideGluing {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub reversed: bool,
}

/// Integer placement of every copy's corners in a periodic pattern.
#[derive(Debug, Clone)]
pub struct Layout<T> {
    pub frame: PatternFrame<T>,
    /// `corners[c][j]`: pattern position of corner `j` of copy `c`.
    pub corners: Vec<Vec<IVec>>,
}

/// Sides of all copies matched by coinciding pattern segments modulo the pattern lattice.
pub fn match_sides<T: Real>(layout: &Layout<T>) -> Result<Vec<SideGluing>, ConstructError> {
    let mut by_key: BTreeMap<(IVec, IVec), Vec<(usize, usize, bool)>> = BTreeMap::new();
    for (c, corners) in layout.corners.iter().enumerate() {
        let n = corners.len();
        for s in 0..n {
            let (p, q) = (corners[s], corners[(s + 1) % n]);
            let k1 = (layout.frame.reduce(p), isub(q, p));
            let k2 = (layout.frame.reduce(q), isub(p, q));
            let (key, flipped) = if k1 <= k2 { (k1, false) } else { (k2, true) };
            by_key.entry(key).or_default().push((c, s, flipped));
        }
    }
    let mut out = Vec::with_capacity(by_key.len());
    for (key, entries) in by_key {
        if entries.len() != 2 {
            return Err(ConstructError::Pattern(format!(
                "segment at {:?} direction {:?} is shared by {} sides",
                key.0,
                key.1,
                entries.len()
            )));
        }
        let (a, b) = (entries[0], entries[1]);
        out.push(SideGluing { a: (a.0, a.1), b: (b.0, b.1), reversed: a.2 != b.2 });
    }
    out.sort_by_key(|g| (g.a, g.b));
    Ok(out)
}

/// Union-find with integer offsets: `offset[x] = pos(x) - pos(parent[x])`.
struct OffsetUnionFind {
    parent: Vec<usize>,
    offset: Vec<IVec>,
}

impl OffsetUnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), offset: vec![[0, 0]; n] }
    }

    fn find(&mut self, x: usize) -> (usize, IVec) {
        let mut path = Vec::new();
        let mut r = x;
        while self.parent[r] != r {
            path.push(r);
            r = self.parent[r];
        }
        // compress from the top down so each offset becomes relative to the root
        for &y in path.iter().rev() {
            let p = self.parent[y];
            if p != r {
                self.offset[y] = iadd(self.offset[y], self.offset[p]);
            }
            self.parent[y] = r;
        }
        (r, self.offset[x])
    }

    /// Records `pos(x) - pos(y) = t`.
    fn union(&mut self, x: usize, y: usize, t: IVec) {
        let (rx, ox) = self.find(x);
        let (ry, oy) = self.find(y);
        if rx == ry {
            return;
        }
        // pos(rx) - pos(ry) = t - ox + oy
        self.parent[rx] = ry;
        self.offset[rx] = iadd(isub(t, ox), oy);
    }
}

/// A closed complex glued from copies of a [`TileBase`], with provenance back to the copies.
///
/// Torus face `c * F + f` is face `f` of copy `c`; copies with negative sign have their faces
/// reversed.
#[derive(Debug, Clone)]
pub struct GluedTorus<T> {
    construction: Construction,
    base: TileBase<T>,
    signs: Vec<i8>,
    gluings: Vec<SideGluing>,
    layout: Option<Layout<T>>,
    vertex_map: Vec<Vec<usize>>,
    faces: Vec<[usize; 3]>,
    twins: Vec<usize>,
    positions: Vec<Vec3<T>>,
    offsets: Option<Vec<Vec<IVec>>>,
    mesh: Option<SurfaceMesh<T>>,
    problems: Vec<String>,
    declared: Vec<(usize, usize)>,
}

/// Glues copies without judging the result. Inconsistencies are recorded and surface through
/// [`super::validate_covering`]; [`GluedTorus::mesh`] is only available when the glued faces
/// form a valid closed surface.
pub fn glue<T: Real>(
    construction: Construction,
    base: TileBase<T>,
    signs: Vec<i8>,
    gluings: Vec<SideGluing>,
    layout: Option<Layout<T>>,
) -> GluedTorus<T> {
    let k = signs.len();
    let n = base.mesh.n_vertices();
    let nf = base.mesh.n_faces();
    let nsides = base.sides.len();
    let mut problems = Vec::new();
    let mut pattern_ok = layout.is_some();

    let mut bnd: HashMap<(usize, usize), usize> = HashMap::new();
    for h in 0..base.mesh.n_halfedges() {
        if base.mesh.twin(h).is_none() {
            bnd.insert((base.mesh.origin(h), base.mesh.head(h)), h);
        }
    }

    let map_he = |c: usize, h: usize| -> usize {
        let (f, kk) = (h / 3, h % 3);
        let local = if signs[c] > 0 { kk } else { (5 - kk) % 3 };
        3 * (c * nf + f) + local
    };

    let mut uf = OffsetUnionFind::new(k * n);
    let mut twins = vec![NO_TWIN; 3 * k * nf];
    for (gi, g) in gluings.iter().enumerate() {
        let ((ca, sa), (cb, sb)) = (g.a, g.b);
        if ca >= k || cb >= k || sa >= nsides || sb >= nsides {
            problems.push(format!("gluing {gi} references a missing copy or side"));
            continue;
        }
        let (pa, pb) = (&base.sides[sa], &base.sides[sb]);
        if pa.len() != pb.len() {
            problems.push(format!("gluing {gi} joins paths with {} and {} edges", pa.len() - 1, pb.len() - 1));
            continue;
        }
        let m = pa.len() - 1;
        let partner = |i: usize| if g.reversed { pb[m - i] } else { pb[i] };
        let mut t = [0, 0];
        if let Some(lay) = &layout {
            let cs = |c: usize, s: usize| lay.corners[c][s % nsides];
            let (b_start, b_end) = if g.reversed { (cs(cb, sb + 1), cs(cb, sb)) } else { (cs(cb, sb), cs(cb, sb + 1)) };
            let t0 = isub(cs(ca, sa), b_start);
            let t1 = isub(cs(ca, sa + 1), b_end);
            if t0 != t1 || !lay.frame.contains(t0) {
                problems.push(format!("gluing {gi}: sides do not coincide modulo the pattern lattice"));
                pattern_ok = false;
            }
            t = t0;
        }
        for i in 0..=m {
            let (va, vb) = (pa[i], partner(i));
            if base.origin[va] != base.origin[vb] {
                problems.push(format!(
                    "gluing {gi}: vertex {va} of copy {ca} meets vertex {vb} of copy {cb} with different origins"
                ));
            }
            uf.union(ca * n + va, cb * n + vb, t);
        }
        for i in 0..m {
            let ha = bnd.get(&(pa[i], pa[i + 1]));
            let hb = if g.reversed { bnd.get(&(pb[m - i - 1], pb[m - i])) } else { bnd.get(&(pb[i], pb[i + 1])) };
            let (Some(&ha), Some(&hb)) = (ha, hb) else {
                problems.push(format!("gluing {gi}: side edge {i} is not a boundary edge"));
                continue;
            };
            let (ta, tb) = (map_he(ca, ha), map_he(cb, hb));
            if twins[ta] != NO_TWIN || twins[tb] != NO_TWIN || ta == tb {
                problems.push(format!("gluing {gi}: side edge {i} is glued more than once"));
                continue;
            }
            twins[ta] = tb;
            twins[tb] = ta;
        }
    }

    let mut class_of_root = HashMap::new();
    let mut vertex_map = vec![vec![0; n]; k];
    let mut positions = Vec::new();
    let mut raw_offsets = vec![vec![[0, 0]; n]; k];
    for c in 0..k {
        for v in 0..n {
            let (r, o) = uf.find(c * n + v);
            let id = *class_of_root.entry(r).or_insert_with(|| {
                positions.push(base.mesh.position(v));
                positions.len() - 1
            });
            vertex_map[c][v] = id;
            raw_offsets[c][v] = o;
        }
    }

    let offsets = match (&layout, pattern_ok) {
        (Some(lay), true) => {
            let conv: Option<Vec<Vec<IVec>>> = raw_offsets
                .iter()
                .map(|row| row.iter().map(|&o| lay.frame.coeffs_exact(o)).collect())
                .collect();
            if conv.is_none() {
                problems.push("vertex offsets leave the pattern lattice".into());
            }
            conv
        }
        _ => None,
    };

    let mut faces = Vec::with_capacity(k * nf);
    for c in 0..k {
        for f in 0..nf {
            let [a, b, cc] = base.mesh.face(f).map(|v| vertex_map[c][v]);
            faces.push(if signs[c] > 0 { [a, b, cc] } else { [a, cc, b] });
        }
        for h in 0..base.mesh.n_halfedges() {
            if let Some(g) = base.mesh.twin(h) {
                twins[map_he(c, h)] = map_he(c, g);
            }
        }
    }

    let unglued = twins.iter().filter(|&&t| t == NO_TWIN).count();
    let mesh = if unglued > 0 {
        problems.push(format!("{unglued} halfedges are not glued to anything"));
        None
    } else {
        match SurfaceMesh::with_twins(positions.clone(), faces.clone(), twins.clone()) {
            Ok(m) => Some(m),
            Err(e) => {
                problems.push(format!("glued complex is not a surface: {e}"));
                None
            }
        }
    };

    GluedTorus {
        construction,
        base,
        signs,
        gluings,
        layout,
        vertex_map,
        faces,
        twins,
        positions,
        offsets,
        mesh,
        problems,
        declared: Vec::new(),
    }
}

impl<T: Real> GluedTorus<T> {
    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn copies(&self) -> usize {
        self.signs.len()
    }

    pub fn base(&self) -> &TileBase<T> {
        &self.base
    }

    /// Orientation of each copy: `+1` keeps the disk orientation, `-1` mirrors it.
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn gluings(&self) -> &[SideGluing] {
        &self.gluings
    }

    pub fn layout(&self) -> Option<&Layout<T>> {
        self.layout.as_ref()
    }

    /// Flat lattice the pattern is laid out on.
    pub fn lattice(&self) -> Option<Lattice<T>> {
        self.layout.as_ref().map(|l| l.frame.target)
    }

    /// Validated torus mesh.
    ///
    /// # Panics
    /// When the gluing did not produce a closed surface; check [`Self::is_surface`] or run
    /// [`super::validate_covering`] on tori from [`glue`].
    pub fn mesh(&self) -> &SurfaceMesh<T> {
        self.mesh.as_ref().expect("glued complex is not a valid surface")
    }

    pub fn is_surface(&self) -> bool {
        self.mesh.is_some()
    }

    pub fn raw_faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn raw_twins(&self) -> &[usize] {
        &self.twins
    }

    pub fn raw_positions(&self) -> &[Vec3<T>] {
        &self.positions
    }

    pub fn n_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn problems(&self) -> &[String] {
        &self.problems
    }

    /// Torus vertex of disk vertex `v` in copy `c`.
    pub fn torus_vertex(&self, c: usize, v: usize) -> usize {
        self.vertex_map[c][v]
    }

    pub fn vertex_map(&self, c: usize) -> &[usize] {
        &self.vertex_map[c]
    }

    pub fn copy_of_face(&self, tf: usize) -> usize {
        tf / self.base.mesh.n_faces()
    }

    pub fn base_face(&self, tf: usize) -> usize {
        tf % self.base.mesh.n_faces()
    }

    /// Disk vertices of torus face `tf`, listed in torus face order.
    pub fn face_base_vertices(&self, tf: usize) -> [usize; 3] {
        let [a, b, c] = self.base.mesh.face(self.base_face(tf));
        if self.signs[self.copy_of_face(tf)] > 0 {
            [a, b, c]
        } else {
            [a, c, b]
        }
    }

    /// Torus halfedge carrying disk halfedge `h` of copy `c`, and whether it runs the same way.
    pub fn torus_halfedge(&self, c: usize, h: usize) -> (usize, bool) {
        let nf = self.base.mesh.n_faces();
        let (f, k) = (h / 3, h % 3);
        if self.signs[c] > 0 {
            (3 * (c * nf + f) + k, true)
        } else {
            (3 * (c * nf + f) + (5 - k) % 3, false)
        }
    }

    /// Default pin: corner 0 of copy 0.
    pub fn default_pin(&self) -> usize {
        self.vertex_map[0][self.base.sides[0][0]]
    }

    /// Lattice coordinates of `pos(c, v) - pos(class representative)` in the pattern.
    pub fn pattern_offset(&self, c: usize, v: usize) -> Option<IVec> {
        self.offsets.as_ref().map(|o| o[c][v])
    }

    /// Per torus halfedge, the lattice translation between the lifts of its endpoints that
    /// the pattern prescribes.
    pub fn pattern_jumps(&self) -> Option<Vec<IVec>> {
        let off = self.offsets.as_ref()?;
        let mut out = Vec::with_capacity(3 * self.faces.len());
        for tf in 0..self.faces.len() {
            let c = self.copy_of_face(tf);
            let bv = self.face_base_vertices(tf);
            for k in 0..3 {
                out.push(isub(off[c][bv[(k + 1) % 3]], off[c][bv[k]]));
            }
        }
        Some(out)
    }

    /// Weights on the torus, copied face by face from weights on the base disk.
    pub fn lift_weights(&self, w: &EdgeWeights<T>) -> EdgeWeights<T> {
        let mesh = self.mesh();
        let bm = &self.base.mesh;
        let mut he = vec![T::zero(); mesh.n_halfedges()];
        for c in 0..self.copies() {
            for h in 0..bm.n_halfedges() {
                he[self.torus_halfedge(c, h).0] = w.halfedge_weight(h);
            }
        }
        let nf = bm.n_faces();
        let degenerate = (0..self.copies()).flat_map(|c| w.degenerate_faces().iter().map(move |&f| c * nf + f)).collect();
        EdgeWeights::from_halfedges(mesh, w.scheme(), he, degenerate)
    }

    /// Declared local degrees `(covered vertex, e)` for vertices that are branch points.
    pub fn declared_branching(&self) -> &[(usize, usize)] {
        &self.declared
    }

    pub(crate) fn declare_branching(&mut self, d: Vec<(usize, usize)>) {
        self.declared = d;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offset_union_find_composes_translations() {
        let mut uf = OffsetUnionFind::new(4);
        uf.union(0, 1, [1, 0]);
        uf.union(2, 1, [0, 2]);
        uf.union(3, 2, [5, 5]);
        let (r0, o0) = uf.find(0);
        let (r3, o3) = uf.find(3);
        assert_eq!(r0, r3);
        // pos(3) - pos(0) = (5,5) + (0,2) - (1,0)
        assert_eq!(isub(o3, o0), [4, 7]);
    }
}
