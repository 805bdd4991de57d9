//! Harmonic maps of a triangulated torus onto a flat torus `R^2 / L`.
//!
//! The torus is described by vertex lifts in the plane plus an integer lattice translation on
//! every halfedge; the image of halfedge `i -> j` runs from `x_i` to `x_j + J(i -> j)`.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::construct::GluedTorus;
use crate::energy::EdgeWeights;
use crate::lattice::{iadd, idet, ineg, isub, IVec, Lattice};
use crate::linalg::{solve_dense, solve_spd, CsrMatrix, LinalgError, SolveStats, SolverOptions};
use crate::mesh::SurfaceMesh;
use crate::scalar::{add2, orient2, scale2, sub2, Real, Vec2};

#[derive(Debug, Error)]
pub enum TorusError {
    #[error("mesh has boundary; a closed torus is required")]
    NotClosed,
    #[error("mesh is not connected")]
    Disconnected,
    #[error("tree and cotree leave {found} edges, expected 2 (euler characteristic {euler})")]
    LeftoverEdges { found: usize, euler: i64 },
    #[error("jump labels do not close up around face {face}")]
    JumpResidual { face: usize },
    #[error("jump labels violate {0}")]
    JumpInvariant(String),
    #[error("pattern periods: {0}")]
    Periods(String),
    #[error("pin vertex {pin} does not exist")]
    InvalidPin { pin: usize },
    #[error("weights must be finite (degenerate faces {faces:?})")]
    NonFiniteWeights { faces: Vec<usize> },
    #[error("harmonic equations hold only to {residual:.3e} (relative), above the acceptance bound")]
    Residual { residual: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Two halfedge loops generating the first homology of a torus.
#[derive(Debug, Clone)]
pub struct Generators {
    /// Closed halfedge paths; loop `k` runs through tree edges and `leftover[k]` once.
    pub loops: [Vec<usize>; 2],
    /// Halfedges of the two edges in neither the spanning tree nor the dual cotree.
    pub leftover: [usize; 2],
    /// `pairing[i][j]`: signed crossings of loop `i` with the dual loop of `leftover[j]`.
    pub pairing: [[i64; 2]; 2],
    in_tree: Vec<bool>,
    /// Faces of the cotree, root first, each with the halfedge (inside the face) leading to its parent.
    cotree_order: Vec<(usize, Option<usize>)>,
}

impl Generators {
    pub fn pairing_det(&self) -> i64 {
        idet(self.pairing)
    }

    /// Whether edge `e` belongs to the primal spanning tree.
    pub fn in_tree(&self, e: usize) -> bool {
        self.in_tree[e]
    }
}

/// Tree-cotree decomposition rooted at vertex 0 and face 0.
pub fn tree_cotree<T: Real>(mesh: &SurfaceMesh<T>) -> Result<Generators, TorusError> {
    tree_cotree_rooted(mesh, 0, 0)
}

pub fn tree_cotree_rooted<T: Real>(mesh: &SurfaceMesh<T>, root: usize, root_face: usize) -> Result<Generators, TorusError> {
    if !mesh.is_closed() {
        return Err(TorusError::NotClosed);
    }
    let nv = mesh.n_vertices();
    let ne = mesh.n_edges();
    let nf = mesh.n_faces();

    // breadth-first primal tree; parent[v] is the halfedge parent -> v
    let mut parent = vec![usize::MAX; nv];
    let mut depth = vec![usize::MAX; nv];
    let mut in_tree = vec![false; ne];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for h in mesh.outgoing(u) {
            let v = mesh.head(h);
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                parent[v] = h;
                in_tree[mesh.edge(h)] = true;
                queue.push_back(v);
            }
        }
    }
    if depth.contains(&usize::MAX) {
        return Err(TorusError::Disconnected);
    }

    // breadth-first dual tree across non-tree edges
    let mut in_cotree = vec![false; ne];
    let mut seen = vec![false; nf];
    let mut cotree_order = vec![(root_face, None)];
    let mut face_parent = vec![usize::MAX; nf];
    seen[root_face] = true;
    let mut i = 0;
    while i < cotree_order.len() {
        let f = cotree_order[i].0;
        i += 1;
        for h in 3 * f..3 * f + 3 {
            let e = mesh.edge(h);
            if in_tree[e] {
                continue;
            }
            let t = mesh.twin(h).expect("closed mesh");
            let g = mesh.face_of(t);
            if !seen[g] {
                seen[g] = true;
                in_cotree[e] = true;
                face_parent[g] = t;
                cotree_order.push((g, Some(t)));
            }
        }
    }
    if cotree_order.len() != nf {
        return Err(TorusError::Disconnected);
    }

    let leftover: Vec<usize> = (0..ne)
        .filter(|&e| !in_tree[e] && !in_cotree[e])
        .map(|e| mesh.edge_halfedges(e).0)
        .collect();
    if leftover.len() != 2 {
        return Err(TorusError::LeftoverEdges { found: leftover.len(), euler: mesh.euler_characteristic() });
    }
    let leftover = [leftover[0], leftover[1]];

    let path_to_root = |mut v: usize| {
        let mut p = Vec::new();
        while v != root {
            p.push(parent[v]);
            v = mesh.origin(parent[v]);
        }
        p.reverse();
        p
    };
    let loops = leftover.map(|h| {
        // root -> origin(h), h, head(h) -> root, with the shared stem removed
        let a = path_to_root(mesh.origin(h));
        let b = path_to_root(mesh.head(h));
        let common = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
        let mut lp: Vec<usize> = a[common..].to_vec();
        lp.push(h);
        lp.extend(b[common..].iter().rev().map(|&g| mesh.twin(g).expect("closed mesh")));
        lp
    });

    // dual loop of leftover[j]: across h, then back through the cotree
    let face_depth = {
        let mut d = vec![0usize; nf];
        for &(f, p) in &cotree_order {
            if let Some(t) = p {
                d[f] = d[mesh.face_of(mesh.twin(t).expect("closed mesh"))] + 1;
            }
        }
        d
    };
    let up = |f: usize| mesh.face_of(mesh.twin(face_parent[f]).expect("closed mesh"));
    let tw = |g: usize| mesh.twin(g).expect("closed mesh");
    let crossings = |h: usize| -> Vec<i64> {
        // +1 on halfedge g when the dual loop passes from face(g) into face(twin g)
        let mut c = vec![0i64; 3 * nf];
        let mut cross = |g: usize| {
            c[g] += 1;
            c[tw(g)] -= 1;
        };
        cross(h);
        let (mut f, mut g) = (mesh.face_of(tw(h)), mesh.face_of(h));
        let mut down = Vec::new();
        while f != g {
            if face_depth[f] >= face_depth[g] {
                cross(face_parent[f]);
                f = up(f);
            } else {
                down.push(face_parent[g]);
                g = up(g);
            }
        }
        for t in down {
            cross(tw(t));
        }
        c
    };
    let mut pairing = [[0i64; 2]; 2];
    for j in 0..2 {
        let c = crossings(leftover[j]);
        for i in 0..2 {
            pairing[i][j] = loops[i].iter().map(|&g| c[g]).sum();
        }
    }
    Ok(Generators { loops, leftover, pairing, in_tree, cotree_order })
}

/// Integer translation on every halfedge, in coefficients of `lattice`.
#[derive(Debug, Clone)]
pub struct JumpAssignment<T> {
    pub lattice: Lattice<T>,
    pub jumps: Vec<IVec>,
}

impl<T: Real> JumpAssignment<T> {
    pub fn vector(&self, h: usize) -> Vec2<T> {
        self.lattice.point(self.jumps[h])
    }

    /// Same translations written in another basis: `self.lattice` basis vector `k` equals
    /// `m[k][0] u1 + m[k][1] u2` in `other`.
    pub fn change_basis(&self, other: Lattice<T>, m: [[i64; 2]; 2]) -> Self {
        let jumps = self
            .jumps
            .iter()
            .map(|&[a, b]| [a * m[0][0] + b * m[1][0], a * m[0][1] + b * m[1][1]])
            .collect();
        Self { lattice: other, jumps }
    }

    /// Antisymmetry and face closure, checked exhaustively.
    pub fn check_cocycle(&self, mesh: &SurfaceMesh<T>) -> Result<(), TorusError> {
        for h in 0..mesh.n_halfedges() {
            let t = mesh.twin(h).ok_or(TorusError::NotClosed)?;
            if self.jumps[t] != ineg(self.jumps[h]) {
                return Err(TorusError::JumpInvariant(format!("antisymmetry on halfedge {h}")));
            }
        }
        for f in 0..mesh.n_faces() {
            if iadd(iadd(self.jumps[3 * f], self.jumps[3 * f + 1]), self.jumps[3 * f + 2]) != [0, 0] {
                return Err(TorusError::JumpResidual { face: f });
            }
        }
        Ok(())
    }

    pub fn loop_sum(&self, lp: &[usize]) -> IVec {
        lp.iter().fold([0, 0], |s, &h| iadd(s, self.jumps[h]))
    }

    /// All three invariants: the cocycle conditions and unit sums along the generators.
    pub fn check(&self, mesh: &SurfaceMesh<T>, gens: &Generators) -> Result<(), TorusError> {
        self.check_cocycle(mesh)?;
        for (k, unit) in [[1, 0], [0, 1]].into_iter().enumerate() {
            if self.loop_sum(&gens.loops[k]) != unit {
                return Err(TorusError::JumpInvariant(format!("sum along generator {k} is {:?}", self.loop_sum(&gens.loops[k]))));
            }
        }
        Ok(())
    }
}

/// Jumps that vanish on the spanning tree, equal the unit vectors on the two leftover edges and
/// close up around every face; cotree edges are filled in from the leaves towards the root face.
pub fn assign_jumps<T: Real>(mesh: &SurfaceMesh<T>, gens: &Generators, lattice: Lattice<T>) -> Result<JumpAssignment<T>, TorusError> {
    let nh = mesh.n_halfedges();
    let mut jumps = vec![[0i64; 2]; nh];
    let mut known = vec![false; nh];
    let set = |jumps: &mut Vec<IVec>, known: &mut Vec<bool>, h: usize, v: IVec| {
        let t = mesh.twin(h).expect("closed mesh");
        jumps[h] = v;
        jumps[t] = ineg(v);
        known[h] = true;
        known[t] = true;
    };
    for h in 0..nh {
        if gens.in_tree[mesh.edge(h)] {
            known[h] = true;
        }
    }
    set(&mut jumps, &mut known, gens.leftover[0], [1, 0]);
    set(&mut jumps, &mut known, gens.leftover[1], [0, 1]);
    for &(f, up) in gens.cotree_order.iter().rev() {
        let Some(up) = up else { continue };
        let rest = (3 * f..3 * f + 3).filter(|&h| h != up).fold([0, 0], |s, h| {
            debug_assert!(known[h]);
            iadd(s, jumps[h])
        });
        set(&mut jumps, &mut known, up, ineg(rest));
    }
    let root = gens.cotree_order[0].0;
    let residual = (3 * root..3 * root + 3).fold([0, 0], |s, h| iadd(s, jumps[h]));
    if residual != [0, 0] {
        return Err(TorusError::JumpResidual { face: root });
    }
    let j = JumpAssignment { lattice, jumps };
    j.check(mesh, gens)?;
    Ok(j)
}

/// Translation of the pattern along each generator, in coefficients of the torus lattice.
/// Fails unless the periods form a basis of that lattice.
pub fn pattern_periods<T: Real>(t: &GluedTorus<T>, gens: &Generators) -> Result<[[i64; 2]; 2], TorusError> {
    let pj = t.pattern_jumps().ok_or_else(|| TorusError::Periods("torus has no consistent pattern layout".into()))?;
    let m = gens.loops.clone().map(|lp| lp.iter().fold([0, 0], |s, &h| iadd(s, pj[h])));
    if idet(m).abs() != 1 {
        return Err(TorusError::Periods(format!("periods {m:?} do not span the lattice (determinant {})", idet(m))));
    }
    Ok(m)
}

/// Harmonic map of a torus, as vertex lifts plus per-halfedge jumps.
#[derive(Debug, Clone, Serialize)]
pub struct TorusEmbedding<T> {
    pub lattice: Lattice<T>,
    pub lifts: Vec<Vec2<T>>,
    #[serde(skip)]
    pub jumps: Vec<IVec>,
    pub pin: usize,
    pub stats: SolveStats,
    /// Largest harmonic-equation residual divided by `max |w| * lattice cell diameter`.
    pub equation_residual: f64,
}

impl<T: Real> TorusEmbedding<T> {
    /// Planar image of halfedge `h`'s head as seen from its origin's lift.
    pub fn head_lift(&self, mesh: &SurfaceMesh<T>, h: usize) -> Vec2<T> {
        add2(self.lifts[mesh.head(h)], self.lattice.point(self.jumps[h]))
    }

    /// Corners of face `f` in one consistent lift, starting at the lift of its first vertex.
    pub fn face_corners(&self, mesh: &SurfaceMesh<T>, f: usize) -> [Vec2<T>; 3] {
        let a = self.lifts[mesh.face(f)[0]];
        let b = self.head_lift(mesh, 3 * f);
        let c = add2(self.lifts[mesh.face(f)[2]], self.lattice.point(iadd(self.jumps[3 * f], self.jumps[3 * f + 1])));
        [a, b, c]
    }

    pub fn signed_areas(&self, mesh: &SurfaceMesh<T>) -> Vec<T> {
        (0..mesh.n_faces())
            .map(|f| {
                let [a, b, c] = self.face_corners(mesh, f);
                orient2(a, b, c) * T::half()
            })
            .collect()
    }

    /// Planar positions of the disk vertices of copy `c`, unrolled from the lift of the copy's
    /// first corner through its interior edges.
    pub fn copy_uv(&self, t: &GluedTorus<T>, c: usize) -> Vec<Vec2<T>> {
        let mesh = t.mesh();
        let bm = &t.base().mesh;
        let n = bm.n_vertices();
        let start = t.base().sides[0][0];
        let mut pos: Vec<Option<Vec2<T>>> = vec![None; n];
        pos[start] = Some(self.lifts[t.torus_vertex(c, start)]);
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            let pa = pos[a].expect("visited");
            for h in bm.outgoing(a) {
                let b = bm.head(h);
                if pos[b].is_some() {
                    continue;
                }
                let (th, forward) = t.torus_halfedge(c, h);
                let step = sub2(self.head_lift(mesh, th), self.lifts[mesh.origin(th)]);
                pos[b] = Some(if forward { add2(pa, step) } else { sub2(pa, step) });
                queue.push_back(b);
            }
        }
        pos.into_iter().map(|p| p.expect("disk is connected")).collect()
    }

    /// Position of every vertex reduced into the lattice cell.
    pub fn reduced(&self) -> Vec<Vec2<T>> {
        self.lifts.iter().map(|&p| self.lattice.reduce(p).0).collect()
    }
}

/// Solves `sum_j w_ij (x_j + J(i->j) - x_i) = 0` for every vertex but `pin`, with `x_pin = 0`.
/// Negative weights switch to a dense LU solve; results are normalized so that every lift lies
/// in the lattice cell at the origin.
pub fn solve_torus<T: Real>(
    mesh: &SurfaceMesh<T>,
    w: &EdgeWeights<T>,
    jumps: &JumpAssignment<T>,
    pin: usize,
    opts: &SolverOptions,
) -> Result<TorusEmbedding<T>, TorusError> {
    let nv = mesh.n_vertices();
    if pin >= nv {
        return Err(TorusError::InvalidPin { pin });
    }
    if w.edge_weights().iter().any(|x| !x.is_finite()) {
        return Err(TorusError::NonFiniteWeights { faces: w.degenerate_faces().to_vec() });
    }
    let lattice = jumps.lattice;
    let idx = |v: usize| if v < pin { Some(v) } else if v == pin { None } else { Some(v - 1) };
    let n = nv - 1;
    let mut trip = Vec::with_capacity(4 * mesh.n_edges());
    let mut rhs = [vec![T::zero(); n], vec![T::zero(); n]];
    for e in 0..mesh.n_edges() {
        let (h, _) = mesh.edge_halfedges(e);
        let (i, j) = (mesh.origin(h), mesh.head(h));
        let we = w.weight(e);
        let d = scale2(jumps.vector(h), we);
        if let Some(a) = idx(i) {
            trip.push((a, a, we));
            rhs[0][a] += d[0];
            rhs[1][a] += d[1];
            if let Some(b) = idx(j) {
                trip.push((a, b, -we));
            }
        }
        if let Some(b) = idx(j) {
            trip.push((b, b, we));
            rhs[0][b] -= d[0];
            rhs[1][b] -= d[1];
            if let Some(a) = idx(i) {
                trip.push((b, a, -we));
            }
        }
    }
    let a = CsrMatrix::from_triplets(n, trip);
    let negative = w.edge_weights().iter().any(|&x| x < T::zero());
    let rhs = rhs.to_vec();
    let (sol, stats) = if negative {
        log::warn!("negative weights: solving densely, the embedding may fold");
        solve_dense(&a, &rhs)?
    } else {
        solve_spd(&a, &rhs, opts)?
    };
    if !(stats.relative_residual <= opts.accept) {
        return Err(TorusError::Residual { residual: stats.relative_residual });
    }
    let mut lifts = vec![[T::zero(); 2]; nv];
    for v in 0..nv {
        if let Some(k) = idx(v) {
            lifts[v] = [sol[0][k], sol[1][k]];
        }
    }

    // move each lift into the cell at the origin and push the shift into the jumps
    let mut jumps_out = jumps.jumps.clone();
    let mut shift = vec![[0i64; 2]; nv];
    for v in 0..nv {
        if v != pin {
            let (p, k) = lattice.reduce(lifts[v]);
            lifts[v] = p;
            shift[v] = k;
        }
    }
    for (h, jh) in jumps_out.iter_mut().enumerate() {
        *jh = isub(iadd(*jh, shift[mesh.head(h)]), shift[mesh.origin(h)]);
    }

    let mut emb = TorusEmbedding { lattice, lifts, jumps: jumps_out, pin, stats, equation_residual: 0.0 };
    emb.equation_residual = equation_residual(mesh, w, &emb);
    Ok(emb)
}

/// Largest `|sum_j w_ij (x_j + J - x_i)|` over non-pinned vertices, relative to
/// `max |w| * cell diameter`.
pub fn equation_residual<T: Real>(mesh: &SurfaceMesh<T>, w: &EdgeWeights<T>, emb: &TorusEmbedding<T>) -> f64 {
    let mut r = vec![[0.0f64; 2]; mesh.n_vertices()];
    for e in 0..mesh.n_edges() {
        let (h, _) = mesh.edge_halfedges(e);
        let (i, j) = (mesh.origin(h), mesh.head(h));
        let d = sub2(emb.head_lift(mesh, h), emb.lifts[i]).map(|x| x.as_f64());
        let we = w.weight(e).as_f64();
        for k in 0..2 {
            r[i][k] += we * d[k];
            r[j][k] -= we * d[k];
        }
    }
    let wmax = w.edge_weights().iter().map(|x| x.as_f64().abs()).fold(0.0, f64::max);
    let scale = wmax * emb.lattice.cell_diameter().as_f64();
    let worst = (0..mesh.n_vertices())
        .filter(|&v| v != emb.pin)
        .map(|v| r[v][0].hypot(r[v][1]))
        .fold(0.0, f64::max);
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// Dirichlet energy of the embedding, summed face by face over consistent lifts.
pub fn energy_of<T: Real>(mesh: &SurfaceMesh<T>, w: &EdgeWeights<T>, emb: &TorusEmbedding<T>) -> T {
    (0..mesh.n_faces()).map(|f| w.face_energy(f, emb.face_corners(mesh, f))).sum()
}

/// Generators, pattern-consistent jumps and the harmonic solve for a glued torus. Tori without
/// a layout are mapped with the generators sent to the basis of `fallback`.
pub fn harmonic_embedding<T: Real>(
    t: &GluedTorus<T>,
    w: &EdgeWeights<T>,
    pin: usize,
    fallback: Lattice<T>,
    opts: &SolverOptions,
) -> Result<(TorusEmbedding<T>, Generators), TorusError> {
    let mesh = t.mesh();
    let gens = tree_cotree(mesh)?;
    let (jumps, lattice) = match t.lattice() {
        Some(target) => {
            let m = pattern_periods(t, &gens)?;
            let j = assign_jumps(mesh, &gens, target.rebased(m))?;
            (j.change_basis(target, m), target)
        }
        None => (assign_jumps(mesh, &gens, fallback)?, fallback),
    };
    jumps.check_cocycle(mesh)?;
    debug_assert_eq!(jumps.lattice, lattice);
    let emb = solve_torus(mesh, w, &jumps, pin, opts)?;
    Ok((emb, gens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build_torus_8;
    use crate::energy::uniform_weights;
    use crate::fixtures;

    #[test]
    fn pairing_is_unimodular() {
        let t = build_torus_8(&fixtures::random_delaunay_disk(30, 2).marked()).unwrap();
        let g = tree_cotree(t.mesh()).unwrap();
        assert_eq!(g.pairing_det().abs(), 1);
        assert_eq!(g.pairing[0][1], 0);
        assert_eq!(g.pairing[1][0], 0);
    }

    #[test]
    fn single_triangle_quarter_points() {
        let t = build_torus_8(&fixtures::single_triangle().marked()).unwrap();
        let w = uniform_weights(t.mesh());
        let (emb, _) = harmonic_embedding(&t, &w, t.default_pin(), Lattice::unit_square(), &SolverOptions::for_scalar::<f64>()).unwrap();
        let mut pts: Vec<[i64; 2]> = emb.reduced().iter().map(|p| [(p[0] * 4.0).round() as i64, (p[1] * 4.0).round() as i64]).collect();
        pts.sort();
        assert_eq!(pts, vec![[0, 0], [0, 2], [2, 0], [2, 2]]);
    }
}
