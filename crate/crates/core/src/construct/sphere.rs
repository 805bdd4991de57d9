use std::collections::HashMap;

use petgraph::graph::{NodeIndex, UnGraph};

use super::glue::TileBase;
use super::ConstructError;
use crate::mesh::{cut_along_edges, SurfaceMesh};
use crate::scalar::{add3, cross3, dot3, norm3, scale3, sub3, Real, Vec3};

/// A sphere with an order-3 symmetry `sigma` fixing `p_o`, and three cut paths from `p_o` that
/// `sigma` permutes cyclically.
#[derive(Debug, Clone)]
pub struct SphereCutSystem<T> {
    mesh: SurfaceMesh<T>,
    p_o: usize,
    paths: [Vec<usize>; 3],
    sigma: Vec<usize>,
    base: TileBase<T>,
}

fn face_key(f: [usize; 3]) -> [usize; 3] {
    let i = (0..3).min_by_key(|&i| f[i]).expect("three corners");
    [f[i], f[(i + 1) % 3], f[(i + 2) % 3]]
}

fn face_lookup<T: Real>(mesh: &SurfaceMesh<T>) -> HashMap<[usize; 3], usize> {
    mesh.faces().iter().enumerate().map(|(i, &f)| (face_key(f), i)).collect()
}

/// Checks that `sigma` is an orientation-preserving simplicial automorphism of order 3 fixing
/// `p_o`.
pub fn check_sigma<T: Real>(mesh: &SurfaceMesh<T>, sigma: &[usize], p_o: usize) -> Result<(), ConstructError> {
    let n = mesh.n_vertices();
    let err = |m: String| Err(ConstructError::Symmetry(m));
    if sigma.len() != n {
        return err(format!("permutation has {} entries for {n} vertices", sigma.len()));
    }
    let mut hit = vec![false; n];
    for &s in sigma {
        if s >= n || hit[s] {
            return err("not a permutation".into());
        }
        hit[s] = true;
    }
    if let Some(v) = (0..n).find(|&v| sigma[sigma[sigma[v]]] != v) {
        return err(format!("sigma^3 moves vertex {v}"));
    }
    if (0..n).all(|v| sigma[v] == v) {
        return err("sigma is the identity".into());
    }
    if p_o >= n || sigma[p_o] != p_o {
        return err(format!("sigma does not fix vertex {p_o}"));
    }
    let faces = face_lookup(mesh);
    for (i, f) in mesh.faces().iter().enumerate() {
        if !faces.contains_key(&face_key(f.map(|v| sigma[v]))) {
            return err(format!("face {i} is not mapped to a face"));
        }
    }
    Ok(())
}

fn halfedge_between<T: Real>(mesh: &SurfaceMesh<T>, u: usize, v: usize) -> Option<usize> {
    mesh.outgoing(u).into_iter().find(|&h| mesh.head(h) == v)
}

impl<T: Real> SphereCutSystem<T> {
    /// Validates the input and cuts the sphere open along the three paths. If the cut disk
    /// visits the paths clockwise, paths 1 and 2 are swapped and `sigma` is replaced by its
    /// square so the boundary reads `γ0, γ1, γ2` counterclockwise.
    pub fn new(mesh: SurfaceMesh<T>, p_o: usize, paths: [Vec<usize>; 3], sigma: Vec<usize>) -> Result<Self, ConstructError> {
        let topo = mesh.classify();
        if !topo.is_sphere() {
            return Err(ConstructError::Cut(format!(
                "input is not a sphere (euler characteristic {}, {} boundary loops)",
                topo.euler_characteristic, topo.boundary_loop_count
            )));
        }
        check_sigma(&mesh, &sigma, p_o)?;
        let n = mesh.n_vertices();
        let mut used = vec![usize::MAX; n];
        for (j, p) in paths.iter().enumerate() {
            if p.len() < 2 || p[0] != p_o {
                return Err(ConstructError::Cut(format!("path {j} must start at {p_o} and have an edge")));
            }
            for w in p.windows(2) {
                if w[1] >= n || halfedge_between(&mesh, w[0], w[1]).is_none() {
                    return Err(ConstructError::Cut(format!("path {j}: {} and {} are not adjacent", w[0], w[1])));
                }
            }
            for &v in &p[1..] {
                if used[v] != usize::MAX {
                    return Err(ConstructError::Cut(format!("vertex {v} lies on paths {} and {j}", used[v])));
                }
                used[v] = j;
            }
        }
        for j in 0..3 {
            let image: Vec<usize> = paths[j].iter().map(|&v| sigma[v]).collect();
            if image != paths[(j + 1) % 3] {
                return Err(ConstructError::Cut(format!("sigma does not map path {j} onto path {}", (j + 1) % 3)));
            }
        }
        let (mut paths, mut sigma) = (paths, sigma);
        let base = match cut_base(&mesh, p_o, &paths)? {
            Some(b) => b,
            None => {
                let [a, b, c] = paths;
                paths = [a, c, b];
                sigma = (0..n).map(|v| sigma[sigma[v]]).collect();
                cut_base(&mesh, p_o, &paths)?
                    .ok_or_else(|| ConstructError::Cut("cut disk has an unexpected boundary word".into()))?
            }
        };
        Ok(Self { mesh, p_o, paths, sigma, base })
    }

    pub fn mesh(&self) -> &SurfaceMesh<T> {
        &self.mesh
    }

    pub fn p_o(&self) -> usize {
        self.p_o
    }

    pub fn paths(&self) -> &[Vec<usize>; 3] {
        &self.paths
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn leaves(&self) -> [usize; 3] {
        [0, 1, 2].map(|j| *self.paths[j].last().expect("non-empty path"))
    }

    /// The cut disk with sides `p→L0, L0→p, p→L1, L1→p, p→L2, L2→p`.
    pub fn tile_base(&self) -> Result<TileBase<T>, ConstructError> {
        Ok(self.base.clone())
    }

    /// `sigma` lifted to the vertices of the cut disk (it maps wedges to wedges).
    pub fn cut_sigma(&self) -> Vec<usize> {
        let cut = &self.base.mesh;
        let faces = face_lookup(&self.mesh);
        let mut out = vec![usize::MAX; cut.n_vertices()];
        for f in 0..cut.n_faces() {
            let image = faces[&face_key(self.mesh.face(f).map(|v| self.sigma[v]))];
            for k in 0..3 {
                let u = cut.face(f)[k];
                let target = self.sigma[self.base.origin[u]];
                let pos = (0..3).find(|&i| self.mesh.face(image)[i] == target).expect("image face holds the image vertex");
                out[u] = cut.face(image)[pos];
            }
        }
        out
    }

    pub fn convert<U: Real>(&self) -> SphereCutSystem<U> {
        let b = &self.base;
        SphereCutSystem {
            mesh: self.mesh.convert(),
            p_o: self.p_o,
            paths: self.paths.clone(),
            sigma: self.sigma.clone(),
            base: TileBase { mesh: b.mesh.convert(), sides: b.sides.clone(), origin: b.origin.clone(), covered: b.covered.convert() },
        }
    }
}

/// Cuts along the paths. `Ok(None)` when the boundary visits the paths in the order
/// `γ0, γ2, γ1`.
fn cut_base<T: Real>(mesh: &SurfaceMesh<T>, p_o: usize, paths: &[Vec<usize>; 3]) -> Result<Option<TileBase<T>>, ConstructError> {
    let mut edges = Vec::new();
    for p in paths {
        for w in p.windows(2) {
            edges.push(mesh.edge(halfedge_between(mesh, w[0], w[1]).expect("validated adjacency")));
        }
    }
    let cut = cut_along_edges(mesh, &edges)?;
    let bl = cut.mesh.boundary_loop().map_err(|_| ConstructError::Cut("cutting did not produce a disk".into()))?;
    let len = bl.len();
    let o = |i: usize| cut.origin[bl.vertices[i % len]];
    let start = (0..len)
        .find(|&i| o(i) == p_o && o(i + 1) == paths[0][1])
        .ok_or_else(|| ConstructError::Cut("path 0 is not on the cut boundary".into()))?;
    let leaves: Vec<usize> = paths.iter().map(|p| *p.last().expect("non-empty")).collect();
    let corners: Vec<usize> = (0..len)
        .map(|i| bl.vertices[(start + i) % len])
        .filter(|&v| cut.origin[v] == p_o || leaves.contains(&cut.origin[v]))
        .collect();
    let word: Vec<usize> = corners.iter().map(|&v| cut.origin[v]).collect();
    if word == [p_o, leaves[0], p_o, leaves[2], p_o, leaves[1]] {
        return Ok(None);
    }
    if word != [p_o, leaves[0], p_o, leaves[1], p_o, leaves[2]] {
        return Err(ConstructError::Cut(format!("unexpected boundary corner word {word:?}")));
    }
    let sides = bl.split_at(&corners).ok_or_else(|| ConstructError::Cut("corners out of order".into()))?;
    for (s, side) in sides.iter().enumerate() {
        let path = &paths[s / 2];
        let expect: Vec<usize> = if s % 2 == 0 { path.clone() } else { path.iter().rev().copied().collect() };
        let got: Vec<usize> = side.iter().map(|&v| cut.origin[v]).collect();
        if got != expect {
            return Err(ConstructError::Cut(format!("side {s} does not follow its cut path")));
        }
    }
    Ok(Some(TileBase { mesh: cut.mesh, sides, origin: cut.origin, covered: mesh.clone() }))
}

const MAX_CUT_ATTEMPTS: usize = 16;

/// Shortest edge path `γ0` from `p_o` to `seed_target` whose images under `sigma` and
/// `sigma^2` avoid it; vertices where the images collide are penalized and the search repeated.
pub fn make_symmetric_cuts<T: Real>(
    mesh: &SurfaceMesh<T>,
    p_o: usize,
    sigma: &[usize],
    seed_target: usize,
) -> Result<SphereCutSystem<T>, ConstructError> {
    check_sigma(mesh, sigma, p_o)?;
    let n = mesh.n_vertices();
    if seed_target >= n || seed_target == p_o || sigma[seed_target] == seed_target {
        return Err(ConstructError::Cut(format!("seed target {seed_target} must be a vertex moved by sigma")));
    }
    let forbidden: Vec<bool> = (0..n).map(|v| v != p_o && sigma[v] == v).collect();
    let mut penalty = vec![1.0f64; n];
    let mut conflicts = Vec::new();
    for _ in 0..MAX_CUT_ATTEMPTS {
        let mut g = UnGraph::<(), f64>::with_capacity(n, mesh.n_edges());
        for _ in 0..n {
            g.add_node(());
        }
        for e in 0..mesh.n_edges() {
            let [u, v] = mesh.edge_vertices(e);
            if forbidden[u] || forbidden[v] {
                continue;
            }
            let len = norm3(sub3(mesh.position(u), mesh.position(v))).as_f64();
            g.add_edge(NodeIndex::new(u), NodeIndex::new(v), len * 0.5 * (penalty[u] + penalty[v]));
        }
        let goal = NodeIndex::new(seed_target);
        let found = petgraph::algo::astar(&g, NodeIndex::new(p_o), |x| x == goal, |e| *e.weight(), |_| 0.0);
        let Some((_, nodes)) = found else {
            return Err(ConstructError::Cut(format!("seed target {seed_target} is unreachable from {p_o}")));
        };
        let path: Vec<usize> = nodes.iter().map(|x| x.index()).collect();
        let mut on_image = vec![false; n];
        for &v in &path[1..] {
            on_image[sigma[v]] = true;
            on_image[sigma[sigma[v]]] = true;
        }
        conflicts = path[1..].iter().copied().filter(|&v| on_image[v]).collect();
        if conflicts.is_empty() {
            let p1: Vec<usize> = path.iter().map(|&v| sigma[v]).collect();
            let p2: Vec<usize> = p1.iter().map(|&v| sigma[v]).collect();
            return SphereCutSystem::new(mesh.clone(), p_o, [path, p1, p2], sigma.to_vec());
        }
        for &v in &conflicts {
            for w in [v, sigma[v], sigma[sigma[v]]] {
                penalty[w] *= 8.0;
            }
        }
    }
    Err(ConstructError::NoDisjointCut { attempts: MAX_CUT_ATTEMPTS, conflicts })
}

fn rotate_about(p: Vec3<f64>, center: Vec3<f64>, axis: Vec3<f64>, angle: f64) -> Vec3<f64> {
    let v = sub3(p, center);
    let (c, s) = (angle.cos(), angle.sin());
    let rotated = add3(add3(scale3(v, c), scale3(cross3(axis, v), s)), scale3(axis, dot3(axis, v) * (1.0 - c)));
    add3(center, rotated)
}

/// Finds the order-3 symmetry fixing `p_o` by rotating the mesh a third of a turn about the
/// line through `p_o` and the vertex centroid and matching every vertex to its nearest image.
pub fn detect_sigma<T: Real>(mesh: &SurfaceMesh<T>, p_o: usize) -> Result<Vec<usize>, ConstructError> {
    let n = mesh.n_vertices();
    if p_o >= n {
        return Err(ConstructError::Symmetry(format!("vertex {p_o} does not exist")));
    }
    let pts: Vec<Vec3<f64>> = mesh.positions().iter().map(|p| p.map(|x| x.as_f64())).collect();
    let centroid = scale3(pts.iter().fold([0.0; 3], |a, &p| add3(a, p)), 1.0 / n as f64);
    let axis = sub3(pts[p_o], centroid);
    let len = norm3(axis);
    let diam = mesh.diameter().as_f64();
    if len <= 1e-12 * diam {
        return Err(ConstructError::Symmetry("p_O coincides with the centroid".into()));
    }
    let axis = scale3(axis, 1.0 / len);
    let tol = 1e-6 * diam;
    let sigma: Option<Vec<usize>> = pts
        .iter()
        .map(|&p| {
            let q = rotate_about(p, centroid, axis, 2.0 * std::f64::consts::PI / 3.0);
            let (best, d) = pts
                .iter()
                .enumerate()
                .map(|(i, &r)| (i, norm3(sub3(r, q))))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty mesh");
            (d <= tol).then_some(best)
        })
        .collect();
    let sigma = sigma.ok_or_else(|| ConstructError::Symmetry("mesh has no 3-fold rotational symmetry about p_O".into()))?;
    check_sigma(mesh, &sigma, p_o)?;
    Ok(sigma)
}
