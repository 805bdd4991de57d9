use super::{MeshError, SurfaceMesh};
use crate::scalar::Real;

/// A mesh cut open along a set of edges. Face indices are unchanged; vertices incident to cut
/// edges are split into one copy per wedge of faces between consecutive cut edges.
#[derive(Debug, Clone)]
pub struct CutMesh<T> {
    pub mesh: SurfaceMesh<T>,
    /// Original vertex of every vertex of the cut mesh.
    pub origin: Vec<usize>,
}

pub fn cut_along_edges<T: Real>(mesh: &SurfaceMesh<T>, cut: &[usize]) -> Result<CutMesh<T>, MeshError> {
    let mut is_cut = vec![false; mesh.n_edges()];
    for &e in cut {
        is_cut[e] = true;
    }
    let mut corner_vertex = vec![usize::MAX; mesh.n_halfedges()];
    let mut origin = Vec::new();
    for v in 0..mesh.n_vertices() {
        let mut fan = mesh.outgoing(v);
        if !mesh.is_boundary_vertex(v) {
            if let Some(first) = fan.iter().position(|&h| is_cut[mesh.edge(h)]) {
                fan.rotate_left(first);
            }
        }
        for (i, &h) in fan.iter().enumerate() {
            if i == 0 || is_cut[mesh.edge(h)] {
                origin.push(v);
            }
            corner_vertex[h] = origin.len() - 1;
        }
    }
    let faces = (0..mesh.n_faces())
        .map(|f| [corner_vertex[3 * f], corner_vertex[3 * f + 1], corner_vertex[3 * f + 2]])
        .collect();
    let positions = origin.iter().map(|&o| mesh.position(o)).collect();
    Ok(CutMesh { mesh: SurfaceMesh::new(positions, faces)?, origin })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutting_a_tetrahedron_along_its_apex_star_gives_a_hexagon_disk() {
        let m = SurfaceMesh::<f64>::new(
            vec![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [-0.5, 0.8, 0.0], [-0.5, -0.8, 0.0]],
            vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]],
        )
        .unwrap();
        let apex_edges: Vec<usize> = m.outgoing(0).iter().map(|&h| m.edge(h)).collect();
        let cut = cut_along_edges(&m, &apex_edges).unwrap();
        assert_eq!(cut.mesh.n_vertices(), 6);
        assert_eq!(cut.mesh.n_edges(), 9);
        assert!(cut.mesh.classify().is_disk());
        assert_eq!(cut.origin.iter().filter(|&&o| o == 0).count(), 3);
        let bl = cut.mesh.boundary_loop().unwrap();
        assert_eq!(bl.len(), 6);
        // corners alternate between apex copies and base vertices
        for (i, &v) in bl.vertices.iter().enumerate() {
            let next = bl.vertices[(i + 1) % 6];
            assert!((cut.origin[v] == 0) != (cut.origin[next] == 0));
        }
    }
}
