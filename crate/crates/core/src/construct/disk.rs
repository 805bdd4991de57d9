use super::ConstructError;
use crate::mesh::SurfaceMesh;
use crate::scalar::Real;

/// A disk with marked boundary vertices splitting its boundary into paths.
#[derive(Debug, Clone)]
pub struct MarkedDisk<T> {
    mesh: SurfaceMesh<T>,
    marks: Vec<usize>,
    sides: Vec<Vec<usize>>,
}

impl<T: Real> MarkedDisk<T> {
    /// `marks` must be distinct boundary vertices listed in the order the boundary loop visits
    /// them (counterclockwise with respect to the face orientation).
    pub fn new(mesh: SurfaceMesh<T>, marks: Vec<usize>) -> Result<Self, ConstructError> {
        let bl = mesh.boundary_loop()?;
        if marks.len() < 3 {
            return Err(ConstructError::Marks(format!("need at least 3 marks, got {}", marks.len())));
        }
        for (i, &m) in marks.iter().enumerate() {
            if m >= mesh.n_vertices() {
                return Err(ConstructError::Marks(format!("vertex {m} does not exist")));
            }
            if bl.position(m).is_none() {
                return Err(ConstructError::Marks(format!("vertex {m} is not on the boundary")));
            }
            if marks[..i].contains(&m) {
                return Err(ConstructError::Marks(format!("vertex {m} is marked twice")));
            }
        }
        let sides = bl
            .split_at(&marks)
            .ok_or_else(|| ConstructError::Marks(format!("marks {marks:?} are not in boundary order")))?;
        Ok(Self { mesh, marks, sides })
    }

    pub fn mesh(&self) -> &SurfaceMesh<T> {
        &self.mesh
    }

    pub fn marks(&self) -> &[usize] {
        &self.marks
    }

    /// Boundary path `j` from `marks[j]` to `marks[j + 1]`, endpoints included.
    pub fn side(&self, j: usize) -> &[usize] {
        &self.sides[j]
    }

    pub fn sides(&self) -> &[Vec<usize>] {
        &self.sides
    }

    pub fn side_lengths(&self) -> Vec<usize> {
        self.sides.iter().map(|s| s.len() - 1).collect()
    }

    /// Interior edges whose endpoints both lie on one boundary path, as `(a, b, side)`.
    pub fn same_side_chords(&self) -> Vec<(usize, usize, usize)> {
        let n = self.mesh.n_vertices();
        let mut on_side = vec![Vec::new(); n];
        for (j, s) in self.sides.iter().enumerate() {
            for &v in s {
                on_side[v].push(j);
            }
        }
        let mut out = Vec::new();
        for e in 0..self.mesh.n_edges() {
            if self.mesh.is_boundary_edge(e) {
                continue;
            }
            let [a, b] = self.mesh.edge_vertices(e);
            if let Some(&j) = on_side[a].iter().find(|j| on_side[b].contains(j)) {
                out.push((a.min(b), a.max(b), j));
            }
        }
        out
    }

    pub(crate) fn require(&self, marks: usize) -> Result<(), ConstructError> {
        if self.marks.len() != marks {
            return Err(ConstructError::Marks(format!("expected {marks} marks, got {}", self.marks.len())));
        }
        if let Some(&(a, b, side)) = self.same_side_chords().first() {
            return Err(ConstructError::SameSideChord { a, b, side });
        }
        Ok(())
    }

    pub fn convert<U: Real>(&self) -> MarkedDisk<U> {
        MarkedDisk { mesh: self.mesh.convert(), marks: self.marks.clone(), sides: self.sides.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_fan() -> SurfaceMesh<f64> {
        SurfaceMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.5, 0.0]],
            vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]],
        )
        .unwrap()
    }

    #[test]
    fn sides_follow_marks() {
        let d = MarkedDisk::new(square_fan(), vec![0, 1, 3]).unwrap();
        assert_eq!(d.sides(), &[vec![0, 1], vec![1, 2, 3], vec![3, 0]]);
        assert_eq!(d.side_lengths(), vec![1, 2, 1]);
    }

    #[test]
    fn rejects_bad_marks() {
        assert!(matches!(MarkedDisk::new(square_fan(), vec![0, 1, 4]), Err(ConstructError::Marks(_))));
        assert!(matches!(MarkedDisk::new(square_fan(), vec![0, 3, 1]), Err(ConstructError::Marks(_))));
        assert!(matches!(MarkedDisk::new(square_fan(), vec![0, 1, 1]), Err(ConstructError::Marks(_))));
        assert!(matches!(MarkedDisk::new(square_fan(), vec![0, 1]), Err(ConstructError::Marks(_))));
    }

    #[test]
    fn detects_same_side_chord() {
        // two triangles: the diagonal 0-2 joins two vertices of the path 3 -> 0 -> 1 -> 2
        let m = SurfaceMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let d = MarkedDisk::new(m.clone(), vec![2, 3, 0]).unwrap();
        assert_eq!(d.same_side_chords(), vec![(0, 2, 2)]);
        assert!(matches!(d.require(3), Err(ConstructError::SameSideChord { .. })));
        assert!(MarkedDisk::new(m, vec![0, 1, 2, 3]).unwrap().same_side_chords().is_empty());
    }
}
