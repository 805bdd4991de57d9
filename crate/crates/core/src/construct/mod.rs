//! Glued-torus coverings assembled from copies of a disk or of a cut sphere.

mod covering;
mod disk;
mod glue;
mod patterns;
mod sphere;

use serde::Serialize;
use thiserror::Error;

use crate::mesh::MeshError;

pub use covering::{validate_covering, BranchEntry, CoveringReport};
pub use disk::MarkedDisk;
pub use glue::{glue, match_sides, GluedTorus, Layout, SideGluing, TileBase};
pub use patterns::{
    build_torus_4, build_torus_42, build_torus_63, build_torus_8, reflection_permutation_8, Reflection8, HEX_CORNERS,
    PAIRINGS_8,
};
pub use sphere::{check_sigma, detect_sigma, make_symmetric_cuts, SphereCutSystem};

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("invalid marks: {0}")]
    Marks(String),
    #[error("interior edge ({a}, {b}) joins two vertices of boundary path {side}; split it first")]
    SameSideChord { a: usize, b: usize, side: usize },
    #[error("invalid symmetry: {0}")]
    Symmetry(String),
    #[error("invalid cut system: {0}")]
    Cut(String),
    #[error("no disjoint symmetric cut found after {attempts} attempts; conflicting vertices {conflicts:?}")]
    NoDisjointCut { attempts: usize, conflicts: Vec<usize> },
    #[error("gluing pattern is inconsistent: {0}")]
    Pattern(String),
    #[error("glued complex failed validation: {0}")]
    Validation(String),
}

/// Which covering a torus was built as.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Construction {
    #[serde(rename = "disk-isosceles")]
    Isosceles8,
    #[serde(rename = "disk-rectangle")]
    Rectangle4,
    #[serde(rename = "disk-equilateral")]
    Equilateral42,
    #[serde(rename = "sphere-3fold")]
    Sphere63,
    #[serde(rename = "custom")]
    Custom,
}

impl Construction {
    pub fn copies(self) -> Option<usize> {
        match self {
            Construction::Isosceles8 => Some(8),
            Construction::Rectangle4 => Some(4),
            Construction::Equilateral42 => Some(42),
            Construction::Sphere63 => Some(63),
            Construction::Custom => None,
        }
    }
}
