//! Dirichlet-optimal parameterization through glued-torus coverings.
//!
//! A disk (or a 3-fold symmetric sphere) is copied, the copies are glued into a closed torus,
//! and the torus is mapped harmonically onto a flat torus. The image of a single copy is the
//! parameterization: an octant of the square for 8 copies, a rectangle for 4, an equilateral
//! triangle for 42, and a 3-fold symmetric tile for 63 copies of a sphere.
//!
//! Everything numeric is generic over [`scalar::Real`] (`f32` or `f64`); the aliases below fix
//! the scalar to `f64`.

pub mod analysis;
pub mod construct;
pub mod direct;
pub mod energy;
pub mod fixtures;
pub mod lattice;
pub mod linalg;
pub mod mesh;
pub mod pipeline;
pub mod scalar;
pub mod torus;

pub type SurfaceMesh64 = mesh::SurfaceMesh<f64>;
pub type SurfaceMesh32 = mesh::SurfaceMesh<f32>;
pub type EdgeWeights64 = energy::EdgeWeights<f64>;
pub type MarkedDisk64 = construct::MarkedDisk<f64>;
pub type GluedTorus64 = construct::GluedTorus<f64>;
pub type SphereCutSystem64 = construct::SphereCutSystem<f64>;
pub type Lattice64 = lattice::Lattice<f64>;
pub type TorusEmbedding64 = torus::TorusEmbedding<f64>;
