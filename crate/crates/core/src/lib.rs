//! First-order virtual element method (VEM) for plane-strain linear elasticity on
//! arbitrary polygonal meshes, with indicator-driven adaptive refinement.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! file system, clocks or the command line lives in the `vemadapt` companion
//! crate.
//!
//! Layout:
//!
//! * [`geometry`] - polygons, bounded Voronoi tessellation, Lloyd smoothing
//! * [`mesh`] - conforming polygonal mesh, adjacency, element refinement
//! * [`vem`] - element projection and stiffness, assembly, solve
//! * [`sparse`] - sparse symmetric storage, Cholesky and PCG
//! * [`indicators`] - DB / SJ / Z2 refinement indicators and element marking
//! * [`metrics`] - H1 / L2 error approximations, PSE, PRE
//! * [`problems`] - benchmark problem catalog
//! * [`adapt`] - the solve / indicate / select / refine loop

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod adapt;
pub mod error;
pub mod geometry;
pub mod indicators;
pub mod mesh;
pub mod metrics;
pub mod problems;
pub mod sparse;
pub mod vem;

mod dense;
mod rng;

pub use error::{Error, Result};
pub use geometry::{DomainShape, Point, Polygon, SeedMode, SeedSet};
pub use mesh::{Mesh, MeshMode, RefinementPlan};
pub use vem::{Material, Solution};
