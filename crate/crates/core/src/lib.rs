//! Finite elements on Cartesian quadrilateral and hexahedral meshes.

mod dense;
pub mod cellfield;
pub mod error;
pub mod fespace;
pub mod geometry;
pub mod mesh;
pub mod operators;
pub mod postprocess;
pub mod reffe;
pub mod solvers;
pub mod sparse;
pub mod tensor;

pub use error::{Error, Result};
