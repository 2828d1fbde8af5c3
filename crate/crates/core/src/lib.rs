//! Numerical exterior calculus, diffeomorphisms and displacement norms on
//! discretized flat tori.

pub mod error;
pub mod exterior_calculus;
pub mod mesh;
pub mod quad;
pub mod spectral;

pub use error::{FluxError, Result};
pub use mesh::{GridMesh, Point};
pub mod torus_maps;
pub mod isotopy_engine;
pub mod displacement_geometry;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/forms.md")]
    pub mod forms {}
    #[doc = include_str!("../../../book/src/maps.md")]
    pub mod maps {}
    #[doc = include_str!("../../../book/src/isotopies.md")]
    pub mod isotopies {}
    #[doc = include_str!("../../../book/src/displacement.md")]
    pub mod displacement {}
}
