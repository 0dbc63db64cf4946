//! Surface finite elements for Laplace–Beltrami eigenvalue problems.
//!
//! The crate approximates eigenpairs of the Laplace–Beltrami operator on a
//! smooth closed curve or surface `γ` by
//!
//! 1. building a flat base mesh whose vertices lie on `γ` ([`mesh`]),
//! 2. lifting every base cell to a degree-`k` polynomial patch interpolating
//!    (points near) `γ` at a chosen interpolation-point set ([`lift`]),
//! 3. assembling stiffness and mass matrices for degree-`r` Lagrange elements
//!    on the lifted surface ([`assembly`]),
//! 4. solving the generalized symmetric eigenproblem on the mean-zero
//!    subspace ([`spectral`]),
//! 5. measuring eigenvalue and eigenfunction errors against exact or
//!    extrapolated reference spectra ([`analysis`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel drivers live in the `lb-spectra` companion crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod assembly;
pub mod dense;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod lift;
pub mod math;
pub mod mesh;
pub mod pipeline;
pub mod quadrature;
pub mod reference;
pub mod skyline;
pub mod sparse;
pub mod spectral;

mod implicit;
mod triangle_rules;

pub use error::{Error, Result};
pub use geometry::{CurvatureData, LevelSet, SurfaceDescription, SurfaceKind};
pub use math::Vec3;
pub use mesh::{BaseMesh, CellKind, MeshMetrics};
