//! Numerical laboratory for abelian Higgs vortices and their Moyal deformations.
//!
//! The crate builds commutative vortex solutions on a uniform grid, deforms
//! them order by order in the noncommutativity parameter, and checks that
//! the vortex number survives. A truncated Fock-space algebra provides the
//! operator-side counterpart.

pub mod field;
pub mod fock;
pub mod grid;
pub mod linsolve;
pub mod moyal;
pub mod perturbation;
pub mod quadrature;
pub mod reduce;
pub mod snapshot;
pub mod special;
pub mod spectral;
pub mod stencil;
pub mod taubes;

pub use field::{GaugeField, ScalarField, C64};
pub use grid::{make_grid, Grid2D, GridError};
