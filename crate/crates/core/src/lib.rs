//! Numerical construction of closed surfaces of constant expansion and
//! constant mean curvature in asymptotically flat initial data sets.
//!
//! The crate provides
//!
//! - [`sphere`]: a pseudospectral discretization of the unit sphere
//!   (Gauss-Legendre x uniform-longitude collocation, real spherical
//!   harmonic transforms);
//! - [`initialdata`]: evaluators for the ambient Riemannian data
//!   `(M, g, K)` with exact first and second derivative jets, both for
//!   closed-form families and for sampled grid files;
//! - [`surface`]: geometry of closed 2-surfaces described as radial
//!   graphs over a center, with curvature, expansion and quasi-local mass
//!   diagnostics;
//! - [`stability`]: the linearized expansion operators, their spectra and
//!   the quantitative invertibility checks used by the solver;
//! - [`solver`]: damped Newton solution of the prescribed-expansion
//!   equation, homotopy in the expansion weight, foliation sweeps and
//!   lapse diagnostics;
//! - [`adm`]: asymptotic mass and momentum functionals evaluated on
//!   families of large coordinate spheres with Richardson extrapolation.

pub mod adm;
pub mod error;
pub mod initialdata;
pub mod solver;
pub mod sphere;
pub mod stability;
pub mod surface;

pub use error::{CoreError, Result};
