//! Numerical laboratory for the principal eigenvalue of the p-Laplacian
//! with Robin boundary conditions,
//!
//! ```text
//! Λ(Ω, p, α) = inf  ( ∫_Ω |∇u|^p − α ∫_∂Ω |u|^p ) / ∫_Ω |u|^p ,
//! ```
//!
//! on one-dimensional, radial and boundary-layer model geometries, together
//! with the closed-form reference values, trace constants S(Ω, p, p) and the
//! large-α diagnostics built on top of them.

pub mod closedform;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod quotient;
pub mod report;
pub mod trace;

pub use error::{Error, Result};
pub use geometry::Domain;
pub use quotient::{EigenSolution, FarEnd, SolverConfig};
