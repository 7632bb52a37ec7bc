//! Numerical verification of the two-dimensional Alexandroff–Bakelman–Pucci
//! inequality and of every constructive step of its level-set proof.
//!
//! The crate is organised bottom-up:
//!
//! * [`field`] – analytic C² test fields with exact derivatives, compact domains and grids.
//! * [`quadrature`] – `∫_K |det D²f|`, oscillations, vertical oscillation, the Schur identity.
//! * [`levelset`] – marching-squares extraction of `Σ_z = f_{x₂}⁻¹(z) ∩ K`, total variation
//!   of `f_{x₁}` along it, and the per-slice budget `φ(z)`.
//! * [`topology`] – crossing parity, binary colorings, loop signs and admissible paths.
//! * [`verify`] – the inequality checks and the aggregated [`verify::VerificationReport`].

pub mod error;
pub mod field;
pub mod geom;
pub mod levelset;
pub mod quadrature;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
pub use field::{builtin, catalog, CatalogEntry, Domain, FieldSpec, Grid, ScalarField};
pub use geom::Point;
