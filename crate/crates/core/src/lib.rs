//! Zeros of monic polynomials whose coefficients are the zeros of Hermite
//! polynomials, the two matrices built from those zeros whose spectra are
//! `1..=N` and `1, 4, ..., N^2`, and the isochronous flows used to check
//! them independently.
//!
//! Module map:
//!
//! * [`poly`]: complex monic polynomials, Vieta maps, elementary symmetric
//!   functions and the Aberth root finder.
//! * [`hermite`]: Hermite zeros, their equilibrium identities and the `N!`
//!   coefficient orderings.
//! * [`matrices`]: the closed-form matrices and spectrum certification.
//! * [`eigen`]: dense complex nonsymmetric eigensolver.
//! * [`dynamics`]: the four vector fields, an adaptive Dormand–Prince
//!   integrator, finite-difference Jacobians and linearized evolution.
//! * [`report`]: run configuration, verification pipeline and serialized
//!   reports.

pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod hermite;
pub mod matrices;
pub mod poly;
pub mod report;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
