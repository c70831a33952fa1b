//! Frequency-domain models for three-core armored (TCAC) power cables.
//!
//! The crate is organised along the two-step workflow used for harmonic
//! studies of long cable links:
//!
//! 1. [`pul`] produces per-unit-length sequence parameters `z(f)` and `y(f)`,
//!    either from a filament model of the cable cross-section or from an
//!    ingested table computed elsewhere.
//! 2. [`tline`] turns those parameters into terminal impedances of a link of
//!    given length and extracts its resonances; [`timedomain`] synthesizes
//!    energization waveforms from the same transfer function.
//!
//! [`geometry`] holds the cable description and the closed-form length scales,
//! [`mfield`] evaluates the magnetic flux density around a solved
//! cross-section.

pub mod bessel;
pub mod geometry;
pub mod mfield;
pub mod pul;
pub mod timedomain;
pub mod tline;

pub use geometry::{CableSpec, Environment};
pub use pul::{ConductorSolution, PulParams, PulProvider, PulTable, Sequence};

/// Vacuum permeability (H/m).
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.854_187_812_8e-12;

pub type Complex = num_complex::Complex64;
