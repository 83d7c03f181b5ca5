//! Confluent Natanzon potentials endowed with a position-dependent mass.
//!
//! The crate builds the potential family from a quadratic `R(ξ)` and three
//! numerator coefficients, solves the coordinate mapping `ξ(u)`, evaluates
//! closed-form energies and wavefunctions, and checks all of it against an
//! independent finite-difference eigensolver for the
//! `-d/du (1/2m) d/du + V` operator.
//!
//! Module map:
//!
//! * [`specfun`]: truncated Kummer series, Schwarzian derivative, stencils.
//! * [`mapping`]: potential parameters, mass profiles, the mapping ODE.
//! * [`potential`]: the potential, mass corrections and the Schwarzian split.
//! * [`spectrum`]: energy condition, level parameters, quartic cross-check.
//! * [`wavefunc`]: bound-state wavefunctions and the mass-weighted product.
//! * [`liealg`]: numeric checks of the so(2,1) realization.
//! * [`oracle`]: tridiagonal eigensolver and the validation pipeline.

pub mod error;
pub mod liealg;
pub mod mapping;
pub mod oracle;
pub mod potential;
pub mod quadrature;
pub mod specfun;
pub mod spectrum;
pub mod wavefunc;

pub use error::{Error, Result, Stage};
pub use mapping::{Branch, ConfluentSpec, MappingRequest, MappingSolution, MassProfile};
pub use oracle::{SpectralReport, ValidationSetup};
pub use potential::{OrderingParams, PotentialMode, PotentialTable};
pub use spectrum::{BoundState, Level};
pub use wavefunc::{Variant, WavefunctionSamples};
