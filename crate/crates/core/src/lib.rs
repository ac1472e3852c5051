//! Core machinery for pseudo-asymptotic Tolman–Oppenheimer–Volkoff analysis.
//!
//! The crate is organized around the pipeline the library supports:
//!
//! - [`numerics`]: domain-aware scalar fields plus the quadrature, root finding,
//!   finite differences, and grid sampling everything else is built on.
//! - [`tov`]: Riccati-form TOV coefficients and the residuals of the TOV,
//!   continuity, Riccati, and coefficient-relation identities.
//! - [`coupling`]: the integrability machinery — the coupling-function split
//!   Λ = Λ₀ + Λ₁, mass reconstruction from h, and the explicit pressure solver.
//! - [`catalog`]: the ten closed-form (F, h, ρ) families plus the constant-density
//!   solution, with residual-based verification and a linear-independence check.
//! - [`extended`]: two-point compactification of the line and tail certificates
//!   for the Λ₁ boundary condition.
//! - [`classify`]: cavity/singularity/matter classification of the catalog
//!   densities and critical-configuration scans over (c₁, c₂).
//!
//! `no_std` builds (with `alloc`) are supported by disabling the default `std`
//! feature and enabling `libm`.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod catalog;
pub mod classify;
pub mod coupling;
pub mod extended;
pub mod numerics;
pub mod tov;

pub use catalog::{CatalogEntry, Params, RowId, VerificationReport};
pub use classify::{ClassificationReport, CriticalScanResult, Matter, SweepParameter};
pub use coupling::{CouplingSplit, IntegrabilityParams, PressureSolver, TailReport};
pub use extended::{Certificate, CompactCoordinate, ExtendedField, Side};
pub use numerics::{Domain, Interval, ScalarField, Tolerances};
pub use tov::{MassModel, RiccatiCoefficients, StellarSystem};
