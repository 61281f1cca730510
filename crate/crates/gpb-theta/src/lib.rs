//! Exact-arithmetic engine for generalized parabolic bundles (GPBs) on the
//! projective line and their descent to g-nodal rational curves.
//!
//! The crate computes Hom spaces of GPB morphisms as exact linear systems,
//! decides or searches semistability with independently re-verifiable
//! certificates, constructs theta line bundles by the eigenvalue-avoiding
//! glue choice, and cross-checks the descended torsion-free sheaf's Euler
//! characteristic two ways. Everything runs over arbitrary-precision
//! rationals or a prime field; there are no tolerances anywhere.
//!
//! Entry points:
//! - [`gpb::hom_space`] — the morphism space of two GPBs,
//! - [`stability::is_semistable`] — certificates and exhaustive decisions,
//! - [`theta::choose_theta_glue`] / [`theta::verify_theta`] — theta lines,
//! - [`theta::hom_determinant`] — the Hom-system determinant as a
//!   multivariate polynomial in the glue scalars,
//! - [`descent::descended_invariants`] — invariants on the nodal curve,
//! - [`experiment`] — seeded batch runs with JSON-lines reports.
//!
//! The `examples/` directory has one runnable program per capability; the
//! thin `gpb-theta` binary exposes the same operations as subcommands.

pub mod bundles;
pub mod descent;
pub mod gpb;
pub mod json;
pub mod stability;
pub mod theta;
pub mod field;
pub mod matrix;
pub mod poly;

pub use field::{Field, FieldSpec, PrimeField, Rationals};
