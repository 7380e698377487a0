//! Pointwise numerical calculus for sprays and Finsler functions.
//!
//! The crate evaluates the geometric objects attached to a spray
//! `S = yⁱ ∂/∂xⁱ − 2Gⁱ(x, y) ∂/∂yⁱ` at sample points of the slit tangent
//! bundle: the nonlinear connection and horizontal projector, the Jacobi
//! endomorphism and its isotropic / scalar-flag-curvature decompositions,
//! geodesic sprays of Finsler functions, metrizability residuals, projective
//! deformations `S − 2P𝒞` and the Funk-function equation. The [`scenarios`]
//! module chains these into end-to-end numeric experiments with verdicts.
//!
//! All derivatives come from forward-mode Taylor jets ([`coords::Jet`]).

pub mod coords;
pub mod error;
pub mod expr;
pub mod finsler;
pub mod par;
pub mod projective;
pub mod scenarios;
pub mod spraycalc;

pub use error::{Error, Result};
