//! Numerical construction and certification of Lagrangian submanifolds of
//! the complex projective space CP³(4) that attain equality in the improved
//! Chen inequality
//!
//! ```text
//! δ_M ≤ 2 + (3/2)·‖H‖²,        δ_M = τ − inf K,
//! ```
//!
//! where τ is the scalar curvature (sum of the three sectional curvatures of
//! an orthonormal frame), inf K the infimum of sectional curvature over all
//! tangent 2-planes and H the mean curvature vector. The classical bound has
//! coefficient 9/4 instead of 3/2, so the non-minimal equality submanifolds
//! of the improved bound sit strictly inside the classical one with slack
//! 3λ₂².
//!
//! The crate builds those equality submanifolds from first principles and
//! then measures, rather than assumes, every claimed property:
//!
//! * [`ambient`] - complex 4-space with its Hermitian form, the real metric
//!   and the complex structure J, plus Gram-Schmidt utilities,
//! * [`jets`] - finite-difference first and second derivatives of maps from
//!   parameter boxes into C⁴,
//! * [`surfaces`] - the catalog of horizontal minimal surfaces in S⁵ that
//!   seed the construction (Clifford torus, totally geodesic 2-sphere) and
//!   negative controls,
//! * [`profile`] - the planar ODE for the profile functions (b₁, λ₂), its
//!   first integral λ₂(1+λ₂²+b₁²), a fixed-step integrator with defensive
//!   halving and dense output,
//! * [`assembly`] - the horizontal lift E₀: M³ → S⁷ assembled from a
//!   surface and a profile trajectory, together with the circle factor V
//!   and the recovered surface W,
//! * [`invariants`] - the cubic form C(X,Y,Z) = ⟨h(X,Y), JZ⟩, the Gauss
//!   curvature tensor, τ, inf K, the two Chen bounds and the pointwise
//!   equality conditions,
//! * [`verify`] - grid sweeps bundling all checks into machine-readable
//!   reports; this is what the `chen-verify` binary wraps.
//!
//! Everything is deterministic: no randomness, no time-dependent numerics,
//! and reruns of a fixed configuration produce byte-identical reports
//! (timestamp aside).

#![forbid(unsafe_code)]
// Tensor components are read and written by explicit index throughout, so
// the loops mirror the Σ over indices in the formulas they implement.
#![allow(clippy::needless_range_loop)]

pub mod ambient;
pub mod assembly;
pub mod error;
pub mod invariants;
pub mod jets;
pub mod profile;
pub mod surfaces;
pub mod verify;

mod linalg;

#[cfg(doctest)]
mod book;

pub use error::{Error, Result};
