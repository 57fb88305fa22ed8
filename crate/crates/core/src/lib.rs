//! Valuations on convex bodies and on convex functions, computed exactly on
//! polytopes and piecewise-linear functions in dimensions `n ∈ {1, 2}`.
//!
//! The library is layered bottom-up:
//!
//! * [`polytope`] exact polytopes with vertex and halfspace descriptions,
//! * [`measures`] surface area, support and Hessian measures plus Monte-Carlo oracles,
//! * [`epi`] piecewise-linear convex functions and the body/function dictionary,
//! * [`valuation`] gradient- and sphere-form valuations and their decomposition,
//! * [`goodey_weil`] mollified dual densities and the Minkowski decomposition,
//! * [`suite`] the identity suites driven by the `epival` binary.

pub mod error;
pub mod num;
pub mod linalg;
pub mod hull;
pub mod polytope;
pub mod quadrature;
pub mod measures;
pub mod epi;
pub mod valuation;
pub mod goodey_weil;
pub mod generate;
pub mod suite;

pub use error::{Error, Result};
pub use num::{Q, QVec};
pub use polytope::{Polytope, RigidMotion};
