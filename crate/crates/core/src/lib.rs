//! Algebraically solvable planar polynomial flows.
//!
//! The crate builds two-variable polynomial systems `ẋₙ = P⁽ⁿ⁾(x₁, x₂)`
//! whose solutions are the zeros of a monic polynomial with explicitly
//! solvable coefficient dynamics, solves them in closed form, and checks
//! every closed form against an independent adaptive integrator.
//!
//! Modules, bottom-up:
//!
//! - [`complexpoly`]: exact-cancellation polynomial arithmetic and an expression parser.
//! - [`correspondence`]: zero/coefficient maps and their velocity identities.
//! - [`generator`]: divisibility conditions and synthesis of x-systems.
//! - [`elliptic`]: Jacobi `sn` for complex argument and modulus.
//! - [`ysolve`]: closed-form coefficient flows (anharmonic and logistic).
//! - [`pipeline`]: end-to-end algebraic solves with root tracking.
//! - [`variants`]: affine, isochronous and real-vector reformulations.
//! - [`oracle`]: Dormand–Prince integration and finite-difference checks.
//!
//! The guide in `book/` walks through the construction; its code listings are
//! compiled as doc-tests through the [`guide`] module.

pub mod complexpoly;
pub mod correspondence;
pub mod elliptic;
pub mod generator;
pub mod oracle;
pub mod pipeline;
pub mod variants;
pub mod ysolve;

pub mod guide;

pub use num_complex::Complex64;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
