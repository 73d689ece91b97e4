//! Numerical nonlinear potential theory: Wolff and Riesz potentials of
//! measures, shifted dyadic lattices and discrete Carleson audits, the
//! operator N(f) = W_{α,s}(f^{s−1}dσ) with its iterates and lower bounds,
//! and an explicit supersolution / Picard sandwich for fundamental solutions
//! of the perturbed p-Laplace and k-Hessian problems.

pub mod error;
pub mod dyadic;
pub mod exponents;
pub mod geometry;
pub mod measure;
pub mod operator;
pub mod potential;
pub mod quadrature;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
pub use exponents::{hessian_params, plaplace_gamma, plaplace_params, Exponents};
pub use geometry::Point;
