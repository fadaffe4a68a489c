//! Numerical tubular Milnor fibrations of mixed polynomials.
//!
//! - [`mixedpoly`]: representation, parsing, evaluation and Wirtinger calculus.
//! - [`newton`]: Newton-support data, face functions and randomized
//!   non-degeneracy / tameness searches.
//! - [`fiber`]: fiber points, the horizontal vector field, the monodromy flow,
//!   rotation numbers and deformation of paths into a single fiber.
//! - [`connectivity`]: sampled component estimates and the combinatorial
//!   cyclic-cover model behind the gcd criterion.
//! - [`lens`]: the lens-equation family and its root count.

pub mod connectivity;
pub mod fiber;
pub mod lens;
pub mod mixedpoly;
pub mod newton;
pub mod rng;

pub use mixedpoly::{parse_mixed_expression, MixedPolynomial, MixedTerm, RealJacobian};
