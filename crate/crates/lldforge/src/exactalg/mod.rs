//! Exact scalars and dense linear algebra over ℚ, prime fields and rational
//! function fields over either.

mod extension;
mod field;
mod mat;
pub mod modular;
mod mono;
pub mod parse;
mod poly;
mod ratfn;
mod scalar;

pub use extension::SimpleExtension;
pub use field::{BaseField, Field, FunctionField};
pub use mat::{vecops, Mat, Vector};
pub use mono::{Mono, MAX_VARS};
pub use poly::Poly;
pub use ratfn::{poly_to_string, RatFn};
pub use scalar::Scalar;

/// Largest numerator total degree tolerated inside eliminations.
pub const DEGREE_CAP: usize = 64;

/// Deterministic Miller-Rabin for word-sized `p`.
pub fn is_prime(p: u64) -> bool {
    primal_check::miller_rabin(p)
}
