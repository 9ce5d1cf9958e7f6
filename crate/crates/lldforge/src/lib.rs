//! Exact computations with bounded-rank matrix spaces, locally linearly
//! dependent operator spaces, LDB division algebras and their twisted spaces.

pub mod error;
pub mod extract;
pub mod format;
pub mod exactalg;

pub use error::{Error, Result};
pub mod fpfast;
pub mod lld;
pub mod matspace;
pub mod ldb;
pub mod quadform;
pub mod suite;
pub mod twisted;
