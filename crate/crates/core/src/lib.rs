//! Numerical workbench for ratios of quadratic twists of a holomorphic Hecke eigenform.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: exact integer arithmetic (factorization, Kronecker symbols, discriminants).
//! * [`modform`]: Hecke eigenform coefficient tables, with Ramanujan's Delta as the
//!   built-in form.
//! * [`gauss`]: quadratic Gauss sums and the associated `K(s, chi)` series.
//! * [`lfun`]: gamma, zeta and completed L-functions evaluated through a smoothed
//!   approximate functional equation.
//! * [`mds`]: the multiple Dirichlet series `A(s, w, z)` and its local factors.
//! * [`ratios`]: the smoothed ratio sum over twists and the comparison with its main term.

pub mod arith;
pub mod error;
pub mod gauss;
pub mod lfun;
pub mod mds;
pub mod modform;
pub mod numeric;
pub mod ratios;
pub mod selftest;

#[cfg(feature = "remote-check")]
pub mod remote;

pub use error::{Error, Result};
pub use num_complex::Complex64;
