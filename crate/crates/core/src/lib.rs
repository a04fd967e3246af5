//! Exact-arithmetic calculus for multivector fields and differential forms
//! with polynomial coefficients, together with checkers and constructors for
//! Nambu-Poisson tensors, Filippov (n-Lie) algebras and Filippov algebroids.
//!
//! Everything is computed over the rationals; every identity a checker
//! reports on is decided exactly, either as a polynomial identity or on an
//! explicitly sampled instance.

pub mod algebroid;
pub mod error;
pub mod exterior;
pub mod filippov;
pub mod nambu;
pub mod ratpoly;
pub mod report;
pub mod sample;

pub use error::Error;
pub use report::{CheckReport, CheckStats, Residual, Verdict, Witness};
