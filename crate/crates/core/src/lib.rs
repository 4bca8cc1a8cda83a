//! Two-base binary expansions.
//!
//! Words over {0,1} are valued by `π_{q0,q1}`, where reading a 0 divides by
//! `q0` and reading a 1 divides by `q1`. This crate classifies the sets of
//! unique expansions `U_{q0,q1}` and the lexicographic subshifts `Ω_{a,b}`,
//! computes the generalized golden ratio `𝒢(q0)` and the generalized
//! Komornik–Loreti constant `𝒦(q0)`, and estimates entropy and dimension of
//! the survivor sets.

pub mod classify;
pub mod cli;
pub mod critical;
pub mod error;
pub mod eval;
pub mod oracle;
pub mod par;
pub mod spectral;
pub mod substitution;
pub mod word;

pub use error::{Error, Result};
pub use word::{EpWord, EventuallyPeriodicWord, StreamOrdering, WordStream};
