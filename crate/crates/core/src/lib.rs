//! Quasi-Hermitian XX chain with complex boundary fields.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command line
//! live in the `xxchain` crate.
#![no_std]

extern crate alloc;

pub mod algebra;
pub mod bch;
pub mod bethe;
pub mod chain;
pub mod diagrams;
pub mod error;
pub mod linalg;
pub mod metric;

pub use error::{Error, Result};
