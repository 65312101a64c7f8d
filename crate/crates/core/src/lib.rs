//! Numerical laboratory for bilinear spherical maximal functions.

pub mod bilop;
pub mod cex;
pub mod error;
pub mod grid;
pub mod harness;
pub mod jet;
pub mod quad;
pub mod region;
pub mod specfn;
pub mod squad;
pub mod symbols;
pub mod testfn;

pub use error::{Error, Result};
