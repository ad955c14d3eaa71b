//! Fused Gromov-Wasserstein distances between structured measures:
//! exact transport, the conditional-gradient solver, barycenters, graph
//! constructions and distance-based learning.

#![no_std]

extern crate alloc;

pub mod barycenter;
pub mod error;
pub mod exec;
pub mod fgw;
pub mod graphs;
pub mod learn;
pub mod lp;
pub mod matrix;
pub mod measure;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use fgw::{solve_fgw, FgwParams, FgwResult, Start};
pub use matrix::Matrix;
pub use measure::{build_measure, Coupling, Features, Histogram, StructuredMeasure};
