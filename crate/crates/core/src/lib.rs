//! Numerical laboratory for spectral asymptotics of sub-Laplacians on
//! stratified Lie groups.

pub mod algebra;
pub mod counting;
pub mod covering;
pub mod error;
pub mod experiment;
pub mod functions;
pub mod grid;
pub mod linalg;
pub mod numerics;
pub mod operator;
pub mod spectral;

pub use error::{Error, Result};
