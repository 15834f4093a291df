//! Multi-modes Monte Carlo interior-penalty discontinuous Galerkin solver for
//! the Helmholtz equation in weakly random media on the unit square.

pub mod analysis;
pub mod assembly;
pub mod classical;
pub mod dg_space;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod multimodes;
pub mod quadrature;
pub mod randomness;
pub mod sources;

pub use error::{Error, Result};
