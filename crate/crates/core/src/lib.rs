//! Exact lattice-set geometry for quantitative Brunn-Minkowski experiments.

pub mod convexity;
pub mod error;
pub mod num;
pub mod minkowski;
pub mod stability;
pub mod symmetry;
pub mod transport;
pub mod vset;

pub use error::{Error, Result};
pub use num::Q;
pub use vset::LatticeSet;
