pub mod algebra;
pub mod commutant;
pub mod cpmap;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod cli;
pub mod ergodic;
pub mod lift;
pub mod linalg;
pub mod measures;
pub mod paschke;
pub mod radon;
pub mod random;
pub mod symmetry;

pub use error::{Error, Result};
