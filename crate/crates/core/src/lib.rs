pub mod circuit;
pub mod error;
pub mod harness;
pub mod info_geometry;
pub mod landscape;
pub mod optimize;
pub mod pauli;

pub use error::{Error, Result};
