pub mod cli;
pub mod error;
pub mod integrate;
pub mod matrix;
pub mod order;
pub mod scalar;
pub mod stability;
pub mod tableau;
pub mod trees;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::{Precision, Real, Scalar};
