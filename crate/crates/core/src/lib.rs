pub mod cli;
pub mod connections;
pub mod diffeo;
pub mod error;
pub mod fields;
pub mod finsler;
pub mod jets;
pub mod quantization;
pub mod schwarzian;
pub mod tensor;

pub use error::{FinjetError, Result};
