pub mod advice;
pub mod bits;
pub mod codec;
pub mod error;
pub mod extractors;
pub mod fields;
pub mod harness;
pub mod nmext;
pub mod stats;

pub use bits::BitString;
pub use error::{Error, Result};
