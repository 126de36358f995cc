pub mod algorithms;
pub mod bench;
pub mod containers;
pub mod error;
pub mod model;
pub mod runtime;
pub mod views;

pub use error::{Error, Result};
