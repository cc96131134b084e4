pub mod classify;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod kernels;
pub mod solve;

pub use error::{Error, ErrorCategory, Result};
