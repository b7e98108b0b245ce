//! Detection of ColorChecker Classic charts in photographs, a synthetic
//! scene renderer and the evaluation metrics used to compare the two.

pub mod config;
pub mod draw;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod imgproc;
pub mod io;
pub mod model;
pub mod recognition;
pub mod render;

pub use error::{Error, Result};
