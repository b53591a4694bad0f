//! Random lifts of regular graphs.

pub mod bounds;
pub mod dyadic;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod matchprob;
pub mod numeric;
pub mod pattern;
pub mod sampler;
pub mod spectrum;
pub mod witness;

pub use error::{Error, Result};
