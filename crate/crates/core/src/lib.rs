pub mod bounds;
pub mod cli;
pub mod error;
pub mod haar;
pub mod matrix;
pub mod pairs;
pub mod rng;
pub mod stats;
pub mod stein;
pub mod transport;

pub use error::{Error, Result};
