//! Jump-channel statistics of continuously monitored open quantum systems.

pub mod algebra;
pub mod channel;
pub mod clustering;
pub mod error;
pub mod io;
pub mod model;
pub mod patterns;
pub mod random;
pub mod stats;
pub mod trajectory;

pub use error::{Error, Result};
