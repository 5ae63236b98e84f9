//! File formats, commands and the stream server around `fibercal-core`.

pub mod commands;
pub mod dataio;
pub mod error;
pub mod stream;

pub use error::{Error, Result};
