//! Command implementations behind the `rcfp` binary.

pub mod commands;
pub mod manifest;
pub mod model;

pub use model::{ModelFile, MODEL_VERSION};
