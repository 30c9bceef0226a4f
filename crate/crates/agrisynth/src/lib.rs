//! IO, catalog, weather API client, charts and CLI around `agrisynth-core`.

pub use agrisynth_core as core;

pub mod csv_io;
pub mod catalog;
pub mod power;
pub mod visualize;
pub mod demo;
pub mod error;

pub use error::Error;
pub mod config;
pub mod model_io;
pub mod cli;
