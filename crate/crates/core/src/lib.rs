//! Allocation-only core of the agrisynth toolkit.
//!
//! Everything in this crate is a pure function of its inputs and an explicit
//! [`Rng`] stream: tabular data model, distribution sampling, weather and field
//! trial generators, SMOTE-style augmentation, similarity metrics, surrogate
//! regressors, NPK optimizers and the bucket crop-season simulator.
//!
//! File formats, network access and the command line live in the `agrisynth`
//! companion crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod augment;
pub mod date;
pub mod generate;
pub mod linalg;
pub mod model;
pub mod npk;
pub mod optimize;
pub mod rng;
pub mod simulate;
pub mod special;
pub mod stats;
pub mod table;
pub mod validate;
pub mod weather;

pub use date::Date;
pub use npk::NpkRates;
pub use rng::Rng;
pub use table::{Column, DType, Operand, Predicate, Table, TableError, Value};
pub use weather::{WeatherDay, WeatherSeries};
