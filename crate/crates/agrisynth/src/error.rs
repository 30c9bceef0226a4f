use std::path::PathBuf;

use agrisynth_core::augment::AugmentError;
use agrisynth_core::generate::GenerateError;
use agrisynth_core::model::ModelError;
use agrisynth_core::optimize::OptimizeError;
use agrisynth_core::simulate::SimulateError;
use agrisynth_core::validate::ValidateError;
use agrisynth_core::TableError;

use crate::catalog::CatalogError;
use crate::csv_io::CsvError;
use crate::power::PowerError;
use crate::visualize::VizError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error(transparent)]
    Viz(#[from] VizError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Validate(#[from] ValidateError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Simulate(#[from] SimulateError),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// 1 usage, 2 data or validation, 3 external service.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Power(PowerError::InvalidCoords { .. } | PowerError::InvalidRange { .. }) => 2,
            Error::Power(_) => 3,
            _ => 2,
        }
    }
}
