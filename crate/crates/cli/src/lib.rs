//! Config-driven runner for the nhsense pipelines: parsing, recipes and table export.

pub mod config;
pub mod export;
pub mod recipes;
pub mod runner;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("unknown recipe {0:?}")]
    UnknownRecipe(String),
    #[error(transparent)]
    Model(#[from] nhsense::Error),
}
