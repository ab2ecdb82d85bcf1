//! Std companion of `fracvar-core`: CLI schema, config-string parsers,
//! CSV rendering, and the acceptance suite.

pub mod acceptance;
pub mod error;
pub mod parse;
pub mod run;

pub use error::AppError;
pub use run::{execute, Cli, Command};
