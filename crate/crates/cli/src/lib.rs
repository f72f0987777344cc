//! Library side of the `ordscore` command.

pub mod config;
pub mod data;
pub mod error;
pub mod output;
pub mod run;

pub use config::RunConfig;
pub use error::CliError;
pub use run::{run, Mode};
