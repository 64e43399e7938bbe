//! Text formats, CSV output and the command line for `factrel-core`.

pub mod cli;
pub mod formats;
pub mod output;
pub mod syntax;

pub use cli::run;
