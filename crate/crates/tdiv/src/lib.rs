//! File formats, reports and the `tdiv` command-line tool built on
//! [`tdiv_core`].

pub mod cli;
pub mod error;
pub mod io;
pub mod model_file;
pub mod report;

pub use error::{Error, Result};
pub use tdiv_core as core;
