//! File formats, reports and the command-line driver around
//! `cryptofactor-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod history;
pub mod legacy;
pub mod report;

pub use error::{Error, Result};
