//! Command-line driver and HTTP session service for `verse-core`.

pub mod cli;
pub mod schema;
pub mod service;
