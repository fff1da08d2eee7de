//! Command-line interface and HTTP query service for `defembed`.

pub mod commands;
pub mod config;
pub mod service;
