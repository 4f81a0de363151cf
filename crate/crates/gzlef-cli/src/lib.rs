//! Command implementations and the acceptance suite behind the `gzlef`
//! binary.

pub mod acceptance;
pub mod commands;
pub mod config;
