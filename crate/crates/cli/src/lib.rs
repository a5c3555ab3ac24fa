//! Command-line front end: option handling, subcommands and SVG rendering.

pub mod commands;
pub mod config;
pub mod output;
pub mod render;
