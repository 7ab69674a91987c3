pub mod checks;
pub mod cli;
pub mod commands;
pub mod config;
