//! Command-line front end for the quantum Langevin oscillator library.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
