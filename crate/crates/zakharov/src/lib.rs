//! Command-line workbench for the periodic Zakharov system.
//!
//! Numerics live in `zakharov-core`; this crate adds the `rustfft` backend,
//! TOML configuration, CSV/JSON artifacts, timestamped run directories and
//! the `zakharov` binary. The experiment runners in [`experiments`] are
//! shared by the subcommands and the acceptance suite.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod formats;
pub mod rundir;

pub use error::{Error, Result};
pub use fft::RUSTFFT;
