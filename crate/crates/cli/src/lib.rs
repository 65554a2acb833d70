//! Pipelines behind the `zvonkin-lab` command line: configuration, run
//! directories and the verification routines.

pub mod checks;
pub mod commands;
pub mod config;
pub mod lab;
pub mod run;

pub use commands::{execute, Command, Outcome, Which};
pub use config::RunConfig;
pub use lab::{Lab, Member};
