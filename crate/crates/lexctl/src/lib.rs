//! File IO, corpus scanning and the `lexctl` command line on top of
//! [`lexctl_core`].

pub mod cli;
pub mod corpus;
pub mod io;
pub mod run_manifest;

pub use lexctl_core as core;
