//! I/O, parallel drivers, timing and the command line for `gmrf-core`.

pub mod bench;
pub mod cli;
pub mod io;
pub mod parallel;
pub mod svg;

pub use gmrf_core as core;
