//! File formats, JSON reports and the command-line harness around
//! `ftspan-core`.

pub mod cli;
pub mod io;
pub mod report;

pub use ftspan_core as core;
