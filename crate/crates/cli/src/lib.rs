//! Command-line front end for the `cgseq` library.

pub mod args;
pub mod commands;
pub mod config;
pub mod io;

pub use config::RunConfig;
pub use io::{fmt_f64, ingest_csv, ingest_str, write_ticks, Ingested, TickSeries};
