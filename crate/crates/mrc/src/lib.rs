//! CSV ingestion, model files and the `mrc` command line on top of
//! `mrc-core`.

pub mod cli;
pub mod csv_io;
pub mod hexfloat;
pub mod persistence;
