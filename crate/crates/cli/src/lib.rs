//! Companion crate to `somkm-core`: everything that touches files or
//! streams lives here. CSV ingestion, JSON config files, result-file
//! persistence, and the `somkm` binary built on top of them.

pub mod config;
pub mod csvio;
pub mod error;
pub mod resultfile;
