//! Core clustering toolkit for monthly consumption profiles.
//!
//! The crate implements a deterministic hybrid pipeline over half-hourly
//! meter readings:
//!
//! 1. aggregate readings into per-month series×day matrices ([`ingest`]),
//! 2. scale each month to the unit interval ([`preprocess`]),
//! 3. train one self-organizing map per month and keep the activated
//!    codebook vectors ([`som`]),
//! 4. pool those centers across months and reduce them with PCA ([`pca`]),
//! 5. cluster the reduced centers with k-means, picking k by mean
//!    silhouette ([`kmeans`], [`evaluate`]),
//! 6. label every series-month vector against the final centers
//!    ([`pipeline`]).
//!
//! Everything is `no_std` + `alloc`. All transcendental math goes through
//! `libm`, and all randomness through the seeded generator in [`rng`], so a
//! given input and seed produce bit-identical results on any platform.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod calendar;
pub mod error;
pub mod evaluate;
pub mod ingest;
pub mod kmeans;
pub mod matrix;
pub mod pca;
pub mod pipeline;
pub mod preprocess;
pub mod rng;
pub mod som;

pub use calendar::{MonthKey, Timestamp};
pub use error::Error;
pub use matrix::Matrix;
