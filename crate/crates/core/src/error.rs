//! Error type shared by every module in the crate.
//!
//! Each variant's display form starts with the variant name so callers that
//! surface errors as text (the CLI, logs) stay grep-able.

use alloc::string::String;

/// Everything that can go wrong inside the core pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A CSV data row did not have exactly three comma-separated fields.
    #[error("MalformedRow: line {line}: expected 3 comma-separated fields, found {found}")]
    MalformedRow { line: usize, found: usize },

    /// A timestamp field did not match `YYYY-MM-DD HH:MM` or named an
    /// impossible calendar instant.
    #[error("BadTimestamp: line {line}: `{value}` is not a valid `YYYY-MM-DD HH:MM` timestamp")]
    BadTimestamp { line: usize, value: String },

    /// A kwh field was negative.
    #[error("NegativeConsumption: line {line}: kwh {kwh} is negative")]
    NegativeConsumption { line: usize, kwh: f64 },

    /// A kwh field was NaN, infinite, or not a number at all.
    #[error("NonFiniteValue: line {line}: kwh `{value}` is not a finite number")]
    NonFiniteValue { line: usize, value: String },

    /// The requested month list was empty.
    #[error("NoRequestedMonths: the requested month list is empty")]
    NoRequestedMonths,

    /// The synthetic generator was asked for an impossible archetype count.
    #[error("InvalidArchetypeCount: {n_archetypes} archetypes for {n_series} series")]
    InvalidArchetypeCount { n_series: usize, n_archetypes: usize },

    /// A scaler was fitted on a matrix with no rows.
    #[error("EmptyMatrix: matrix has no rows")]
    EmptyMatrix,

    /// A model was fitted on an empty data set.
    #[error("EmptyData: no data rows provided")]
    EmptyData,

    /// A row or vector had the wrong width for the model it was given to.
    #[error("DimensionMismatch: expected width {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A configuration value violated its documented range.
    #[error("InvalidConfig: {detail}")]
    InvalidConfig { detail: String },

    /// No SOM node won a single sample (defensive; unreachable after
    /// training on at least one row).
    #[error("AllNodesEmpty: no node won any sample")]
    AllNodesEmpty,

    /// PCA needs at least two rows to form a covariance estimate.
    #[error("TooFewRows: need at least 2 rows, found {rows}")]
    TooFewRows { rows: usize },

    /// The requested number of principal components is outside `1..=max`.
    #[error("BadComponentCount: q={q} outside 1..={max}")]
    BadComponentCount { q: usize, max: usize },

    /// k-means was asked for more clusters than there are points.
    #[error("TooFewPoints: {n} points cannot form {k} clusters")]
    TooFewPoints { n: usize, k: usize },

    /// A label referenced a center that does not exist.
    #[error("LabelOutOfRange: label {label} with only {k} centers")]
    LabelOutOfRange { label: usize, k: usize },

    /// Silhouette needs at least two distinct clusters.
    #[error("InsufficientClusters: need at least 2 distinct labels, found {found}")]
    InsufficientClusters { found: usize },

    /// Silhouette is undefined when every point is a singleton cluster.
    #[error("DegenerateClustering: {clusters} distinct labels over {points} points (all singletons)")]
    DegenerateClustering { clusters: usize, points: usize },

    /// A sweep range was empty or started below 2.
    #[error("BadRange: invalid sweep range {k_min}..={k_max}")]
    BadRange { k_min: usize, k_max: usize },

    /// Two label vectors that must be parallel had different lengths.
    #[error("LengthMismatch: label vectors have lengths {left} and {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Every series was dropped in every requested month.
    #[error("NoUsableSeries: every series was dropped in every requested month")]
    NoUsableSeries,

    /// Fewer pooled SOM centers than the smallest k the sweep must try.
    #[error("TooFewCenters: {pooled} pooled centers cannot support k_min={k_min}")]
    TooFewCenters { pooled: usize, k_min: usize },

    /// Every k in the sweep range was skipped, so no model could be chosen.
    #[error("NoFeasibleK: no k in {k_min}..={k_max} is feasible for {n} points")]
    NoFeasibleK { k_min: usize, k_max: usize, n: usize },
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
