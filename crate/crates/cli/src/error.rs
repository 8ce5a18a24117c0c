//! Error type for the command-line layer.
//!
//! Core errors pass through unchanged; this adds the failure modes that
//! only exist once files are involved. As in the core crate, every display
//! form starts with the error name.

/// Everything the CLI can report on exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Any error from the core library, displayed verbatim.
    #[error(transparent)]
    Core(#[from] somkm_core::Error),

    /// A file could not be read or written.
    #[error("IoFailure: {path}: {detail}")]
    IoFailure { path: String, detail: String },

    /// A result file was produced by an incompatible format version.
    #[error("VersionMismatch: file has format_version `{found}`, expected `{expected}`")]
    VersionMismatch { found: String, expected: String },

    /// A result file did not match the expected schema.
    #[error("CorruptFile: {detail}")]
    CorruptFile { detail: String },

    /// A CSV input did not start with the expected header line.
    #[error("BadHeader: expected `series_id,timestamp,kwh`, found `{found}`")]
    BadHeader { found: String },
}

impl CliError {
    /// Wraps a `std::io::Error` with the path it concerned.
    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::IoFailure { path: path.display().to_string(), detail: err.to_string() }
    }
}

/// Result alias for the CLI layer.
pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_leads_with_the_error_name() {
        let core: CliError = somkm_core::Error::EmptyData.into();
        assert!(core.to_string().starts_with("EmptyData"));
        let version = CliError::VersionMismatch { found: "0.0".into(), expected: "1.0".into() };
        assert!(version.to_string().starts_with("VersionMismatch"));
        let corrupt = CliError::CorruptFile { detail: "truncated".into() };
        assert!(corrupt.to_string().starts_with("CorruptFile"));
    }
}
