use std::path::PathBuf;

/// Failures of the experiment driver.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] rstc_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(
        "{scheme} at {snr_db} dB: {failed} of {trials} trials diverged, above the {cap_percent}% cap"
    )]
    DivergenceCap {
        scheme: String,
        snr_db: f64,
        failed: u64,
        trials: u64,
        cap_percent: f64,
    },
    #[error("cannot compare sweeps: {0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, SimError>;
