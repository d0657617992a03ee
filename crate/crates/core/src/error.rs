use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("x = {x} lies outside the collar [0, {collar})")]
    Domain { x: f64, collar: f64 },

    #[error("metric degenerates at x = {x}: rho = {rho}")]
    DegenerateMetric { x: f64, rho: f64 },

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("cross-section dimension n = {0} needs a supplied spectrum table")]
    UnsupportedDimension(usize),

    #[error("invalid spectrum: {0}")]
    Spectrum(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("singular linear system at row {0}")]
    Singular(usize),

    #[error("eigenvalue solver failed: {0}")]
    Eigen(String),

    #[error("unsupported norm order s = {0} (only 0, 1, 2)")]
    NormOrder(usize),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("suite entry `{entry}`: {message}")]
    Suite { entry: String, message: String },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
