use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid spacing {dx} m resolves the {layer} layer with {cells:.2} cells, need at least {required}")]
    Resolution {
        layer: &'static str,
        dx: f64,
        cells: f64,
        required: usize,
    },

    #[error("time step {dt} s violates the CFL bound; maximum admissible dt is {max_dt} s")]
    Stability { dt: f64, max_dt: f64 },

    #[error("impulse response is empty: series carries no energy")]
    EmptyResponse,

    #[error("bit value {0} is not in {{0, 1}}")]
    InvalidBit(u8),

    #[error("hopping plan built for {plan} cannot drive {requested}")]
    SchemeMismatch {
        plan: &'static str,
        requested: &'static str,
    },

    #[error("no frame/code pair satisfies the constraints")]
    Infeasible,

    #[error("malformed interference report for link {link}: {reason}")]
    MalformedReport { link: usize, reason: String },

    #[error("drive voltage {voltage} V exceeds the safety cap of {max} V")]
    SafetyCap { voltage: f64, max: f64 },

    #[error("SINR undefined: zero noise and no interferers")]
    ZeroDenominator,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("BER table has no entry for {scheme} K={k} N_h={n_h} N_s={n_s}")]
    TableGap {
        scheme: &'static str,
        k: u32,
        n_h: u32,
        n_s: u32,
    },

    #[error("{location}: {message}")]
    Config { location: String, message: String },

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible => 2,
            Error::Io(_) | Error::File { .. } | Error::Csv(_) => 3,
            _ => 1,
        }
    }
}
