use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("no analytic distance between {0} and {1}")]
    NoAnalyticDistance(String, String),

    #[error("regions touch or intersect (distance {0}); a cutoff needs separated sets")]
    TouchingRegions(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("datum is not supported in the source region (outside mass {outside:.3e} vs allowed {allowed:.3e}); use the general mode")]
    NotSupported { outside: f64, allowed: f64 },

    #[error("estimate mode requires snapshot stride 1, trajectory has stride {0}")]
    StrideRequired(usize),

    #[error("trajectories are not aligned: {0}")]
    Misaligned(String),

    #[error("empty time window [{0}, {1}]")]
    EmptyWindow(f64, f64),

    #[error("solution blew up: {0}")]
    BlowUp(String),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
