use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("pi(1) diverges for a critical law")]
    PiDiverges,

    #[error("survival probability below the floating-point floor at t={t}; use limit laws instead")]
    SurvivalUnderflow { t: f64 },

    #[error(
        "rejection budget exhausted: {attempts} attempts yielded {survivors} survivors \
         (wanted {wanted}); lower the horizon or raise the budget"
    )]
    RejectionBudget {
        attempts: u64,
        survivors: u64,
        wanted: u64,
    },

    #[error("series cap {cap} too small: {uncovered:.3e} probability mass uncovered")]
    SeriesCap { cap: usize, uncovered: f64 },

    #[error("statistics error: {0}")]
    Stats(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
