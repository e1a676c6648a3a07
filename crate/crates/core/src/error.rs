use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A fine patch reads coarse data outside the coarse level's storage.
    #[error("nesting violation on level {level}: {detail}")]
    Nesting { level: usize, detail: String },

    #[error("time stamps out of sync: fine t={fine_t}, coarse t={coarse_t}")]
    Synchronization { fine_t: f64, coarse_t: f64 },

    /// The step was rejected; `courant` is the observed Courant number for the
    /// attempted dt so the driver can rescale and retry.
    #[error("CFL violation on level {level}: courant number {courant:.4} (max speed {max_speed:.4e})")]
    CflViolation {
        level: usize,
        courant: f64,
        max_speed: f64,
    },

    #[error("singular tridiagonal system: zero pivot at row {index}")]
    SingularSystem { index: usize },

    #[error("time query {t} outside bracket [{t_lo}, {t_hi}]")]
    TimeBracket { t: f64, t_lo: f64, t_hi: f64 },

    #[error("non-finite value in {what} on level {level}")]
    NonFinite { what: &'static str, level: usize },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status: 2 for configuration problems, 3 for failures
    /// during the computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::UnknownScenario(_) | Error::Parse { .. } => 2,
            _ => 3,
        }
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
