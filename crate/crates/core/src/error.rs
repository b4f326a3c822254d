use thiserror::Error;

/// Errors raised by the numerical operators and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A run configuration could not be parsed or validated.
    #[error("configuration error: {0}")]
    Config(String),

    /// A point lies outside the domain of a sampled signal.
    #[error("x = {x} lies outside the sampled domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    /// The subdivision budget ran out before the tolerance was met.
    #[error(
        "quadrature did not converge: value {value:e}, error estimate {err_est:e} after {subdivisions} subdivisions"
    )]
    Accuracy {
        value: f64,
        err_est: f64,
        subdivisions: usize,
    },

    /// The integrand produced a NaN or infinite value.
    #[error("integrand is not finite at t = {0}")]
    NonFinite(f64),

    #[error("tail with decay power {0} is not integrable")]
    NonIntegrableTail(f64),

    #[error("kernel majorant is not integrable: {0}")]
    MajorantNotIntegrable(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("sampled signal load failed: {0}")]
    Load(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used in report rows.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Config(_) => "config",
            Error::Domain { .. } => "domain",
            Error::Accuracy { .. } => "accuracy",
            Error::NonFinite(_) => "non_finite",
            Error::NonIntegrableTail(_) => "non_integrable_tail",
            Error::MajorantNotIntegrable(_) => "majorant",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::Load(_) => "load",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Accuracy { .. } | Error::NonFinite(_) | Error::DegenerateFit(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
