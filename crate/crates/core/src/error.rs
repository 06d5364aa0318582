use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A quantity left the domain on which the closed forms are defined.
    #[error("{quantity} = {value} is outside its domain ({constraint})")]
    Domain {
        quantity: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// Specific volume fell below the positivity floor or the implied
    /// η became nonpositive.
    #[error("vacuum{}: specific volume {u} outside admissible range (floor {floor})",
        .t.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    Vacuum { t: Option<f64>, u: f64, floor: f64 },

    #[error("gradient blow-up at t = {t}: max |r_x|, |s_x| = {max_gradient:e}")]
    BlowUp { t: f64, max_gradient: f64 },

    #[error("CFL failure at t = {t}: dt = {dt:e} below dt_min = {dt_min:e}")]
    CflFailure { t: f64, dt: f64, dt_min: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("interpolation outside recorded history: {0}")]
    Interpolation(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
