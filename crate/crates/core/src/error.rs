use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid sector: {0}")]
    InvalidSector(String),
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("direction cone is empty: delta {delta} >= cos(aperture/2) = {bound}")]
    EmptyDirectionCone { delta: f64, bound: f64 },
    #[error("epsilon {eps} must be below half the shortest edge ({limit})")]
    EpsilonTooLarge { eps: f64, limit: f64 },
    #[error("all jet coefficients through degree {order} vanish")]
    DegenerateJet { order: usize },
    #[error("least-squares system is numerically singular")]
    SingularSystem,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("radial power {0} is not integrable at the vertex")]
    NonIntegrable(f64),
    #[error("field is identically zero")]
    ZeroField,
    #[error("sample {0} is zero; cannot fit a power law")]
    ZeroSample(usize),
    #[error("ellipticity violated: minimum coefficient {0}")]
    EllipticityViolated(f64),
    #[error("Faddeev symbol too small ({0:e}) on the frequency grid")]
    SymbolTooSmall(f64),
    #[error("fixed-point iteration does not contract (tau = {tau})")]
    NoContraction { tau: f64 },
    #[error("iterative solver did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("grid too coarse: {ppw:.2} points per wavelength (need 10)")]
    ResolutionTooCoarse { ppw: f64 },
    #[error("contrast leaks outside the hull: {0}")]
    SupportViolated(String),
    #[error("test field does not solve the equation: residual {0:e}")]
    TestFieldInvalid(f64),
    #[error("no determinant root in ({lo}, {hi})")]
    NoRootInInterval { lo: f64, hi: f64 },
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
