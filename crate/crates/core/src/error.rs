use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("degenerate tangent at xi = {xi}: |g'| = {speed:e}")]
    DegenerateTangent { xi: f64, speed: f64 },

    #[error("point outside the valid tube (1 + eta*kappa = {factor:e} at xi = {xi})")]
    SingularTube { xi: f64, factor: f64 },

    #[error("Frenet inversion did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("curve parameter {xi} left the domain [{start}, {end}]")]
    OutOfDomain { xi: f64, start: f64, end: f64 },

    #[error("closest point is ambiguous: parameters {first} and {second} are equally close")]
    AmbiguousProjection { first: f64, second: f64 },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("element {element}: boundary meets the interface at {count} points")]
    MultiCut { element: usize, count: usize },

    #[error("element {element}: interface crossing is tangential")]
    Tangency { element: usize },

    #[error("element {element}: tube condition violated ({detail})")]
    TubeViolation { element: usize, detail: String },

    #[error("polynomial degree error: {0}")]
    Degree(String),

    #[error("extension system is singular on element {element}")]
    SingularExtension { element: usize },

    #[error("element {element}: quadrature construction failed ({detail})")]
    Quadrature { element: usize, detail: String },

    #[error("quadrature side tag does not match the shape side at {x:?}")]
    SideMismatch { x: [f64; 2] },

    #[error("element {element}: local mass matrix is singular")]
    SingularMass { element: usize },

    #[error("factorization failed at pivot {pivot}")]
    Factorization { pivot: usize },

    #[error("solver residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Attach an element id to errors raised below the mesh level.
    pub(crate) fn at_element(self, element: usize) -> Error {
        match self {
            Error::Quadrature { detail, .. } => Error::Quadrature { element, detail },
            Error::MultiCut { count, .. } => Error::MultiCut { element, count },
            Error::Tangency { .. } => Error::Tangency { element },
            Error::TubeViolation { detail, .. } => Error::TubeViolation { element, detail },
            Error::SingularExtension { .. } => Error::SingularExtension { element },
            Error::SingularMass { .. } => Error::SingularMass { element },
            other => other,
        }
    }
}
