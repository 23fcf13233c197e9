use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

/// Errors raised anywhere in the core pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A polygon or element is too small, collinear or wrongly oriented.
    DegenerateGeometry(String),
    /// Two seeds of a tessellation coincide.
    DuplicateSeed { first: usize, second: usize },
    /// Input violates a documented precondition.
    InvalidInput(String),
    /// The mesh is not conforming (an interior edge has no partner).
    NonConforming(String),
    /// Sub-tessellation of a marked element failed after all retries.
    RefinementFailed { element: usize },
    /// The constrained stiffness matrix is singular (rigid modes not removed).
    SingularSystem,
    /// The iterative fallback did not converge.
    SolveFailed { iterations: usize, residual: f64 },
    /// Every indicator value is zero, so there is nothing to mark.
    NothingToRefine,
    /// A reference solution was queried outside its mesh.
    EvaluationError { x: f64, y: f64 },
    /// Total strain energy is zero, PSE is undefined.
    ZeroEnergy,
    /// The adaptive error curve never crosses the reference error level.
    NotComparable,
    /// PRE* requested for PRE = 0.
    DivisionByZero,
    /// An error raised at a given step of an adaptive run.
    AtStep { step: usize, source: Box<Error> },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateGeometry(what) => write!(f, "degenerate geometry: {what}"),
            Error::DuplicateSeed { first, second } => {
                write!(f, "seeds {first} and {second} coincide")
            }
            Error::InvalidInput(what) => write!(f, "invalid input: {what}"),
            Error::NonConforming(what) => write!(f, "non-conforming mesh: {what}"),
            Error::RefinementFailed { element } => {
                write!(f, "refinement of element {element} failed")
            }
            Error::SingularSystem => write!(f, "constrained stiffness matrix is singular"),
            Error::SolveFailed { iterations, residual } => write!(
                f,
                "iterative solve did not converge after {iterations} iterations (relative residual {residual:e})"
            ),
            Error::NothingToRefine => write!(f, "all indicator values are zero"),
            Error::EvaluationError { x, y } => {
                write!(f, "reference solution evaluated outside its domain at ({x}, {y})")
            }
            Error::ZeroEnergy => write!(f, "total strain energy is zero"),
            Error::NotComparable => {
                write!(f, "adaptive error range does not contain the reference error")
            }
            Error::DivisionByZero => write!(f, "division by zero"),
            Error::AtStep { step, source } => write!(f, "step {step}: {source}"),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Error {
        Error::AtStep { step, source: Box::new(self) }
    }
}
