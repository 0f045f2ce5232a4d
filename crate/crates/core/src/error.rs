use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two objects that must have the same length (product dimension,
    /// node count, sample count) do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Grid functions living on different grids were combined.
    #[error("grid functions are defined on different grids")]
    GridMismatch,

    /// Malformed input that violates a constructor or precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A value left the domain on which a function is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A NaN or infinity appeared during evaluation.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Operator evaluation failed while computing one output component.
    #[error("component {component}: {source}")]
    Component {
        /// 1-based component index.
        component: usize,
        source: Box<Error>,
    },

    #[error("unsupported diagnostic: {0}")]
    Unsupported(String),

    /// Exhaustive enumeration would exceed the size guard.
    #[error("enumeration of {size} candidates exceeds the guard of {limit}")]
    TooLarge { size: u128, limit: u128 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn in_component(self, component: usize) -> Self {
        Error::Component {
            component,
            source: Box::new(self),
        }
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
