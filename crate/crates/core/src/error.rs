use thiserror::Error;

/// Errors raised by the geometric and decoding routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("decomposition basis is singular (rays are collinear)")]
    SingularDecomposition,
    #[error("points do not determine a non-vertical plane")]
    DegeneratePlane,
    #[error("plane is parallel to the base plane z = 0")]
    HorizontalPlane,
    #[error("lines are parallel")]
    ParallelLines,
    #[error("polygon is not convex")]
    NonConvexInput,
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("degenerate quadrilateral: {0}")]
    DegenerateQuad(&'static str),
    #[error("mask has no cell above the threshold")]
    EmptyMask,
    #[error("mask dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Whether the error reports empty or degenerate *data* rather than a
    /// malformed request.
    pub fn is_degenerate_input(&self) -> bool {
        matches!(
            self,
            Error::EmptyMask
                | Error::DegenerateQuad(_)
                | Error::DegenerateInput(_)
                | Error::DegeneratePlane
                | Error::HorizontalPlane
                | Error::ParallelLines
                | Error::SingularDecomposition
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
