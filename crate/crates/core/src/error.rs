//! Error types shared across the crate.

use thiserror::Error;

/// Construction-time validation failures for geometric types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("focal lengths must be positive (got fx={fx}, fy={fy})")]
    InvalidIntrinsics { fx: f64, fy: f64 },
    #[error("rotation matrix is not orthonormal with determinant +1")]
    InvalidRotation,
    #[error("bearing vector must have nonzero norm")]
    ZeroBearing,
    #[error("line direction must have nonzero norm")]
    ZeroDirection,
    #[error("bearings are not positive multiples of the backprojected pixels")]
    InconsistentObservation,
}

/// Runtime failures of triangulation and metric operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TriangulationError {
    /// The two backprojected rays are (numerically) parallel, so the
    /// sine-rule denominator vanishes.
    #[error("backprojected rays are parallel")]
    DegenerateRays,
    /// Both rays are parallel to the baseline (observation at the epipole);
    /// the inverse-depth weights are undefined.
    #[error("inverse-depth weights are undefined (rays parallel to the baseline)")]
    DegenerateWeights,
    /// A linear solve encountered a rank-deficient or near-singular system.
    #[error("linear system is rank deficient")]
    SolveFailure,
    /// The operation needs pixel-domain intrinsics but the observation
    /// carries none.
    #[error("observation carries no intrinsics")]
    MissingIntrinsics,
    /// Parallax is undefined when the query point coincides with a camera
    /// center.
    #[error("parallax undefined at a camera center")]
    UndefinedParallax,
    /// Argument outside the function's domain.
    #[error("argument outside the valid domain")]
    OutOfDomain,
}
