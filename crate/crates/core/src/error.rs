use thiserror::Error;

/// Errors produced by the triangulation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TriangulationError {
    #[error("camera matrix is rank deficient")]
    RankDeficientCamera,
    #[error("left 3x3 block of a calibrated camera is not a rotation")]
    NotARotation,
    #[error("camera has no finite center (left 3x3 block is singular)")]
    InfiniteCamera,
    #[error("camera centers coincide; the fundamental matrix is undefined")]
    CoincidentCenters,
    #[error("matrix is not rank 2 (|det F| = {0:e})")]
    NotRankTwo(f64),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("top-left 2x2 block of F is singular")]
    SingularF22,
    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),
    #[error("leading coefficient of the critical polynomial vanishes")]
    VanishingLead,
    #[error("weights must be positive and finite")]
    InvalidWeights,
    #[error("epipolar gradient vanishes at the measurement")]
    ZeroGradient,
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(&'static str),
    #[error("triangulated point lies at infinity")]
    PointAtInfinity,
    #[error("viewing rays are parallel")]
    ParallelRays,
    #[error("method needs camera matrices")]
    MissingCameras,
}

pub type Result<T> = std::result::Result<T, TriangulationError>;
