use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("spectrum does not sum to zero (|sum| = {0:e})")]
    SpectrumNotTraceless(f64),

    #[error("spectrum has repeated eigenvalues; orbit is not diagonalizable in the sampled form")]
    DegenerateSpectrum,

    #[error("evaluation point coincides with marked point {index}")]
    AtPole { index: usize },

    #[error("marked points {a} and {b} coincide or come closer than {separation:e}")]
    CoincidentPoints { a: usize, b: usize, separation: f64 },

    #[error("marked points {a} and {b} would collide near flow parameter {parameter:.6}")]
    NearCollision { a: usize, b: usize, parameter: f64 },

    #[error("index {index} out of range for {len} marked points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("step size underflow on segment {segment} at parameter {parameter:e}")]
    StepUnderflow { segment: usize, parameter: f64 },

    #[error("non-finite state on segment {segment}")]
    NonFinite { segment: usize },

    #[error("integration exceeded {max_steps} steps on segment {segment}")]
    TooManySteps { segment: usize, max_steps: usize },

    #[error("contour violates clearance: segment {segment} passes within {distance:e} of marked point {point}")]
    Clearance { segment: usize, point: usize, distance: f64 },

    #[error("contour is disconnected between segments {segment} and {next}")]
    Disconnected { segment: usize, next: usize },

    #[error("loop system changed homotopy class along the flow (angular order {before:?} -> {after:?})")]
    LoopClassChanged { before: Vec<usize>, after: Vec<usize> },

    #[error("monodromy representations use different loop conventions: {0}")]
    ConventionMismatch(String),

    #[error("jet truncation too shallow: need orders ({need_z}, {need_zbar}), have ({have_z}, {have_zbar})")]
    Truncation {
        need_z: usize,
        need_zbar: usize,
        have_z: usize,
        have_zbar: usize,
    },

    #[error("jets have mismatched expansion point or truncation")]
    JetMismatch,

    #[error("jet value is not exact at the expansion point (derivative depth exceeded the truncation)")]
    JetExhausted,

    #[error("degenerate map: first derivative vanishes at the expansion point")]
    DegenerateMap,

    #[error("matrix is singular")]
    Singular,
}

pub type Result<T> = std::result::Result<T, Error>;
