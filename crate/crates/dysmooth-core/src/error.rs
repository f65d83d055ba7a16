use alloc::string::String;
use alloc::vec::Vec;

/// Error type shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A dimension/level/order request exceeds a hard cap.
    #[error("capacity: {what} = {value} exceeds limit {limit}")]
    Capacity {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    /// A value sequence had the wrong length for the requested operation.
    #[error("arity: expected {expected} values, got {actual}")]
    Arity { expected: usize, actual: usize },

    /// A multi-index (plus difference offset) leaves the mesh.
    #[error("bounds: axis {axis}: index {index} + offset {offset} exceeds {max}")]
    Bounds {
        axis: usize,
        index: u64,
        offset: u64,
        max: u64,
    },

    /// A point or difference segment leaves the unit cube.
    #[error("domain: point {point:?} lies outside [0,1]^d")]
    Domain { point: Vec<f64> },

    /// A sampled source cannot supply values at the requested resolution.
    #[error("resolution: {detail}")]
    Resolution { detail: String },

    /// Sample data violates the field format (length or finiteness).
    #[error("format: expected {expected} values, got {actual}")]
    LengthMismatch { expected: u64, actual: u64 },

    /// A non-finite value at a given flat index.
    #[error("format: non-finite value at flat index {index}")]
    NonFinite { index: u64 },

    /// Requested mesh level is too coarse to hold an order-r difference.
    #[error("level too coarse: 2^{n} < r = {r}")]
    LevelTooCoarse { n: u32, r: u32 },

    /// A level lies outside the range covered by a profile.
    #[error("range: level {n} outside profile range {n_min}..={n_max}")]
    Range { n: u32, n_min: u32, n_max: u32 },

    /// Step t does not match the level n (needs 2^-n-1 < t <= 2^-n).
    #[error("step/level mismatch: t = {t} not in (2^-{n}/2, 2^-{n}]")]
    StepMismatch { t: f64, n: u32 },

    /// Not enough usable data points for a fit.
    #[error("insufficient data: need {needed} usable levels, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Zero psi encountered where a ratio is required.
    #[error("zero psi at level {n}: ratios undefined, use saturation_test")]
    ZeroPsi { n: u32 },

    /// A constraint of the basic-cube construction failed.
    #[error("constraint: {detail}")]
    Constraint { detail: String },

    /// Invalid input configuration or malformed instance.
    #[error("validation: {detail}")]
    Validation { detail: String },

    /// An internal invariant was violated (would falsify the theory).
    #[error("internal invariant violated: {detail}")]
    Internal { detail: String },
}

impl Error {
    /// Process exit status the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity { .. } => 3,
            Error::Internal { .. } => 4,
            _ => 2,
        }
    }
}
