use thiserror::Error;

/// Errors raised while constructing or analyzing a NOMA scheme.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NomaError {
    #[error("p = {p} is not prime")]
    NonPrime { p: u32 },

    #[error("p = {p} is too small (need a prime p >= 5)")]
    TooSmall { p: u32 },

    #[error("p = {p} exceeds the supported maximum {max}")]
    Unsupported { p: u32, max: u32 },

    #[error("constellation of 2^{log2_points} points exceeds the cap of 2^{max_log2}")]
    SizeCap { log2_points: u32, max_log2: u32 },

    #[error("power fraction alpha = {0} is outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("bits per real dimension must be positive")]
    ZeroRate,

    #[error("user constellations are carved from different lattices")]
    LatticeMismatch,

    #[error("operation requires dimension 2, got n = {n}")]
    UnsupportedDimension { n: usize },

    #[error("invalid configuration `{field}`: {reason}")]
    ConfigInvalid { field: &'static str, reason: String },

    #[error("need at least {needed} points with positive SER in the window, found {found}")]
    InsufficientData { needed: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, NomaError>;
