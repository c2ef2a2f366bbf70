use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate {value} does not fit a 63-bit mantissa at precision {precision}")]
    PrecisionOverflow { value: f64, precision: u32 },

    #[error("precision {0} exceeds the supported maximum of 60")]
    PrecisionTooLarge(u32),

    #[error("precision mismatch: {left} vs {right}")]
    PrecisionMismatch { left: u32, right: u32 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("direction between identical points is undefined")]
    DegenerateDirection,

    #[error("strips are parallel; the directions do not separate points")]
    DegenerateStrip,

    #[error("configuration too close to tangential: separation {separation:e} < 2^-{t}")]
    Tangential { separation: f64, t: u32 },

    #[error("configuration outside the supported normalization band: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("cell set is empty")]
    EmptySet,

    #[error("point lies outside the occupied cells at precision {0}")]
    Membership(u32),

    #[error("regression needs at least 4 precisions in the window, got {0}")]
    Regression(usize),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
