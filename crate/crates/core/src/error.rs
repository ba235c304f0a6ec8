use thiserror::Error;

/// Failures reported by the library. Every variant names the violated
/// precondition so the CLI can forward it verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("|zeta| = {modulus} lies outside the open unit disc")]
    OutsideUnitDisc { modulus: f64 },

    #[error("radial index {p} exceeds p_max = {p_max}")]
    IndexOutOfRange { p: usize, p_max: usize },

    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error(
        "inadequate truncation: residual {residual:e} exceeds {tolerance:e} (raise p_max or margin)"
    )]
    InadequateTruncation { residual: f64, tolerance: f64 },

    #[error("state tail mass stayed above {tolerance:e} up to the growth cap p_max = {cap}")]
    GrowthCapExceeded { cap: usize, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("irrep mismatch: ell = {left} vs ell = {right}")]
    IrrepMismatch { left: i32, right: i32 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids differ")]
    GridMismatch,

    #[error("field is not of the form f(r) exp(i ell phi): {0}")]
    NotFactorized(String),

    #[error("root isolation found {found} roots of L_{p}^{a}, expected {p}")]
    RootIsolation { p: usize, a: usize, found: usize },

    #[error("finite-difference step too coarse: quotient {quotient} is {distance} from the nearest integer")]
    StepTooCoarse { quotient: f64, distance: f64 },

    #[error("unknown tag `{0}`")]
    UnknownTag(String),
}

pub type Result<T> = std::result::Result<T, Error>;
