//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected ({expected_x}, {expected_y}), got ({got_x}, {got_y})")]
    DimensionMismatch {
        expected_x: usize,
        expected_y: usize,
        got_x: usize,
        got_y: usize,
    },

    #[error("frequency basis is empty in at least one direction")]
    EmptyBasis,

    #[error("frequency basis entries must be finite")]
    NonFiniteBasis,

    #[error(
        "near-resonant frequency basis: independence margin {margin:.3e} at box radius {radius} \
         is below {min_margin:.0e}"
    )]
    NearResonantBasis {
        margin: f64,
        radius: u32,
        min_margin: f64,
    },

    #[error("invalid decay profile: {0}")]
    InvalidProfile(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("weight exponent must be nonnegative, got rho = ({0}, {1})")]
    NegativeWeight(f64, f64),

    #[error("rho constraint violated: need 0 < kappa_j/2 - 2*rho_j <= 1, got ({0:.6}, {1:.6})")]
    RhoConstraint(f64, f64),

    #[error("field shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error(
        "Picard iteration diverging at step {step}: sup difference grew {prev:.3e} -> {curr:.3e}"
    )]
    Divergence { step: usize, prev: f64, curr: f64 },

    #[error("non-finite value produced at t = {time:.6e}")]
    BlowUp { time: f64 },

    #[error("time grids are incommensurate: {0}")]
    GridMismatch(String),

    #[error("operation requires an exponential decay profile")]
    UnsupportedProfile,

    #[error("malformed branch: unit label below depth 1")]
    MalformedBranch,

    #[error("explicit tree-term evaluation is limited to depth <= {max}, got depth {got}")]
    UnsupportedDepth { max: usize, got: usize },

    #[error("mode not contained in the truncation box")]
    ModeOutsideBox,

    #[error("assignment has wrong arity: branch needs {expected} modes, got {got}")]
    BadAssignment { expected: usize, got: usize },

    #[error("snapshot i/o: {0}")]
    SnapshotIo(String),

    #[error("snapshot format: {0}")]
    SnapshotFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
