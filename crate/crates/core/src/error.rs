use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "degenerate configuration: points ({}, {}) and ({}, {}) are {distance:e} apart",
        first.0, first.1, second.0, second.1
    )]
    Degenerate {
        first: (i64, usize),
        second: (i64, usize),
        distance: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian at iteration {iteration}: sigma_min = {sigma_min:e}")]
    SingularJacobian { iteration: usize, sigma_min: f64 },

    #[error("blocks {first} and {second} are incompatible: residual forces differ by {difference:e}")]
    Incompatible {
        first: usize,
        second: usize,
        difference: f64,
    },

    #[error("block {index} is not balanced (max interior force {residual:e})")]
    Unbalanced { index: usize, residual: f64 },

    #[error("block {index} fails its non-degeneracy certificate (sigma_min {sigma_min:e})")]
    CertificateFailed { index: usize, sigma_min: f64 },

    #[error("window [{lo}, {hi}] cannot be covered: {reason}")]
    Uncoverable { lo: i64, hi: i64, reason: String },

    #[error("unknown builtin block `{0}`")]
    UnknownBuiltin(String),

    #[error("compatibility relation violated on sphere {level}: sum of gamma below {lower} vs above {upper}")]
    Compatibility { level: i64, lower: f64, upper: f64 },

    #[error("weight normalisation violated on sphere {level}: {which} sums to {sum}")]
    Normalization {
        level: i64,
        which: &'static str,
        sum: String,
    },

    #[error("pole {0} is not a pole of the form")]
    PoleNotFound(String),

    #[error("contour passes within {clearance:e} of a singularity at {at} (required {required:e})")]
    SingularityProximity {
        at: String,
        clearance: f64,
        required: f64,
    },

    #[error("quadrature did not stabilise: |I_N - I_2N| = {difference:e} at N = {nodes}")]
    QuadratureNonConvergence { nodes: usize, difference: f64 },

    #[error("constant selection failed: {0}")]
    ConstantSelection(String),

    #[error("t = {t} outside the guarded range (0, {max})")]
    TOutOfRange { t: f64, max: f64 },

    #[error("path crosses a pole near {0}")]
    PathCrossesPole(String),

    #[error("contour selection failed: {0}")]
    ContourSelection(String),

    #[error("evaluation at a pole of g on sphere {level}")]
    AtPole { level: i64 },

    #[error("t = {t} too large: slabs {lower} and {upper} overlap by {overlap}")]
    TooLargeT {
        t: f64,
        lower: i64,
        upper: i64,
        overlap: f64,
    },

    #[error("gluing mismatch {mismatch:e} on neck ({}, {}) exceeds {tolerance:e}", neck.0, neck.1)]
    GluingMismatch {
        neck: (i64, usize),
        mismatch: f64,
        tolerance: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
