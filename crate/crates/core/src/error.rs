use thiserror::Error;

/// Errors raised by model evaluation, integration and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("point {coords:?} lies outside the chart domain of model `{model}`")]
    OutsideChart { model: String, coords: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown model `{0}` (known: hyperbolic, complex-hyperbolic, perturbed)")]
    UnknownModel(String),

    #[error("model registration failed: {0}")]
    Registration(String),

    #[error("vector is not unit: g-norm {norm}")]
    NotUnit { norm: f64 },

    #[error("frame is not orthonormal or not orthogonal to the velocity (deviation {deviation:.3e})")]
    FrameNotOrthonormal { deviation: f64 },

    #[error("frame degenerated during re-orthonormalization (conditioning {conditioning:.3e})")]
    FrameDegenerate { conditioning: f64 },

    #[error("Riccati solution blew up at t = {t} (entry magnitude {magnitude:.3e})")]
    RiccatiBlowUp { t: f64, magnitude: f64 },

    #[error("Riccati limit did not converge: gap {gap:.3e} > tol {tol:.3e} at horizon {horizon}")]
    NonConvergence { gap: f64, tol: f64, horizon: f64 },

    #[error("window [{start}, {end}] is not covered by the stored samples [{lo}, {hi}]")]
    WindowOutsideTrajectory { start: f64, end: f64, lo: f64, hi: f64 },

    #[error("model `{0}` is not locally symmetric; integrated identities are only checked on homogeneous models")]
    NotLocallySymmetric(String),

    #[error("shape operator invariant violated: {0}")]
    ShapeOperator(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, GeomError>;
