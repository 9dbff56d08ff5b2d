use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock cutoff too small: discarded tail mass {discarded:e} exceeds tolerance {tail_tol:e}")]
    CutoffTooSmall { discarded: f64, tail_tol: f64 },

    #[error("coherent amplitude too large: |mu|^2 = {mean_photons} exceeds n_max/4 = {limit}")]
    AmplitudeTooLarge { mean_photons: f64, limit: f64 },

    #[error("invalid mode index {index} for a {modes}-mode state")]
    InvalidModeIndex { index: usize, modes: usize },

    #[error("operator degree {degree} exceeds the supported maximum {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("squeezing phase theta = {theta} is not supported (real squeezing only)")]
    UnsupportedPhase { theta: f64 },

    #[error("parameter {name} must be non-negative, got {value}")]
    NegativeParameter { name: &'static str, value: f64 },

    #[error("beta * omega must be positive, got {value}")]
    NonPositiveExponent { value: f64 },

    #[error("arm length must be positive, got {value}")]
    NonPositiveLength { value: f64 },

    #[error("quadrature under-resolved: {nodes} nodes per axis, at least {required} required")]
    QuadratureUnderResolved { nodes: usize, required: usize },

    #[error("degenerate denominator {value:e} (floor {floor:e})")]
    DegenerateDenominator { value: f64, floor: f64 },

    #[error("finite-difference step {h} above the maximum 1e-2")]
    StepTooLarge { h: f64 },

    #[error("finite-difference step {h} below the minimum 1e-4")]
    StepTooSmall { h: f64 },

    #[error("finite-difference estimate unstable: step h gives {coarse:e}, h/2 gives {fine:e}")]
    FiniteDifferenceUnstable { coarse: f64, fine: f64 },

    #[error("coherent amplitude must be nonzero")]
    ZeroAmplitude,

    #[error("at least {min} samples required, got {samples}")]
    TooFewSamples { samples: usize, min: usize },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
