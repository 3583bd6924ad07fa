use thiserror::Error;

/// Errors raised by model construction, spectral analysis and Fisher-information pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("family mismatch: expected {expected}, got {got}")]
    FamilyMismatch { expected: String, got: String },

    #[error("degenerate model: {0}")]
    Degenerate(String),

    #[error("eigensolver failed ({reason}); matrix fingerprint {fingerprint}")]
    EigenSolver { reason: String, fingerprint: String },

    #[error("reference energy {re}{im:+}i lies on the spectrum (distance {distance:.3e})")]
    ReferenceEnergy { re: f64, im: f64, distance: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("eigenstate tracking failed: overlap {overlap:.6} below 0.9 at lambda {lambda}")]
    TrackingFailure { overlap: f64, lambda: f64 },

    #[error("ambiguous eigenstate match: indices {indices:?} overlap equally")]
    DegenerateOverlap { indices: Vec<usize> },

    #[error("no edge state within tolerance of target energy {target}: {detail}")]
    EdgeStateAbsent { target: String, detail: String },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("root count mismatch: expected {expected}, found {found}")]
    RootCount { expected: usize, found: usize },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("untrusted eigenpair {index}: {detail}")]
    Untrusted { index: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
