//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the library.
///
/// Structural verdicts (a Lax matrix failing its constraints, a tangency check
/// failing a clause) are *reports*, not errors; they live in the modules that
/// produce them. `LaxError` covers genuine failures: bad inputs, mismatched
/// curves, non-generic configurations the algorithms cannot proceed through.
#[derive(Debug, Error)]
pub enum LaxError {
    #[error("elements live on different base curves")]
    CurveMismatch,

    #[error("division by the zero element")]
    DivisionByZero,

    #[error("hyperelliptic defining polynomial must be squarefree of degree >= 3: {0}")]
    BadCurve(String),

    #[error("place does not lie on the curve: {0}")]
    BadPlace(String),

    #[error("the rational line has no effective canonical divisor; use the tail-support divisor at infinity instead")]
    NoCanonicalDivisor,

    #[error("requested expansion window could not be stabilized: {0}")]
    ExpansionFailure(String),

    #[error("function has a pole at the evaluation place")]
    PoleAtEvaluation,

    #[error("Lax matrix violates its constraints:\n{0}")]
    Validation(crate::laxmat::ValidationReport),

    #[error("non-generic Krichever-Tyurin parameters: rank deficiency {rank_deficiency}, residual {residual:.3e}")]
    NonGenericParameters { rank_deficiency: usize, residual: f64 },

    #[error("gauge renormalization failed: alpha_{index} * W has vanishing last coordinate")]
    GaugeRenormalization { index: usize },

    #[error("spectral curve is degenerate (non-reduced or unramified): {0}")]
    DegenerateSpectralCurve(String),

    #[error("fiber point too close to a branch point: root separation {separation:.3e}")]
    BranchProximity { separation: f64 },

    #[error("ramification is not simple: {0}")]
    NonSimpleRamification(String),

    #[error("eigenvalue collision: nullspace is ill-conditioned (gap {0:.3e})")]
    EigenvalueCollision(f64),

    #[error("normalization coordinate vanishes at the requested point: {0}")]
    NormalizationFailure(String),

    #[error("ansatz infeasible: principal-part matching failed with defect {0:.3e}")]
    AnsatzInfeasible(f64),

    #[error("integration step rejected at t={t}: constraint defect {defect:.3e} exceeds budget")]
    StepRejected { t: f64, defect: f64 },

    #[error("moving pole collided with the fixed pole support at t={0}")]
    PoleCollision(f64),

    #[error("residue-section supports do not match between samples")]
    SupportMismatch,

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("differential basis has size {got}, expected the spectral genus {expected}")]
    BasisSizeMismatch { got: usize, expected: usize },

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("path routing failed near branch points: {0}")]
    PathRouting(String),

    #[error("sample spacing exceeds half a lattice cell; Abel images cannot be unwrapped")]
    StepTooLarge,

    #[error("operation unsupported in this regime: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LaxError>;
