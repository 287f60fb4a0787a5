//! Error type shared by every module of the crate.

use num_complex::Complex64;
use thiserror::Error;

use crate::nu::NuTrace;

/// Failures raised by the numerical pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A polynomial expected to be quadratic had a vanishing leading coefficient.
    #[error("polynomial degree is below 2; quadratic roots are undefined")]
    Degree,

    /// A function was evaluated at (or numerically on top of) a pole.
    #[error("singular point at x = {x}")]
    Singularity { x: f64 },

    /// Several grid nodes coincide with poles of the potential.
    #[error("grid contains {} singular node(s), first at x = {}", .nodes.len(), .nodes.first().copied().unwrap_or(f64::NAN))]
    SingularNodes { nodes: Vec<f64> },

    /// The potential record is malformed (missing, irrelevant or out-of-range fields).
    #[error("invalid potential spec: {0}")]
    InvalidSpec(String),

    /// The requested variant transform does not exist for this family.
    #[error("no {to} variant is defined from {from} for the {family} family")]
    UnsupportedTransform {
        family: String,
        from: String,
        to: String,
    },

    /// The family/variant pair has no reduced hypergeometric form.
    #[error("unsupported family/variant combination: {0}")]
    UnsupportedFamily(String),

    /// The operation is not defined for this variant.
    #[error("unsupported variant: {0}")]
    UnsupportedVariant(String),

    /// The discriminant condition on Q(s; k) does not depend on k.
    #[error("discriminant of the radicand is constant in k")]
    DegenerateDiscriminant,

    /// All four (k, sign) combinations fail the slope requirement.
    #[error("no admissible branch: every (k, sign) combination has Re(tau') >= 0")]
    NoAdmissibleBranch { trace: Box<NuTrace> },

    /// The quantization condition could not be solved for level `n`.
    #[error(
        "root finding for level {n} did not converge (last iterate {last}, |F| = {residual:e})"
    )]
    RootNotConverged {
        n: u32,
        last: Complex64,
        residual: f64,
    },

    /// The quantization condition has a root under a branch that is not the
    /// one selected at that root.
    #[error("level {n}: root at eps = {epsilon} lies on a branch that is not selected there")]
    BranchMismatch { n: u32, epsilon: Complex64 },

    /// The QR/QL iteration exceeded its budget.
    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    EigenNotConverged { iterations: usize },

    /// An inverse-iteration residual exceeded the certification bound.
    #[error("eigenvalue certification failed: residual {residual:e} exceeds bound {bound:e}")]
    CertificationFailed { residual: f64, bound: f64 },

    /// The weight function of the accepted branch is not integrable.
    #[error("weight function is not integrable on the coordinate domain: {0}")]
    NonIntegrableWeight(String),

    /// The wavefunction tail does not decay on the requested domain.
    #[error("wavefunction is not normalizable on the domain: {0}")]
    NotNormalizable(String),

    /// Generic argument validation failure.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
