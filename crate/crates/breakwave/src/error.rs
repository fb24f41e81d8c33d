//! Error cases shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Kernel whose distributional derivative is not an L∞ function.
    #[error("kernel `{kernel}` has no essentially bounded derivative{hint}")]
    UnboundedDerivative { kernel: &'static str, hint: &'static str },

    /// Kernel mass does not decay below tolerance inside the periodic window.
    #[error("kernel does not decay below {tol:e} within half-length {have}; need L >= {needed:.3}")]
    KernelDomain { needed: f64, have: f64, tol: f64 },

    /// Grid sizes must be powers of two so the transform backend stays exact.
    #[error("grid size {n} is not a power of two")]
    NonPowerOfTwo { n: usize },

    /// Non-finite value where a finite one is required.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    /// Drift-form flux evaluated at or below the domain floor u = -1.
    #[error("drift flux undefined at u = {u} (requires u > -1){at}")]
    DriftDomain { u: f64, at: String },

    /// Flux model has no local drift decomposition.
    #[error("flux model `{model}` is not in drift form")]
    NotDriftForm { model: &'static str },

    /// Comparison parameter outside the admissible band.
    #[error("mu = {mu} outside admissible band [{lo}, 0)")]
    MuOutsideBand { mu: f64, lo: f64 },

    /// The balance term E is undefined at the band endpoint.
    #[error("E undefined at band endpoint mu = {mu} (mu + 3/(2*sqrt(1+u_max)) = 0)")]
    EndpointUndefined { mu: f64 },

    /// Comparison clocks need a positive kernel-mass constant.
    #[error("comparison times undefined for M = 0; no breaking predicted via this bound")]
    TimesUndefined,

    /// Closed-form Riccati solution evaluated at its pole.
    #[error("Riccati closed form evaluated at pole t = {t}")]
    PoleEvaluation { t: f64 },

    /// Time step exceeds the advective stability bound.
    #[error("CFL violation: dt = {dt:e} exceeds limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    /// Solution mass reached the edge of the truncated domain.
    #[error("boundary contamination at t = {t}: |u(+-L)| = {value:e} exceeds 1e-8")]
    BoundaryContamination { t: f64, value: f64 },

    /// Invalid scalar parameter (constructor-level validation).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
}
