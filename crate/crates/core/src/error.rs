use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the simulation engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("grid too small: {0}")]
    SupportTruncated(String),

    #[error("phase-space grid with {sites} sites is not supported (at most 2)")]
    Feasibility { sites: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("wave function has zero norm")]
    ZeroNorm,

    #[error("non-finite field values at step {step}{}", member.map(|m| format!(" (member {m})")).unwrap_or_default())]
    Divergence { step: u64, member: Option<usize> },

    #[error("probability mass {leaked:e} left the grid (tolerance {tolerance:e})")]
    BoundaryLeak { leaked: f64, tolerance: f64 },

    #[error(
        "unstable time step: eps^2 * omega_max^2 = {value} must be below 1 (laplacian_prefactor {prefactor}, D = {spatial_dim})"
    )]
    Unstable { value: f64, prefactor: f64, spatial_dim: usize },

    #[error("selection rule violated by {violation:e} (tolerance {tolerance:e})")]
    SelectionRule { violation: f64, tolerance: f64 },

    #[error("under-resolved grid: {0}")]
    Resolution(String),

    #[error("operator expectation has imaginary residue {residue:e}")]
    NonHermitian { residue: f64 },

    #[error("identity violated: {name} off by {deviation:e}")]
    IdentityViolation { name: &'static str, deviation: f64 },

    #[error("state is not band-limited: edge weight {defect:e} exceeds {tolerance:e}")]
    BandLimit { defect: f64, tolerance: f64 },

    #[error("mass squared must be positive, got {0}")]
    NonPositiveMass(f64),

    #[error("root search failed: {0}")]
    RootFind(String),

    #[error("series truncation mismatch: {0}")]
    Truncation(String),

    #[error("ensemble too small: {0} members")]
    TooFewMembers(usize),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
