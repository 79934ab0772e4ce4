use thiserror::Error;

/// Errors shared across the simulation and certification modules.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A spec failed validation at construction.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// The simulated operational horizon does not cover the requested real
    /// time; retry with a longer operational horizon (or a larger cap).
    #[error(
        "operational horizon too short: need D beyond t = {needed}, have {available}; \
         extend the operational horizon"
    )]
    Horizon { needed: f64, available: f64 },

    /// Quadrature or another numeric routine failed to reach its tolerance.
    #[error("numeric error in {what}: achieved tolerance {achieved:e}")]
    Numeric { what: String, achieved: f64 },

    /// The integrator produced a non-finite state.
    #[error("numeric blow-up at t = {t}, x = {x}")]
    BlowUp { t: f64, x: f64 },

    /// An operation was called outside its contract.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A result could not be computed from the available data.
    #[error("diagnostic: {0}")]
    Diagnostic(String),

    /// A standing assumption of the theory does not hold for the given spec.
    #[error("assumption violated: {0}")]
    AssumptionViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
