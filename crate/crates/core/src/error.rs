use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid photon number {0}: at least one photon is required")]
    InvalidPhotonNumber(u32),

    #[error("invalid prior width {0}: sigma must be positive and finite")]
    InvalidWidth(f64),

    #[error("invalid phase {0}: expected a finite value in (-pi, pi]")]
    InvalidPhase(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("outcome ({n_c},{n_d}) does not match a {photons}-photon state")]
    OutcomeMismatch { n_c: u32, n_d: u32, photons: u32 },

    #[error("outcome ({n_c},{n_d}) has zero probability under this prior")]
    ImpossibleOutcome { n_c: u32, n_d: u32 },

    #[error("fit window has {points} grid points, at least {required} are needed")]
    InsufficientResolution { points: usize, required: usize },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("integrand is not finite at phi = {at}")]
    Integrand { at: f64 },

    #[error("quadrature did not converge: best estimate {best}, error estimate {estimate:e}")]
    NotConverged { best: f64, estimate: f64 },

    #[error("narrow-prior approximation undefined: every outcome is degenerate at phi0 = {phi0}")]
    UndefinedApproximation { phi0: f64 },

    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot read tabulated prior: {0}")]
    PriorFile(String),
}
