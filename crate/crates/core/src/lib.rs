//! Phase sensing with a photon-counting Mach-Zehnder interferometer.
//!
//! * [`linear_optics`]: Fock-space interferometer, outcome probabilities
//!   `P(n_c, n_d | phi)` and their phase derivatives for Fock and N00N inputs.
//! * [`priors`]: uniform, truncated-Gaussian and tabulated phase priors.
//! * [`inference`]: Bayesian posteriors `p(phi | m)`, peak detection and
//!   Gaussian peak-width fits.
//! * [`fidelity`]: mutual information between phase and outcome (in bits),
//!   its narrow-prior expansion and the classical Fisher information.
//! * [`numerics`]: quadrature, least-squares fits and finite differences.
//!
//! ```
//! use mzfid::{fock_input, mutual_information, Prior, QuadratureConfig};
//!
//! let state = fock_input(1).unwrap();
//! let h = mutual_information(&state, &Prior::uniform(), &QuadratureConfig::default()).unwrap();
//! assert!((h.bits - (1.0 / std::f64::consts::LN_2 - 1.0)).abs() < 1e-6);
//! ```

pub mod error;
pub mod fidelity;
pub mod inference;
pub mod linear_optics;
pub mod numerics;
pub mod priors;

pub use error::{Error, Result};
pub use fidelity::{
    asymptotic_fidelity, fisher_information, mutual_information, narrow_prior_approx,
    ApproxFidelityResult, FidelityResult,
};
pub use inference::{
    evidence, find_peaks, gaussian_peak_fit, posterior, scaling_fit, Peak, PeakFit,
    PosteriorDensity, ScalingFit,
};
pub use linear_optics::{
    fock_input, noon_input, outcome_distribution, MzConvention, Outcome, OutcomeDistribution,
    StateKind, TwoModeState,
};
pub use numerics::QuadratureConfig;
pub use priors::Prior;
