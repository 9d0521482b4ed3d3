//! Shared numerical kernels.

mod diff;
mod fit;
mod quadrature;

pub use diff::{central_difference, Order};
pub use fit::{nonlinear_gaussian_fit, power_law_fit, Gaussian, GaussianFit, PowerLaw};
pub use quadrature::{
    gauss_legendre, integrate, integrate_on, max_abs_diff, refine, Integral, Node, PanelRule,
    QuadratureConfig, Refined,
};
