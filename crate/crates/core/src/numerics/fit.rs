//! Least-squares fits: log-log power laws and single Gaussian peaks.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};

/// `y = prefactor / x^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLaw {
    pub prefactor: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub fn eval(&self, x: f64) -> f64 {
        self.prefactor / x.powf(self.exponent)
    }
}

/// Ordinary least squares on `ln y = ln a - b ln x`.
///
/// Needs at least two distinct abscissae; every `x` and `y` must be positive.
pub fn power_law_fit(points: &[(f64, f64)]) -> Result<PowerLaw> {
    if points.len() < 2 {
        return Err(Error::InvalidData(format!(
            "power-law fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points
        .iter()
        .find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::InvalidData(format!(
            "power-law fit needs positive finite data, got ({x}, {y})"
        )));
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x.ln(), sy + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in points {
        let dx = x.ln() - mx;
        sxx += dx * dx;
        sxy += dx * (y.ln() - my);
    }
    if sxx <= 1e-300 {
        return Err(Error::InvalidData(
            "power-law fit needs at least two distinct x values".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok(PowerLaw {
        prefactor: (my - slope * mx).exp(),
        exponent: -slope,
    })
}

/// Parameters of `amplitude * exp(-(x - center)^2 / (2 width^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gaussian {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Gaussian {
    pub fn eval(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.width;
        self.amplitude * (-0.5 * z * z).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFit {
    pub params: Gaussian,
    pub rms_residual: f64,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 200;
const STEP_TOL: f64 = 1e-10;

/// Damped Gauss-Newton (Levenberg-Marquardt) fit of a single Gaussian.
pub fn nonlinear_gaussian_fit(points: &[(f64, f64)], init: Gaussian) -> Result<GaussianFit> {
    if points.len() < 5 {
        return Err(Error::InsufficientResolution {
            points: points.len(),
            required: 5,
        });
    }
    if init.width.is_nan() || init.width <= 0.0 {
        return Err(Error::FitFailure(format!(
            "initial width must be positive, got {}",
            init.width
        )));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, y)| {
            (lo.min(*y), hi.max(*y))
        });
    if hi - lo <= 1e-12 * hi.abs().max(lo.abs()) {
        return Err(Error::FitFailure("data are flat".into()));
    }

    let sse = |p: &Vector3<f64>| -> f64 {
        let g = Gaussian {
            amplitude: p[0],
            center: p[1],
            width: p[2],
        };
        points.iter().map(|(x, y)| (y - g.eval(*x)).powi(2)).sum()
    };

    let mut p = Vector3::new(init.amplitude, init.center, init.width);
    let mut cost = sse(&p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (x, y) in points {
            let (a, c, w) = (p[0], p[1], p[2]);
            let d = x - c;
            let g = (-0.5 * d * d / (w * w)).exp();
            let row = Vector3::new(g, a * g * d / (w * w), a * g * d * d / (w * w * w));
            jtj += row * row.transpose();
            jtr += row * (y - a * g);
        }
        if jtj.determinant().abs() <= 1e-300 || jtj.iter().any(|v| !v.is_finite()) {
            return Err(Error::FitFailure("singular normal equations".into()));
        }

        let mut accepted = None;
        while lambda < 1e16 {
            let mut damped = jtj;
            for i in 0..3 {
                damped[(i, i)] *= 1.0 + lambda;
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&jtr),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial = p + step;
            let trial_cost = sse(&trial);
            if trial_cost.is_finite() && trial_cost <= cost {
                accepted = Some((trial, trial_cost, step));
                lambda = (lambda / 10.0).max(1e-15);
                break;
            }
            lambda *= 10.0;
        }

        let Some((trial, trial_cost, step)) = accepted else {
            // No descent direction left: at a minimum to working precision.
            break;
        };
        p = trial;
        cost = trial_cost;
        let small = (0..3).all(|i| step[i].abs() <= STEP_TOL * p[i].abs().max(1.0));
        if small {
            break;
        }
    }

    let params = Gaussian {
        amplitude: p[0],
        center: p[1],
        width: p[2].abs(),
    };
    if !(params.amplitude.is_finite() && params.center.is_finite() && params.width.is_finite())
        || params.width == 0.0
    {
        return Err(Error::FitFailure("fit diverged".into()));
    }
    Ok(GaussianFit {
        params,
        rms_residual: (cost / points.len() as f64).sqrt(),
        iterations,
    })
}
