//! Prior phase densities on `(-pi, pi]`.

use std::f64::consts::{PI, SQRT_2};
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{integrate_on, Integral, QuadratureConfig};

/// Half-width, in units of sigma, of the window a truncated Gaussian is
/// integrated over. `exp(-16^2 / 2)` is far below double precision.
const GAUSSIAN_SUPPORT_SIGMAS: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    Uniform,
    Gaussian,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    Uniform,
    Gaussian(TruncatedGaussian),
    Tabulated(Tabulated),
}

/// `C exp(-(phi - center)^2 / (2 sigma^2))`, renormalized on `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedGaussian {
    center: f64,
    sigma: f64,
    norm: f64,
}

impl TruncatedGaussian {
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The normalization constant `C(center, sigma)`.
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Piecewise-linear density through tabulated points, zero outside the
/// tabulated range.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    phi: Vec<f64>,
    density: Vec<f64>,
}

impl Tabulated {
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.phi.iter().copied().zip(self.density.iter().copied())
    }

    fn eval(&self, phi: f64) -> f64 {
        let (first, last) = (self.phi[0], *self.phi.last().unwrap());
        if phi < first || phi > last {
            return 0.0;
        }
        let i = self.phi.partition_point(|&x| x <= phi);
        if i == self.phi.len() {
            return *self.density.last().unwrap();
        }
        let (x0, x1) = (self.phi[i - 1], self.phi[i]);
        let (y0, y1) = (self.density[i - 1], self.density[i]);
        y0 + (y1 - y0) * (phi - x0) / (x1 - x0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// JSON description used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriorDescriptor {
    pub kind: PriorKind,
    pub center: Option<f64>,
    pub sigma: Option<f64>,
}

impl Prior {
    pub fn uniform() -> Self {
        Prior::Uniform
    }

    pub fn gaussian(center: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidWidth(sigma));
        }
        if !(center.is_finite() && center > -PI && center <= PI) {
            return Err(Error::InvalidPrior(format!(
                "center {center} is outside (-pi, pi]"
            )));
        }
        let scale = sigma * SQRT_2;
        let mass = sigma
            * (PI / 2.0).sqrt()
            * (libm::erf((PI - center) / scale) - libm::erf((-PI - center) / scale));
        Ok(Prior::Gaussian(TruncatedGaussian {
            center,
            sigma,
            norm: 1.0 / mass,
        }))
    }

    /// Builds a tabulated prior from `(phi, density)` samples, renormalizing
    /// the piecewise-linear interpolant to unit mass.
    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPrior(
                "a tabulated prior needs at least 2 points".into(),
            ));
        }
        for &(phi, d) in points {
            if !(phi.is_finite() && phi > -PI && phi <= PI) {
                return Err(Error::InvalidPrior(format!(
                    "phi = {phi} is outside (-pi, pi]"
                )));
            }
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::InvalidPrior(format!(
                    "density {d} at phi = {phi} is not a finite non-negative number"
                )));
            }
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidPrior(
                "phi values must be strictly increasing".into(),
            ));
        }
        let mass: f64 = points
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum();
        if mass.is_nan() || mass <= 0.0 {
            return Err(Error::InvalidPrior(
                "tabulated density has zero mass".into(),
            ));
        }
        Ok(Prior::Tabulated(Tabulated {
            phi: points.iter().map(|p| p.0).collect(),
            density: points.iter().map(|p| p.1 / mass).collect(),
        }))
    }

    /// Reads a two-column `phi,density` CSV with a header row.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::PriorFile(e.to_string()))?;
        if headers.len() != 2 || &headers[0] != "phi" || &headers[1] != "density" {
            return Err(Error::PriorFile(format!(
                "expected header `phi,density`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut points = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::PriorFile(e.to_string()))?;
            let parse = |i: usize| -> Result<f64> {
                record[i].parse::<f64>().map_err(|e| {
                    Error::PriorFile(format!("row {}: `{}`: {e}", line + 2, &record[i]))
                })
            };
            points.push((parse(0)?, parse(1)?));
        }
        Prior::tabulated(&points)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::PriorFile(format!("{}: {e}", path.display())))?;
        Prior::from_csv_reader(file)
    }

    pub fn kind(&self) -> PriorKind {
        match self {
            Prior::Uniform => PriorKind::Uniform,
            Prior::Gaussian(_) => PriorKind::Gaussian,
            Prior::Tabulated(_) => PriorKind::Tabulated,
        }
    }

    pub fn descriptor(&self) -> PriorDescriptor {
        match self {
            Prior::Gaussian(g) => PriorDescriptor {
                kind: PriorKind::Gaussian,
                center: Some(g.center),
                sigma: Some(g.sigma),
            },
            other => PriorDescriptor {
                kind: other.kind(),
                center: None,
                sigma: None,
            },
        }
    }

    /// `p(phi)`; zero outside `(-pi, pi]`.
    pub fn density(&self, phi: f64) -> f64 {
        if !(phi > -PI && phi <= PI) {
            return 0.0;
        }
        match self {
            Prior::Uniform => 1.0 / (2.0 * PI),
            Prior::Gaussian(g) => {
                let z = (phi - g.center) / g.sigma;
                g.norm * (-0.5 * z * z).exp()
            }
            Prior::Tabulated(t) => t.eval(phi),
        }
    }

    /// Ascending breakpoints covering the support. Integrals against the
    /// prior never straddle a breakpoint, so interpolation kinks and the
    /// effective window of narrow Gaussians are resolved.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Prior::Uniform => vec![-PI, PI],
            Prior::Gaussian(g) => {
                let half = GAUSSIAN_SUPPORT_SIGMAS * g.sigma;
                vec![(g.center - half).max(-PI), (g.center + half).min(PI)]
            }
            Prior::Tabulated(t) => t.phi.clone(),
        }
    }

    /// `integral f(phi) p(phi) dphi`.
    pub fn expectation(
        &self,
        mut f: impl FnMut(f64) -> f64,
        config: &QuadratureConfig,
    ) -> Result<Integral> {
        integrate_on(|x| f(x) * self.density(x), &self.breakpoints(), config)
    }

    /// Mean and central second moment of the density itself (truncation
    /// included), by quadrature.
    pub fn moments(&self) -> Result<Moments> {
        let config = QuadratureConfig::default();
        let mass = self.expectation(|_| 1.0, &config)?.value;
        let mean = self.expectation(|x| x, &config)?.value / mass;
        let variance = self.expectation(|x| (x - mean).powi(2), &config)?.value / mass;
        Ok(Moments { mean, variance })
    }
}
