//! Bayesian phase posteriors, their peaks, and peak-width scaling.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear_optics::{wrap_phase, Interferometer, MzConvention, Outcome, TwoModeState};
use crate::numerics::{
    max_abs_diff, nonlinear_gaussian_fit, power_law_fit, refine, Gaussian, PanelRule,
    QuadratureConfig,
};
use crate::priors::Prior;

pub const DEFAULT_GRID_POINTS: usize = 4096;

/// Uniform grid `phi_j = -pi + (j + 1) 2 pi / n`, covering `(-pi, pi]`.
pub fn phase_grid(points: usize) -> Vec<f64> {
    let h = 2.0 * PI / points as f64;
    (0..points)
        .map(|j| {
            if j + 1 == points {
                PI
            } else {
                -PI + (j + 1) as f64 * h
            }
        })
        .collect()
}

/// Marginal probability of every outcome, `integral P(m|phi) p(phi) dphi`,
/// indexed by `n_c`.
pub fn evidences(
    ifm: &Interferometer,
    prior: &Prior,
    config: &QuadratureConfig,
) -> Result<Vec<f64>> {
    let rule = PanelRule::new(config)?;
    let run = refine(
        &rule,
        &prior.breakpoints(),
        |nodes| {
            let mut acc = vec![0.0; ifm.photons() as usize + 1];
            for node in nodes {
                let weight = node.w * prior.density(node.x);
                for (a, p) in acc.iter_mut().zip(ifm.probabilities(node.x)) {
                    *a += weight * p;
                }
            }
            Ok(acc)
        },
        |a, b| max_abs_diff(a, b),
    )?;
    if !run.converged {
        return Err(Error::NotConverged {
            best: run.best.iter().sum(),
            estimate: run.error_estimate,
        });
    }
    Ok(run.best)
}

/// Marginal probability of a single outcome under the default convention.
pub fn evidence(state: &TwoModeState, outcome: Outcome, prior: &Prior) -> Result<f64> {
    state.check_outcome(outcome)?;
    let ifm = Interferometer::new(state, &MzConvention::default());
    Ok(evidences(&ifm, prior, &QuadratureConfig::default())?[outcome.n_c as usize])
}

/// Tabulated `p(phi | m)` on a uniform periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDensity {
    pub outcome: Outcome,
    pub prior: Prior,
    pub phi: Vec<f64>,
    pub density: Vec<f64>,
    pub evidence: f64,
}

impl PosteriorDensity {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.phi.iter().copied().zip(self.density.iter().copied())
    }

    /// Periodic trapezoidal integral over the grid.
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * 2.0 * PI / self.len() as f64
    }
}

pub fn posterior(
    state: &TwoModeState,
    outcome: Outcome,
    prior: &Prior,
    grid_points: usize,
) -> Result<PosteriorDensity> {
    posterior_with(
        &Interferometer::new(state, &MzConvention::default()),
        outcome,
        prior,
        grid_points,
        &QuadratureConfig::default(),
    )
}

/// Bayes' rule on the grid; outcomes that cannot occur are rejected.
pub fn posterior_with(
    ifm: &Interferometer,
    outcome: Outcome,
    prior: &Prior,
    grid_points: usize,
    config: &QuadratureConfig,
) -> Result<PosteriorDensity> {
    if outcome.total() != ifm.photons() {
        return Err(Error::OutcomeMismatch {
            n_c: outcome.n_c,
            n_d: outcome.n_d,
            photons: ifm.photons(),
        });
    }
    if grid_points < 2 {
        return Err(Error::InvalidData(format!(
            "grid needs at least 2 points, got {grid_points}"
        )));
    }
    let index = outcome.n_c as usize;
    let evidence = evidences(ifm, prior, config)?[index];
    if ifm.is_null(index) || evidence.is_nan() || evidence <= 0.0 {
        return Err(Error::ImpossibleOutcome {
            n_c: outcome.n_c,
            n_d: outcome.n_d,
        });
    }
    let phi = phase_grid(grid_points);
    let density = phi
        .iter()
        .map(|&x| ifm.probabilities(x)[index] * prior.density(x) / evidence)
        .collect();
    Ok(PosteriorDensity {
        outcome,
        prior: prior.clone(),
        phi,
        density,
        evidence,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub center: f64,
    pub height: f64,
}

/// Relative height below which two samples count as level.
const LEVEL_TOL: f64 = 1e-9;

/// Strict local maxima of a periodic sequence, ordered by phi. Level runs
/// (within a relative `1e-9` of the maximum) count once, at their midpoint.
pub fn find_peaks(density: &PosteriorDensity) -> Vec<Peak> {
    periodic_peaks(&density.phi, &density.density)
}

pub fn periodic_peaks(phi: &[f64], y: &[f64]) -> Vec<Peak> {
    let n = y.len();
    if n < 3 {
        return Vec::new();
    }
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let tol = LEVEL_TOL * hi.abs().max(lo.abs());
    if hi - lo <= tol {
        return Vec::new();
    }
    // Walk once around the circle starting from the global minimum so that no
    // peak straddles the starting point.
    let start = y
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v < y[best] { i } else { best });
    let h = 2.0 * PI / n as f64;
    let at = |offset: usize| y[(start + offset) % n];

    let mut peaks = Vec::new();
    let mut rising = false;
    let (mut top, mut run_start, mut run_end) = (0.0, 0, 0);
    let mut bottom = at(0);
    for offset in 1..=n {
        let v = at(offset);
        if rising {
            if v > top + tol {
                top = v;
                run_start = offset;
                run_end = offset;
            } else if v >= top - tol {
                top = top.max(v);
                run_end = offset;
            } else {
                let mid = 0.5 * (run_start + run_end) as f64;
                let index = (start as f64 + mid) % n as f64;
                let center = wrap_phase(phi[0] + index * h);
                peaks.push(Peak {
                    center,
                    height: top,
                });
                rising = false;
                bottom = v;
            }
        } else if v < bottom {
            bottom = v;
        } else if v > bottom + tol {
            rising = true;
            top = v;
            run_start = offset;
            run_end = offset;
        }
    }
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    peaks
}

/// Gaussian fitted to one posterior peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakFit {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
    pub residual: f64,
}

/// Least-squares Gaussian over the contiguous half-maximum window around the
/// peak nearest `peak_center`.
pub fn gaussian_peak_fit(density: &PosteriorDensity, peak_center: f64) -> Result<PeakFit> {
    let y = &density.density;
    let n = y.len();
    if n < 5 {
        return Err(Error::InsufficientResolution {
            points: n,
            required: 5,
        });
    }
    let h = 2.0 * PI / n as f64;
    let circ = |a: f64, b: f64| wrap_phase(a - b).abs();
    let mut top = (0..n)
        .min_by(|&i, &j| {
            circ(density.phi[i], peak_center).total_cmp(&circ(density.phi[j], peak_center))
        })
        .unwrap();
    // Settle on the local maximum in case the hint is a grid cell off.
    loop {
        let (l, r) = ((top + n - 1) % n, (top + 1) % n);
        let next = if y[l] > y[top] && y[l] >= y[r] {
            l
        } else if y[r] > y[top] {
            r
        } else {
            break;
        };
        top = next;
    }
    let half = 0.5 * y[top];
    let mut left = 0usize;
    while left + 1 < n && y[(top + n - left - 1) % n] >= half {
        left += 1;
    }
    let mut right = 0usize;
    while right + left + 1 < n && y[(top + right + 1) % n] >= half {
        right += 1;
    }
    let points: Vec<(f64, f64)> = (0..=left + right)
        .map(|k| {
            let offset = k as isize - left as isize;
            let idx = (top as isize + offset).rem_euclid(n as isize) as usize;
            (density.phi[top] + offset as f64 * h, y[idx])
        })
        .collect();
    if points.len() < 5 {
        return Err(Error::InsufficientResolution {
            points: points.len(),
            required: 5,
        });
    }
    let fwhm = (left + right + 1) as f64 * h;
    let init = Gaussian {
        amplitude: y[top],
        center: density.phi[top],
        width: (fwhm / (2.0 * (2.0 * 2f64.ln()).sqrt())).max(h),
    };
    let fit = nonlinear_gaussian_fit(&points, init)?;
    Ok(PeakFit {
        center: wrap_phase(fit.params.center),
        width: fit.params.width,
        amplitude: fit.params.amplitude,
        residual: fit.rms_residual,
    })
}

/// `width = prefactor / N^exponent` fitted in log-log coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub prefactor: f64,
    pub exponent: f64,
    pub widths: Vec<(u32, f64)>,
    /// Fewer than three points: the fit is exact and says nothing about
    /// goodness of fit.
    pub underdetermined: bool,
}

pub fn scaling_fit(widths: &[(u32, f64)]) -> Result<ScalingFit> {
    if let Some((n, w)) = widths.iter().find(|(_, w)| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidData(format!(
            "width {w} for N = {n} is not positive"
        )));
    }
    let points: Vec<(f64, f64)> = widths.iter().map(|&(n, w)| (n as f64, w)).collect();
    let law = power_law_fit(&points)?;
    Ok(ScalingFit {
        prefactor: law.prefactor,
        exponent: law.exponent,
        widths: widths.to_vec(),
        underdetermined: widths.len() < 3,
    })
}

/// Which posterior peak a width is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakChoice {
    Highest,
    /// Position in the phi-ordered peak list.
    Index(usize),
}

/// Fitted width of one peak of the uniform-prior posterior for `outcome`.
pub fn peak_width(
    state: &TwoModeState,
    outcome: Outcome,
    choice: PeakChoice,
    grid_points: usize,
) -> Result<PeakFit> {
    let post = posterior(state, outcome, &Prior::uniform(), grid_points)?;
    let peaks = find_peaks(&post);
    let peak = match choice {
        PeakChoice::Highest => peaks.iter().max_by(|a, b| a.height.total_cmp(&b.height)),
        PeakChoice::Index(i) => peaks.get(i),
    }
    .ok_or_else(|| Error::InvalidData(format!("posterior for {outcome} has no peak {choice:?}")))?;
    gaussian_peak_fit(&post, peak.center)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_optics::{fock_input, noon_input};

    #[test]
    fn grid_is_half_open() {
        let g = phase_grid(8);
        assert_eq!(g.len(), 8);
        assert_eq!(*g.last().unwrap(), PI);
        assert!(g[0] > -PI);
        assert!(g.contains(&0.0));
    }

    #[test]
    fn one_photon_evidence_is_half() {
        let e = evidence(
            &fock_input(1).unwrap(),
            Outcome::new(1, 0),
            &Prior::uniform(),
        )
        .unwrap();
        assert!((e - 0.5).abs() < 1e-14);
    }

    #[test]
    fn two_photon_evidences() {
        let s = fock_input(2).unwrap();
        let u = Prior::uniform();
        assert!((evidence(&s, Outcome::new(1, 1), &u).unwrap() - 0.25).abs() < 1e-14);
        assert!((evidence(&s, Outcome::new(2, 0), &u).unwrap() - 0.375).abs() < 1e-14);
        assert!((evidence(&s, Outcome::new(0, 2), &u).unwrap() - 0.375).abs() < 1e-14);
    }

    #[test]
    fn mismatched_outcome() {
        let err = evidence(
            &fock_input(2).unwrap(),
            Outcome::new(2, 1),
            &Prior::uniform(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::OutcomeMismatch {
                n_c: 2,
                n_d: 1,
                photons: 2
            }
        ));
    }

    #[test]
    fn zero_probability_outcome_is_rejected() {
        let err = posterior(
            &noon_input(2).unwrap(),
            Outcome::new(1, 1),
            &Prior::uniform(),
            512,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ImpossibleOutcome { n_c: 1, n_d: 1 }));
    }

    #[test]
    fn flat_likelihood_gives_flat_posterior() {
        let post = posterior(
            &noon_input(2).unwrap(),
            Outcome::new(2, 0),
            &Prior::uniform(),
            1024,
        )
        .unwrap();
        for d in &post.density {
            assert!((d - 1.0 / (2.0 * PI)).abs() < 1e-12);
        }
        assert!(find_peaks(&post).is_empty());
    }

    #[test]
    fn peaks_on_synthetic_sequences() {
        let phi = phase_grid(600);
        // Three bumps, one straddling the +-pi seam.
        let y: Vec<f64> = phi.iter().map(|x| (3.0 * x).cos() + 1.5).collect();
        let peaks = periodic_peaks(&phi, &y);
        assert_eq!(peaks.len(), 3);
        let centers: Vec<f64> = peaks.iter().map(|p| p.center).collect();
        for target in [-2.0 * PI / 3.0, 0.0, 2.0 * PI / 3.0] {
            assert!(
                centers.iter().any(|c| (c - target).abs() < 2e-2),
                "{centers:?}"
            );
        }
        let y: Vec<f64> = phi.iter().map(|x| (x - PI).cos()).collect();
        let peaks = periodic_peaks(&phi, &y);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].center.abs() - PI).abs() < 1e-9);
    }

    #[test]
    fn plateau_reports_midpoint() {
        let phi = phase_grid(10);
        let y = [0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let peaks = periodic_peaks(&phi, &y);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].center - phi[3]).abs() < 1e-12);
        assert_eq!(peaks[0].height, 2.0);
    }

    #[test]
    fn self_fit_of_narrow_gaussian() {
        let sigma = 0.2;
        let phi = phase_grid(4096);
        let raw: Vec<f64> = phi
            .iter()
            .map(|x| (-(x - 0.4).powi(2) / (2.0 * sigma * sigma)).exp())
            .collect();
        let z: f64 = raw.iter().sum::<f64>() * 2.0 * PI / 4096.0;
        let post = PosteriorDensity {
            outcome: Outcome::new(0, 1),
            prior: Prior::uniform(),
            density: raw.iter().map(|v| v / z).collect(),
            phi,
            evidence: 1.0,
        };
        let fit = gaussian_peak_fit(&post, 0.4).unwrap();
        assert!((fit.width - sigma).abs() < 1e-3);
        assert!((fit.center - 0.4).abs() < 1e-6);
    }

    #[test]
    fn coarse_grid_is_insufficient() {
        let post = posterior(
            &fock_input(40).unwrap(),
            Outcome::new(0, 40),
            &Prior::uniform(),
            32,
        )
        .unwrap();
        let err = gaussian_peak_fit(&post, 0.0).unwrap_err();
        assert!(
            matches!(err, Error::InsufficientResolution { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn synthetic_power_law() {
        let widths: Vec<(u32, f64)> = (1..=10).map(|n| (n, 2.0 / (n as f64).sqrt())).collect();
        let fit = scaling_fit(&widths).unwrap();
        assert!((fit.prefactor - 2.0).abs() < 1e-10);
        assert!((fit.exponent - 0.5).abs() < 1e-10);
        assert!(!fit.underdetermined);
        assert!(scaling_fit(&[(1, 1.0), (2, 0.0), (3, 0.5)]).is_err());
        assert!(scaling_fit(&[(1, 1.0), (4, 0.5)]).unwrap().underdetermined);
    }
}
