//! Mutual information between the phase and the photon-count outcome.
//!
//! `H = sum_m integral P(m|phi) p(phi) log2[P(m|phi) / P(m)] dphi`, where the
//! evidence `P(m)` is integrated on the same node set first. The narrow-prior
//! expansion about the prior mean and the classical Fisher information are
//! provided alongside as cross-checks.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear_optics::{check_phase, Interferometer, MzConvention, Outcome, TwoModeState};
use crate::numerics::{refine, Node, PanelRule, QuadratureConfig};
use crate::priors::Prior;

/// Raw results this far below zero are quadrature round-off and reported as 0.
const CLAMP_TOL: f64 = 1e-10;
/// `P(m|phi0)` below this is treated as a zero of the likelihood.
const DEGENERATE_PROB: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeBits {
    pub outcome: Outcome,
    pub bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityResult {
    pub bits: f64,
    /// Unclamped sum of `per_outcome`.
    pub raw_bits: f64,
    pub per_outcome: Vec<OutcomeBits>,
    pub quad_error: f64,
    pub config: QuadratureConfig,
}

#[derive(Debug, Clone)]
struct Level {
    per_outcome: Vec<f64>,
    total: f64,
}

fn evaluate_level(ifm: &Interferometer, prior: &Prior, nodes: &[Node]) -> Level {
    let outcomes = ifm.photons() as usize + 1;
    let mut weights = Vec::with_capacity(nodes.len());
    let mut probs = Vec::with_capacity(nodes.len() * outcomes);
    let mut evidence = vec![0.0; outcomes];
    for node in nodes {
        let w = node.w * prior.density(node.x);
        let p = ifm.probabilities(node.x);
        for (e, pm) in evidence.iter_mut().zip(&p) {
            *e += w * pm;
        }
        weights.push(w);
        probs.extend(p);
    }
    let mut per_outcome = vec![0.0; outcomes];
    for (j, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let row = &probs[j * outcomes..(j + 1) * outcomes];
        for (m, pm) in row.iter().enumerate() {
            if *pm > 0.0 && evidence[m] > 0.0 {
                per_outcome[m] += w * pm * (pm / evidence[m]).log2();
            }
        }
    }
    let total = per_outcome.iter().sum();
    Level { per_outcome, total }
}

/// Mutual information of `state` under `prior`, in bits, with the default
/// interferometer convention.
pub fn mutual_information(
    state: &TwoModeState,
    prior: &Prior,
    quad: &QuadratureConfig,
) -> Result<FidelityResult> {
    mutual_information_with(
        &Interferometer::new(state, &MzConvention::default()),
        prior,
        quad,
    )
}

pub fn mutual_information_with(
    ifm: &Interferometer,
    prior: &Prior,
    quad: &QuadratureConfig,
) -> Result<FidelityResult> {
    let rule = PanelRule::new(quad)?;
    let run = refine(
        &rule,
        &prior.breakpoints(),
        |nodes| Ok(evaluate_level(ifm, prior, nodes)),
        |a, b| (a.total - b.total).abs(),
    )?;
    let raw_bits = run.best.total;
    let bits = if (-CLAMP_TOL..0.0).contains(&raw_bits) {
        0.0
    } else {
        raw_bits
    };
    if !run.converged {
        return Err(Error::NotConverged {
            best: bits,
            estimate: run.error_estimate,
        });
    }
    let per_outcome = Outcome::all(ifm.photons())
        .zip(run.best.per_outcome)
        .map(|(outcome, bits)| OutcomeBits { outcome, bits })
        .collect();
    Ok(FidelityResult {
        bits,
        raw_bits,
        per_outcome,
        quad_error: run.error_estimate,
        config: *quad,
    })
}

/// Why an outcome's `P'^2 / P` term was not evaluated directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Degeneracy {
    /// `P(m|phi0) = 0` at an isolated zero; the term is its limit along phi.
    Limit,
    /// `P(m|phi) = 0` for every phi; the term is dropped.
    IdenticallyZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkippedOutcome {
    pub outcome: Outcome,
    pub reason: Degeneracy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxFidelityResult {
    pub bits: f64,
    pub skipped_outcomes: Vec<SkippedOutcome>,
    pub phi0: f64,
    pub sigma2: f64,
}

/// Second-order expansion of the mutual information for a prior sharply
/// concentrated about its mean `phi0`:
/// `sigma^2 / (2 ln 2) * sum_m [P''(m)(1 - ln 2) + P'(m)^2 / P(m)]`.
///
/// `phi0` and `sigma^2` are the prior's own (truncated) moments.
pub fn narrow_prior_approx(state: &TwoModeState, prior: &Prior) -> Result<ApproxFidelityResult> {
    narrow_prior_approx_with(&Interferometer::new(state, &MzConvention::default()), prior)
}

pub fn narrow_prior_approx_with(
    ifm: &Interferometer,
    prior: &Prior,
) -> Result<ApproxFidelityResult> {
    let moments = prior.moments()?;
    let phi0 = moments.mean;
    let derivs = ifm.derivatives(phi0);
    let probs = ifm.probabilities(phi0);
    if probs.iter().all(|p| *p < DEGENERATE_PROB) {
        return Err(Error::UndefinedApproximation { phi0 });
    }
    let mut skipped = Vec::new();
    let mut sum = 0.0;
    for (m, outcome) in Outcome::all(ifm.photons()).enumerate() {
        match ifm.score_term(m, phi0, DEGENERATE_PROB) {
            None => skipped.push(SkippedOutcome {
                outcome,
                reason: Degeneracy::IdenticallyZero,
            }),
            Some(term) => {
                if term.by_limit {
                    skipped.push(SkippedOutcome {
                        outcome,
                        reason: Degeneracy::Limit,
                    });
                }
                sum += derivs.second[m] * (1.0 - LN_2) + term.value;
            }
        }
    }
    Ok(ApproxFidelityResult {
        bits: moments.variance / (2.0 * LN_2) * sum,
        skipped_outcomes: skipped,
        phi0,
        sigma2: moments.variance,
    })
}

/// Narrow-prior limit `sigma^2 N / (2 ln 2)`.
pub fn asymptotic_fidelity(photons: u32, sigma2: f64) -> Result<f64> {
    if photons < 1 {
        return Err(Error::InvalidPhotonNumber(photons));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidData(format!(
            "variance must be positive, got {sigma2}"
        )));
    }
    Ok(sigma2 * photons as f64 / (2.0 * LN_2))
}

/// Classical Fisher information `sum_m P'(m|phi)^2 / P(m|phi)` of photon
/// counting, with isolated zeros of `P` resolved by their limit.
pub fn fisher_information(state: &TwoModeState, phase: f64) -> Result<f64> {
    check_phase(phase)?;
    Ok(fisher_information_with(
        &Interferometer::new(state, &MzConvention::default()),
        phase,
    ))
}

pub fn fisher_information_with(ifm: &Interferometer, phase: f64) -> f64 {
    (0..=ifm.photons() as usize)
        .filter_map(|m| ifm.score_term(m, phase, DEGENERATE_PROB))
        .map(|t| t.value)
        .sum()
}
