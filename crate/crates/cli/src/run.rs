use std::path::Path;

use mzfid::fidelity::{
    asymptotic_fidelity, fisher_information, mutual_information, narrow_prior_approx, OutcomeBits,
    SkippedOutcome,
};
use mzfid::inference::{
    find_peaks, gaussian_peak_fit, peak_width, posterior_with, scaling_fit, Peak, PeakChoice,
    PeakFit,
};
use mzfid::linear_optics::{
    outcome_distribution, Interferometer, MzConvention, Outcome, StateKind, TwoModeState,
};
use mzfid::numerics::{power_law_fit, QuadratureConfig};
use mzfid::priors::PriorDescriptor;
use mzfid::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Command, Format, OutcomePolicy, StateArg};
use crate::output::{csv, emit, json, num, Table};
use crate::CliError;

const REFERENCE_PREFACTOR: f64 = 0.897;
const REFERENCE_EXPONENT: f64 = 0.477;

#[derive(Serialize)]
struct StateInfo {
    kind: StateKind,
    photons: u32,
}

impl From<&TwoModeState> for StateInfo {
    fn from(s: &TwoModeState) -> Self {
        Self {
            kind: s.kind(),
            photons: s.photons(),
        }
    }
}

#[derive(Serialize)]
struct ProbRow {
    n_c: u32,
    n_d: u32,
    p: f64,
}

#[derive(Serialize)]
struct ProbsReport {
    state: StateInfo,
    phase: f64,
    probs: Vec<ProbRow>,
}

#[derive(Serialize)]
struct PosteriorData<'a> {
    outcome: Outcome,
    prior: PriorDescriptor,
    evidence: f64,
    phi: &'a [f64],
    density: &'a [f64],
}

#[derive(Serialize)]
struct PeakReport {
    outcome: Outcome,
    evidence: f64,
    peaks: Vec<Peak>,
    fit: Option<PeakFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_error: Option<String>,
}

#[derive(Serialize)]
struct FidelityReport {
    state: StateInfo,
    prior: PriorDescriptor,
    bits: f64,
    quad_error: f64,
    converged: bool,
    per_outcome: Vec<OutcomeBits>,
    config: QuadratureConfig,
}

#[derive(Serialize)]
struct ApproxReport {
    state: StateInfo,
    prior: PriorDescriptor,
    bits: f64,
    asymptote: f64,
    phi0: f64,
    sigma2: f64,
    skipped_outcomes: Vec<SkippedOutcome>,
}

#[derive(Serialize)]
struct SweepRow {
    #[serde(rename = "N")]
    photons: u32,
    state: StateKind,
    #[serde(rename = "H_bits")]
    bits: f64,
    quad_error: f64,
    converged: bool,
}

#[derive(Serialize)]
struct Reference {
    a: f64,
    b: f64,
}

#[derive(Serialize)]
struct Excluded {
    #[serde(rename = "N")]
    photons: u32,
    error: String,
}

#[derive(Serialize)]
struct ScalingReport {
    a: f64,
    b: f64,
    widths: Vec<(u32, f64)>,
    reference: Reference,
    outcome_policy: &'static str,
    excluded: Vec<Excluded>,
    underdetermined: bool,
    self_test: bool,
}

#[derive(Serialize)]
struct FisherReport {
    state: StateInfo,
    phase: f64,
    fisher: f64,
}

fn warn(msg: impl std::fmt::Display) {
    eprintln!("warning: {msg}");
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Probs { common, phase } => {
            let state = common.single_state()?;
            let dist = outcome_distribution(&state, phase, &MzConvention::default())?;
            let text = match common.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut t = Table::new(&["n_c", "n_d", "P"]);
                    for (m, p) in dist.iter() {
                        t.row(vec![m.n_c.to_string(), m.n_d.to_string(), num(p)]);
                    }
                    csv(&t)
                }
                Format::Json => json(&ProbsReport {
                    state: (&state).into(),
                    phase,
                    probs: dist
                        .iter()
                        .map(|(m, p)| ProbRow {
                            n_c: m.n_c,
                            n_d: m.n_d,
                            p,
                        })
                        .collect(),
                }),
            };
            emit(&text, common.out.as_deref())
        }
        Command::Posterior {
            common,
            prior,
            quad,
            outcome,
            grid,
            peaks,
            peak_index,
        } => {
            let state = common.single_state()?;
            let prior = prior.prior.build()?;
            let ifm = Interferometer::new(&state, &MzConvention::default());
            let post = posterior_with(&ifm, outcome.0, &prior, grid, &quad.config()?)?;
            let data = match common.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut t = Table::new(&["phi", "density"]);
                    for (x, d) in post.points() {
                        t.row(vec![num(x), num(d)]);
                    }
                    csv(&t)
                }
                Format::Json => json(&PosteriorData {
                    outcome: post.outcome,
                    prior: post.prior.descriptor(),
                    evidence: post.evidence,
                    phi: &post.phi,
                    density: &post.density,
                }),
            };
            if !peaks {
                return emit(&data, common.out.as_deref());
            }
            if let Some(path) = common.out.as_deref() {
                emit(&data, Some(path))?;
            }
            let found = find_peaks(&post);
            let target = match peak_index {
                Some(i) => Some(found.get(i).ok_or_else(|| {
                    CliError::Usage(format!(
                        "--peak-index {i}: only {} peaks found",
                        found.len()
                    ))
                })?),
                None => found.iter().max_by(|a, b| a.height.total_cmp(&b.height)),
            };
            let (fit, fit_error) = match target.map(|p| gaussian_peak_fit(&post, p.center)) {
                Some(Ok(f)) => (Some(f), None),
                Some(Err(e)) => (None, Some(e.to_string())),
                None => (None, None),
            };
            let report = PeakReport {
                outcome: post.outcome,
                evidence: post.evidence,
                peaks: found,
                fit,
                fit_error,
            };
            emit(&json(&report), None)
        }
        Command::Fidelity {
            common,
            prior,
            quad,
        } => {
            let state = common.single_state()?;
            let prior = prior.prior.build()?;
            let cfg = quad.config()?;
            let (report, failure) = match mutual_information(&state, &prior, &cfg) {
                Ok(h) => (
                    FidelityReport {
                        state: (&state).into(),
                        prior: prior.descriptor(),
                        bits: h.bits,
                        quad_error: h.quad_error,
                        converged: true,
                        per_outcome: h.per_outcome,
                        config: cfg,
                    },
                    None,
                ),
                Err(e @ Error::NotConverged { best, estimate }) => (
                    FidelityReport {
                        state: (&state).into(),
                        prior: prior.descriptor(),
                        bits: best,
                        quad_error: estimate,
                        converged: false,
                        per_outcome: Vec::new(),
                        config: cfg,
                    },
                    Some(e),
                ),
                Err(e) => return Err(e.into()),
            };
            let text = match common.format.unwrap_or(Format::Json) {
                Format::Json => json(&report),
                Format::Csv => {
                    let mut t = Table::new(&["state", "N", "H_bits", "quad_error", "converged"]);
                    t.row(vec![
                        report.state.kind.to_string(),
                        report.state.photons.to_string(),
                        num(report.bits),
                        num(report.quad_error),
                        report.converged.to_string(),
                    ]);
                    csv(&t)
                }
            };
            emit(&text, common.out.as_deref())?;
            failure.map_or(Ok(()), |e| Err(e.into()))
        }
        Command::Approx { common, prior } => {
            let state = common.single_state()?;
            let prior = prior.prior.build()?;
            let approx = narrow_prior_approx(&state, &prior)?;
            let report = ApproxReport {
                state: (&state).into(),
                prior: prior.descriptor(),
                bits: approx.bits,
                asymptote: asymptotic_fidelity(state.photons(), approx.sigma2)?,
                phi0: approx.phi0,
                sigma2: approx.sigma2,
                skipped_outcomes: approx.skipped_outcomes,
            };
            for s in &report.skipped_outcomes {
                warn(format_args!(
                    "outcome {} has P = 0 at phi0 ({:?})",
                    s.outcome, s.reason
                ));
            }
            let text = match common.format.unwrap_or(Format::Json) {
                Format::Json => json(&report),
                Format::Csv => {
                    let mut t = Table::new(&["bits", "asymptote", "phi0", "sigma2"]);
                    t.row(vec![
                        num(report.bits),
                        num(report.asymptote),
                        num(report.phi0),
                        num(report.sigma2),
                    ]);
                    csv(&t)
                }
            };
            emit(&text, common.out.as_deref())
        }
        Command::Sweep {
            common,
            prior,
            quad,
        } => {
            let range = common.photons()?;
            let prior = prior.prior.build()?;
            let cfg = quad.config()?;
            let kinds = match common.state {
                Some(k) => vec![k],
                None => vec![StateArg::Fock, StateArg::Noon],
            };
            let jobs: Vec<(u32, StateArg)> = range
                .iter()
                .flat_map(|n| kinds.iter().map(move |k| (n, *k)))
                .collect();
            let results: Vec<(u32, StateArg, Result<SweepRow, Error>)> = jobs
                .par_iter()
                .map(|&(n, kind)| {
                    let row = kind
                        .build(n)
                        .map_err(|e| match e {
                            CliError::Lib(e) => e,
                            other => Error::InvalidData(other.to_string()),
                        })
                        .and_then(|s| mutual_information(&s, &prior, &cfg))
                        .map(|h| SweepRow {
                            photons: n,
                            state: kind.kind(),
                            bits: h.bits,
                            quad_error: h.quad_error,
                            converged: true,
                        });
                    (n, kind, row)
                })
                .collect();
            let mut rows = Vec::new();
            let mut worst: Option<CliError> = None;
            for (n, kind, r) in results {
                match r {
                    Ok(row) => rows.push(row),
                    Err(Error::NotConverged { best, estimate }) => {
                        warn(format_args!(
                            "N={n} {}: quadrature did not converge",
                            kind.kind()
                        ));
                        rows.push(SweepRow {
                            photons: n,
                            state: kind.kind(),
                            bits: best,
                            quad_error: estimate,
                            converged: false,
                        });
                        worst.get_or_insert(Error::NotConverged { best, estimate }.into());
                    }
                    Err(e) => {
                        warn(format_args!("N={n} {}: {e}", kind.kind()));
                        rows.push(SweepRow {
                            photons: n,
                            state: kind.kind(),
                            bits: f64::NAN,
                            quad_error: f64::NAN,
                            converged: false,
                        });
                        worst = Some(e.into());
                    }
                }
            }
            let text = match common.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut t = Table::new(&["N", "state", "H_bits", "quad_error"]);
                    for r in &rows {
                        t.row(vec![
                            r.photons.to_string(),
                            r.state.to_string(),
                            num(r.bits),
                            num(r.quad_error),
                        ]);
                    }
                    csv(&t)
                }
                Format::Json => json(&rows),
            };
            emit(&text, common.out.as_deref())?;
            worst.map_or(Ok(()), Err)
        }
        Command::FitScaling {
            common,
            outcome_policy,
            peak_index,
            grid,
            self_test,
        } => {
            let range = match common.photons {
                Some(_) => common.photons()?,
                None => "1..40".parse().map_err(CliError::Usage)?,
            };
            fit_scaling(
                range.iter().collect(),
                outcome_policy,
                peak_index,
                grid,
                self_test,
                common.format,
                common.out.as_deref(),
            )
        }
        Command::Fisher { common, phase } => {
            let state = common.single_state()?;
            let f = fisher_information(&state, phase)?;
            let text = match common.format.unwrap_or(Format::Json) {
                Format::Json => json(&FisherReport {
                    state: (&state).into(),
                    phase,
                    fisher: f,
                }),
                Format::Csv => {
                    let mut t = Table::new(&["phase", "fisher"]);
                    t.row(vec![num(phase), num(f)]);
                    csv(&t)
                }
            };
            emit(&text, common.out.as_deref())
        }
    }
}

fn fit_scaling(
    photons: Vec<u32>,
    policy: OutcomePolicy,
    peak_index: Option<usize>,
    grid: usize,
    self_test: bool,
    format: Option<Format>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let choice = peak_index.map_or(PeakChoice::Highest, PeakChoice::Index);
    let computed: Vec<(u32, Result<f64, Error>)> = photons
        .par_iter()
        .map(|&n| {
            let width = if self_test {
                Ok(REFERENCE_PREFACTOR * (n as f64).powf(-REFERENCE_EXPONENT))
            } else {
                mzfid::fock_input(n)
                    .and_then(|s| peak_width(&s, policy.outcome(n), choice, grid).map(|f| f.width))
            };
            (n, width)
        })
        .collect();
    let mut widths = Vec::new();
    let mut excluded = Vec::new();
    for (n, w) in computed {
        match w {
            Ok(w) => widths.push((n, w)),
            Err(e) => {
                warn(format_args!("N={n}: width fit failed, excluded: {e}"));
                excluded.push(Excluded {
                    photons: n,
                    error: e.to_string(),
                });
            }
        }
    }
    if widths.len() < 3 {
        warn(format_args!(
            "{} points under-determine the fit; no goodness-of-fit information",
            widths.len()
        ));
    }
    let fit = scaling_fit(&widths)?;
    if self_test {
        let law = power_law_fit(
            &widths
                .iter()
                .map(|&(n, w)| (n as f64, w))
                .collect::<Vec<_>>(),
        )?;
        if (law.prefactor - REFERENCE_PREFACTOR).abs() > 1e-10
            || (law.exponent - REFERENCE_EXPONENT).abs() > 1e-10
        {
            return Err(CliError::SelfTest(format!(
                "recovered ({}, {}) instead of ({REFERENCE_PREFACTOR}, {REFERENCE_EXPONENT})",
                law.prefactor, law.exponent
            )));
        }
    }
    eprintln!(
        "fit: a = {:.4}, b = {:.4}; reference: a = {REFERENCE_PREFACTOR}, b = {REFERENCE_EXPONENT}",
        fit.prefactor, fit.exponent
    );
    let report = ScalingReport {
        a: fit.prefactor,
        b: fit.exponent,
        widths: fit.widths,
        reference: Reference {
            a: REFERENCE_PREFACTOR,
            b: REFERENCE_EXPONENT,
        },
        outcome_policy: match policy {
            OutcomePolicy::AllD => "all-d",
            OutcomePolicy::AllC => "all-c",
            OutcomePolicy::Split => "split",
        },
        excluded,
        underdetermined: fit.underdetermined,
        self_test,
    };
    let text = match format.unwrap_or(Format::Json) {
        Format::Json => json(&report),
        Format::Csv => {
            let mut t = Table::new(&["N", "width"]);
            for (n, w) in &report.widths {
                t.row(vec![n.to_string(), num(*w)]);
            }
            csv(&t)
        }
    };
    emit(&text, out)
}
