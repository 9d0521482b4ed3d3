//! Two-mode Fock-space model of a lossless Mach-Zehnder interferometer.
//!
//! Basis index `k` of an `N`-photon vector means `k` photons in the first mode
//! (input port a, output port c under the default convention) and `N - k` in
//! the second. The interferometer is splitter, phase shifter, splitter; its
//! Fock-space action is built from the exact eigen-decomposition of the
//! splitter generator `a'b + b'a`, whose spectrum is `-N, -N + 2, ..., N`.

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const NORM_TOL: f64 = 1e-12;
/// Coefficient magnitude below which an outcome amplitude is treated as
/// identically zero in phi.
const NULL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Fock,
    Noon,
    Custom,
}

impl std::fmt::Display for StateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StateKind::Fock => "fock",
            StateKind::Noon => "noon",
            StateKind::Custom => "custom",
        })
    }
}

/// Pure input state of definite total photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    kind: StateKind,
    total_photons: u32,
    amplitudes: Vec<C64>,
}

impl TwoModeState {
    /// Arbitrary normalized amplitudes over `|k, N-k>`, `k = 0..=N`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidPhotonNumber(
                amplitudes.len().saturating_sub(1) as u32,
            ));
        }
        if amplitudes
            .iter()
            .any(|a| !(a.re.is_finite() && a.im.is_finite()))
        {
            return Err(Error::InvalidState("amplitudes must be finite".into()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "squared norm is {norm}, expected 1"
            )));
        }
        Ok(Self {
            kind: StateKind::Custom,
            total_photons: (amplitudes.len() - 1) as u32,
            amplitudes,
        })
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn photons(&self) -> u32 {
        self.total_photons
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn outcomes(&self) -> impl Iterator<Item = Outcome> {
        Outcome::all(self.total_photons)
    }

    pub fn check_outcome(&self, outcome: Outcome) -> Result<()> {
        if outcome.total() != self.total_photons {
            return Err(Error::OutcomeMismatch {
                n_c: outcome.n_c,
                n_d: outcome.n_d,
                photons: self.total_photons,
            });
        }
        Ok(())
    }
}

/// `|N, 0>`: every photon enters port a.
pub fn fock_input(photons: u32) -> Result<TwoModeState> {
    if photons < 1 {
        return Err(Error::InvalidPhotonNumber(photons));
    }
    let mut amplitudes = vec![C64::new(0.0, 0.0); photons as usize + 1];
    amplitudes[photons as usize] = C64::new(1.0, 0.0);
    Ok(TwoModeState {
        kind: StateKind::Fock,
        total_photons: photons,
        amplitudes,
    })
}

/// `(|N, 0> + |0, N>) / sqrt(2)`.
pub fn noon_input(photons: u32) -> Result<TwoModeState> {
    if photons < 1 {
        return Err(Error::InvalidPhotonNumber(photons));
    }
    let w = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amplitudes = vec![C64::new(0.0, 0.0); photons as usize + 1];
    amplitudes[0] = w;
    amplitudes[photons as usize] = w;
    Ok(TwoModeState {
        kind: StateKind::Noon,
        total_photons: photons,
        amplitudes,
    })
}

/// Photon counts `(n_c, n_d)` in the two output ports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Outcome {
    pub n_c: u32,
    pub n_d: u32,
}

impl Outcome {
    pub fn new(n_c: u32, n_d: u32) -> Self {
        Self { n_c, n_d }
    }

    pub fn total(&self) -> u32 {
        self.n_c + self.n_d
    }

    /// All `N + 1` outcomes ordered by `n_c`.
    pub fn all(photons: u32) -> impl Iterator<Item = Outcome> {
        (0..=photons).map(move |n_c| Outcome::new(n_c, photons - n_c))
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.n_c, self.n_d)
    }
}

/// `P(n_c, n_d | phi)`, indexed by `n_c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub total_photons: u32,
    pub phase: f64,
    pub probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn prob(&self, outcome: Outcome) -> f64 {
        debug_assert_eq!(outcome.total(), self.total_photons);
        self.probs[outcome.n_c as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, f64)> + '_ {
        Outcome::all(self.total_photons).zip(self.probs.iter().copied())
    }
}

/// One of the two modes of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    First,
    Second,
}

/// Physical labelling of the interferometer.
///
/// The splitter is `[[cos t, i sin t], [i sin t, cos t]]` with mixing angle
/// `t`; `phase_arm` carries `exp(i * phase_sign * phi)`; `c_port` is the output
/// mode counted as `n_c`. The default reproduces the textbook one- and
/// two-photon closed forms (`P(1,0) = sin^2(phi/2)` for `|1,0>`, and
/// `[cos(phi/2) - sin(phi/2)]^2 / 2` for the one-photon N00N state).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MzConvention {
    pub mixing_angle: f64,
    pub phase_arm: Arm,
    pub phase_sign: f64,
    pub c_port: Arm,
}

impl Default for MzConvention {
    fn default() -> Self {
        Self {
            mixing_angle: FRAC_PI_4,
            phase_arm: Arm::Second,
            phase_sign: 1.0,
            c_port: Arm::First,
        }
    }
}

impl MzConvention {
    /// Single-photon 2x2 splitter matrix acting on mode amplitudes.
    pub fn splitter_matrix(&self) -> Matrix2<C64> {
        let (s, c) = self.mixing_angle.sin_cos();
        Matrix2::new(
            C64::new(c, 0.0),
            C64::new(0.0, s),
            C64::new(0.0, s),
            C64::new(c, 0.0),
        )
    }

    fn arm_photons(&self, photons: u32, k: usize) -> f64 {
        match self.phase_arm {
            Arm::First => k as f64,
            Arm::Second => (photons as usize - k) as f64,
        }
    }

    fn output_index(&self, photons: u32, mode_one_count: usize) -> usize {
        match self.c_port {
            Arm::First => mode_one_count,
            Arm::Second => photons as usize - mode_one_count,
        }
    }
}

/// Hermitian generator `a'b + b'a` on the `N`-photon space (real tridiagonal).
pub fn splitter_generator(photons: u32) -> DMatrix<f64> {
    let n = photons as usize;
    let mut g = DMatrix::zeros(n + 1, n + 1);
    for k in 0..n {
        let v = (((k + 1) * (n - k)) as f64).sqrt();
        g[(k + 1, k)] = v;
        g[(k, k + 1)] = v;
    }
    g
}

/// Fock-space representation of the splitter, `exp(i t (a'b + b'a))`.
pub fn splitter_fock(photons: u32, mixing_angle: f64) -> DMatrix<C64> {
    let n = photons as usize;
    let eig = splitter_generator(photons).symmetric_eigen();
    let mut order: Vec<usize> = (0..=n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut out = DMatrix::from_element(n + 1, n + 1, C64::new(0.0, 0.0));
    for (rank, &col) in order.iter().enumerate() {
        // Exact spectrum; the eigenvectors carry all the rounding.
        let lambda = 2.0 * rank as f64 - n as f64;
        let phase = C64::from_polar(1.0, mixing_angle * lambda);
        let v = eig.eigenvectors.column(col);
        for r in 0..=n {
            let vr = phase * v[r];
            for c in 0..=n {
                out[(r, c)] += vr * v[c];
            }
        }
    }
    out
}

/// Full interferometer unitary `B P(phi) B` on the `N`-photon mode basis.
pub fn mz_unitary(photons: u32, phase: f64, conv: &MzConvention) -> Result<DMatrix<C64>> {
    if photons < 1 {
        return Err(Error::InvalidPhotonNumber(photons));
    }
    check_phase(phase)?;
    let b = splitter_fock(photons, conv.mixing_angle);
    let n = photons as usize;
    let p = DMatrix::from_fn(n + 1, n + 1, |r, c| {
        if r == c {
            C64::from_polar(1.0, conv.phase_sign * conv.arm_photons(photons, r) * phase)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(&b * p * &b)
}

pub fn check_phase(phase: f64) -> Result<()> {
    if phase.is_finite() && phase > -PI && phase <= PI {
        Ok(())
    } else {
        Err(Error::InvalidPhase(phase))
    }
}

/// Maps any finite angle into `(-pi, pi]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let mut x = phase.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// First and second phase derivatives of `P(m|phi)`, indexed by `n_c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derivatives {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

/// A state fed through an interferometer, reduced to the trigonometric
/// polynomials `amp_m(phi) = sum_k coeff[m][k] exp(i freq[k] phi)`.
///
/// Every quantity that depends on phi (probabilities and their derivatives of
/// any order) is evaluated from these coefficients without re-forming the
/// unitary.
#[derive(Debug, Clone)]
pub struct Interferometer {
    photons: u32,
    coeffs: Vec<Vec<C64>>,
    freqs: Vec<f64>,
}

impl Interferometer {
    pub fn new(state: &TwoModeState, conv: &MzConvention) -> Self {
        let photons = state.photons();
        let n = photons as usize;
        let b = splitter_fock(photons, conv.mixing_angle);
        let inner = &b * DVector::from_column_slice(state.amplitudes());
        let freqs = (0..=n)
            .map(|k| conv.phase_sign * conv.arm_photons(photons, k))
            .collect();
        let mut coeffs = vec![vec![C64::new(0.0, 0.0); n + 1]; n + 1];
        for mode_one in 0..=n {
            let row = &mut coeffs[conv.output_index(photons, mode_one)];
            for k in 0..=n {
                row[k] = b[(mode_one, k)] * inner[k];
            }
        }
        Self {
            photons,
            coeffs,
            freqs,
        }
    }

    pub fn photons(&self) -> u32 {
        self.photons
    }

    fn phasors(&self, phase: f64) -> Vec<C64> {
        self.freqs
            .iter()
            .map(|w| C64::from_polar(1.0, w * phase))
            .collect()
    }

    /// `d^order amp_m / dphi^order` for outcome index `n_c`.
    pub fn amplitude(&self, n_c: usize, phase: f64, order: u32) -> C64 {
        self.coeffs[n_c]
            .iter()
            .zip(&self.freqs)
            .map(|(c, w)| c * C64::new(0.0, *w).powu(order) * C64::from_polar(1.0, w * phase))
            .sum()
    }

    pub fn probabilities(&self, phase: f64) -> Vec<f64> {
        let ph = self.phasors(phase);
        self.coeffs
            .iter()
            .map(|row| {
                let a: C64 = row.iter().zip(&ph).map(|(c, e)| c * e).sum();
                a.norm_sqr().min(1.0)
            })
            .collect()
    }

    pub fn distribution(&self, phase: f64) -> OutcomeDistribution {
        OutcomeDistribution {
            total_photons: self.photons,
            phase,
            probs: self.probabilities(phase),
        }
    }

    pub fn derivatives(&self, phase: f64) -> Derivatives {
        let ph = self.phasors(phase);
        let mut first = Vec::with_capacity(self.coeffs.len());
        let mut second = Vec::with_capacity(self.coeffs.len());
        for row in &self.coeffs {
            let (mut a0, mut a1, mut a2) = (C64::default(), C64::default(), C64::default());
            for ((c, e), w) in row.iter().zip(&ph).zip(&self.freqs) {
                let t = c * e;
                a0 += t;
                a1 += t * C64::new(0.0, *w);
                a2 -= t * (w * w);
            }
            first.push(2.0 * (a0.conj() * a1).re);
            second.push(2.0 * (a1.norm_sqr() + (a0.conj() * a2).re));
        }
        Derivatives { first, second }
    }

    /// True when `P(m|phi)` vanishes for every phi.
    pub fn is_null(&self, n_c: usize) -> bool {
        self.coeffs[n_c].iter().all(|c| c.norm() <= NULL_TOL)
    }

    /// `P'(m)^2 / P(m)` at `phase`, with zeros of `P` resolved by the limit
    /// along phi. Near an isolated zero `P ~ |a'|^2 d^2` and the ratio tends
    /// to `4 |a'|^2`, which vanishes if the zero has higher order. Returns
    /// `None` for outcomes that are identically zero.
    pub fn score_term(&self, n_c: usize, phase: f64, degenerate_below: f64) -> Option<ScoreTerm> {
        if self.is_null(n_c) {
            return None;
        }
        let a0 = self.amplitude(n_c, phase, 0);
        let p = a0.norm_sqr();
        if p >= degenerate_below {
            let a1 = self.amplitude(n_c, phase, 1);
            let dp = 2.0 * (a0.conj() * a1).re;
            return Some(ScoreTerm {
                value: dp * dp / p,
                by_limit: false,
            });
        }
        let a1 = self.amplitude(n_c, phase, 1);
        Some(ScoreTerm {
            value: 4.0 * a1.norm_sqr(),
            by_limit: true,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreTerm {
    pub value: f64,
    pub by_limit: bool,
}

/// `P(m|phi)` for every outcome of `state` under `conv`.
pub fn outcome_distribution(
    state: &TwoModeState,
    phase: f64,
    conv: &MzConvention,
) -> Result<OutcomeDistribution> {
    check_phase(phase)?;
    Ok(Interferometer::new(state, conv).distribution(phase))
}

pub fn conditional_derivatives(
    state: &TwoModeState,
    phase: f64,
    conv: &MzConvention,
) -> Result<Derivatives> {
    check_phase(phase)?;
    Ok(Interferometer::new(state, conv).derivatives(phase))
}

/// Closed-form Fock-input distribution: binomial in `n_c` with success
/// probability `sin^2(phi/2)`. Independent of the Fock-space engine.
pub fn fock_binomial_oracle(photons: u32, phase: f64) -> Result<OutcomeDistribution> {
    if photons < 1 {
        return Err(Error::InvalidPhotonNumber(photons));
    }
    let s = (phase / 2.0).sin().powi(2);
    let c = (phase / 2.0).cos().powi(2);
    let probs = (0..=photons)
        .map(|k| binomial(photons, k) * s.powi(k as i32) * c.powi((photons - k) as i32))
        .collect();
    Ok(OutcomeDistribution {
        total_photons: photons,
        phase,
        probs,
    })
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `C(n, k)`, exact integer arithmetic up to `n = 20`, log-factorials above.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= 20 {
        let k = k.min(n - k) as u64;
        let n = n as u64;
        return (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1)) as f64;
    }
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k))
        .exp()
        .round()
}
