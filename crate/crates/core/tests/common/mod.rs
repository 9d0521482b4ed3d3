//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_4, PI};

use mzfid::linear_optics::C64;
use nalgebra::{DMatrix, DVector};

/// `exp(a)` by scaling and squaring around a truncated Taylor series.
pub fn taylor_expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm: f64 = a.iter().map(|v| v.norm()).sum::<f64>().max(1e-300);
    let squarings = (norm / 0.25).log2().ceil().max(0.0) as u32;
    let scaled = a / C64::new(2f64.powi(squarings as i32), 0.0);
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * &scaled / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Interferometer unitary rebuilt from the generators: splitter
/// `exp(i pi/4 (a'b + b'a))`, phase `exp(i phi b'b)`, splitter.
pub fn oracle_unitary(photons: usize, phase: f64) -> DMatrix<C64> {
    let mut g = DMatrix::<C64>::zeros(photons + 1, photons + 1);
    for k in 0..photons {
        // a'b raises the mode-one count from k to k + 1.
        let v = C64::new((((k + 1) * (photons - k)) as f64).sqrt(), 0.0);
        g[(k + 1, k)] = v;
        g[(k, k + 1)] = v;
    }
    let b = taylor_expm(&(g * C64::new(0.0, FRAC_PI_4)));
    let p = DMatrix::from_fn(photons + 1, photons + 1, |r, c| {
        if r == c {
            C64::from_polar(1.0, phase * (photons - r) as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &b * p * &b
}

/// Outcome probabilities indexed by `n_c` from the oracle unitary.
pub fn oracle_probs(amplitudes: &[C64], phase: f64) -> Vec<f64> {
    let u = oracle_unitary(amplitudes.len() - 1, phase);
    let out = u * DVector::from_column_slice(amplitudes);
    out.iter().map(|a| a.norm_sqr()).collect()
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `n` points on `(-pi, pi]`.
pub fn phase_points(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| -PI + (j as f64 + 1.0) * 2.0 * PI / n as f64)
        .collect()
}
