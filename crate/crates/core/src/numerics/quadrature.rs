//! Composite Gauss-Legendre quadrature with panel doubling.
//!
//! Integrals are taken over a list of breakpoints (by default the single
//! interval `[-pi, pi]`). Every refinement level doubles the number of panels
//! in each interval, and the difference between the two finest levels is the
//! reported error estimate.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub base_panels: usize,
    pub nodes_per_panel: usize,
    pub max_refinements: u32,
    pub abs_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            base_panels: 16,
            nodes_per_panel: 32,
            max_refinements: 6,
            abs_tol: 1e-10,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.base_panels < 4 {
            return Err(Error::InvalidConfig(format!(
                "base_panels must be at least 4, got {}",
                self.base_panels
            )));
        }
        if self.nodes_per_panel < 8 {
            return Err(Error::InvalidConfig(format!(
                "nodes_per_panel must be at least 8, got {}",
                self.nodes_per_panel
            )));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        Ok(())
    }

    /// Same rule with twice as many base panels.
    pub fn doubled(&self) -> Self {
        Self {
            base_panels: self.base_panels * 2,
            ..*self
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub w: f64,
}

/// Node set generator for a fixed Gauss-Legendre order.
#[derive(Debug, Clone)]
pub struct PanelRule {
    config: QuadratureConfig,
    unit_nodes: Vec<f64>,
    unit_weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(config: &QuadratureConfig) -> Result<Self> {
        config.validate()?;
        let (unit_nodes, unit_weights) = gauss_legendre(config.nodes_per_panel);
        Ok(Self {
            config: *config,
            unit_nodes,
            unit_weights,
        })
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.config
    }

    /// Nodes at a refinement level. Intervals between consecutive breakpoints
    /// share the base panels in proportion to their length (at least one each).
    pub fn nodes(&self, breakpoints: &[f64], level: u32) -> Vec<Node> {
        let total = breakpoints.last().unwrap() - breakpoints[0];
        let scale = 1usize << level;
        let mut out = Vec::new();
        for pair in breakpoints.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let len = b - a;
            if len <= 0.0 {
                continue;
            }
            let base = ((self.config.base_panels as f64) * len / total)
                .round()
                .max(1.0) as usize;
            let panels = base * scale;
            let h = len / panels as f64;
            for p in 0..panels {
                let lo = a + p as f64 * h;
                let mid = lo + 0.5 * h;
                for (t, w) in self.unit_nodes.iter().zip(&self.unit_weights) {
                    out.push(Node {
                        x: mid + 0.5 * h * t,
                        w: 0.5 * h * w,
                    });
                }
            }
        }
        out
    }
}

/// Outcome of a refinement run: the finest-level result plus diagnostics.
#[derive(Debug, Clone)]
pub struct Refined<T> {
    pub best: T,
    pub error_estimate: f64,
    pub converged: bool,
    /// Change between consecutive levels, coarsest first.
    pub deltas: Vec<f64>,
}

/// Drives `eval` through successive doublings until `distance` between two
/// consecutive levels drops below `abs_tol`, or `max_refinements` doublings
/// are spent. At least one doubling is always taken.
pub fn refine<T>(
    rule: &PanelRule,
    breakpoints: &[f64],
    mut eval: impl FnMut(&[Node]) -> Result<T>,
    distance: impl Fn(&T, &T) -> f64,
) -> Result<Refined<T>> {
    check_breakpoints(breakpoints)?;
    let mut best = eval(&rule.nodes(breakpoints, 0))?;
    let mut deltas = Vec::new();
    for level in 1..=rule.config.max_refinements.max(1) {
        let next = eval(&rule.nodes(breakpoints, level))?;
        let delta = distance(&best, &next);
        deltas.push(delta);
        best = next;
        if delta < rule.config.abs_tol {
            return Ok(Refined {
                best,
                error_estimate: delta,
                converged: true,
                deltas,
            });
        }
    }
    Ok(Refined {
        best,
        error_estimate: *deltas.last().unwrap(),
        converged: false,
        deltas,
    })
}

/// Largest componentwise absolute difference.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn check_breakpoints(breakpoints: &[f64]) -> Result<()> {
    if breakpoints.len() < 2 {
        return Err(Error::InvalidConfig("need at least two breakpoints".into()));
    }
    if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidConfig(
            "breakpoints must be finite and ascending".into(),
        ));
    }
    if breakpoints.last().unwrap() <= &breakpoints[0] {
        return Err(Error::InvalidConfig("empty integration range".into()));
    }
    Ok(())
}

/// Value of an integral together with the last refinement delta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
}

fn weighted_sum(f: &mut impl FnMut(f64) -> f64, nodes: &[Node]) -> Result<f64> {
    let mut sum = 0.0;
    for node in nodes {
        let y = f(node.x);
        if !y.is_finite() {
            return Err(Error::Integrand { at: node.x });
        }
        sum += node.w * y;
    }
    Ok(sum)
}

/// Integrates `f` over `[-pi, pi]`.
pub fn integrate(f: impl FnMut(f64) -> f64, config: &QuadratureConfig) -> Result<Integral> {
    integrate_on(f, &[-PI, PI], config)
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, never placing a
/// panel across a breakpoint.
pub fn integrate_on(
    mut f: impl FnMut(f64) -> f64,
    breakpoints: &[f64],
    config: &QuadratureConfig,
) -> Result<Integral> {
    let rule = PanelRule::new(config)?;
    let run = refine(
        &rule,
        breakpoints,
        |nodes| weighted_sum(&mut f, nodes),
        |a, b| (a - b).abs(),
    )?;
    if !run.converged {
        return Err(Error::NotConverged {
            best: run.best,
            estimate: run.error_estimate,
        });
    }
    Ok(Integral {
        value: run.best,
        error_estimate: run.error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_weights_sum_to_two() {
        for n in [1, 2, 5, 8, 17, 32, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14, "n = {n}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn single_panel_is_exact_for_degree_2n_minus_1() {
        let n = 8;
        let (x, w) = gauss_legendre(n);
        for deg in 0..(2 * n) as i32 {
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            assert!(
                (approx - exact).abs() < 1e-13,
                "degree {deg}: {approx} vs {exact}"
            );
        }
    }

    #[test]
    fn sin_squared_over_full_period() {
        let r = integrate(|x| x.sin().powi(2), &QuadratureConfig::default()).unwrap();
        assert!((r.value - PI).abs() < 1e-12);
    }

    #[test]
    fn log_weighted_integrand() {
        // sin^2(x/2) ln sin^2(x/2), extended by zero at x = 0.
        let f = |x: f64| {
            let s = (x / 2.0).sin().powi(2);
            if s == 0.0 {
                0.0
            } else {
                s * s.ln()
            }
        };
        let r = integrate(f, &QuadratureConfig::default()).unwrap();
        let exact = PI * (1.0 - 4f64.ln());
        assert!((r.value - exact).abs() < 1e-8, "{} vs {}", r.value, exact);
    }

    #[test]
    fn high_frequency_cosine_vanishes() {
        let r = integrate(|x| (40.0 * x).cos(), &QuadratureConfig::default()).unwrap();
        assert!(r.value.abs() < 1e-10);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let err = integrate(
            |x| if (0.5..0.6).contains(&x) { f64::NAN } else { x },
            &QuadratureConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Integrand { .. }), "{err:?}");
    }

    #[test]
    fn non_convergence_carries_best_value() {
        let config = QuadratureConfig {
            base_panels: 4,
            nodes_per_panel: 8,
            max_refinements: 1,
            abs_tol: 1e-14,
        };
        let err = integrate(|x| (60.0 * x).cos().powi(2) + x.abs().sqrt(), &config).unwrap_err();
        match err {
            Error::NotConverged { best, estimate } => {
                assert!(best.is_finite());
                assert!(estimate > 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        for config in [
            QuadratureConfig {
                base_panels: 3,
                ..Default::default()
            },
            QuadratureConfig {
                nodes_per_panel: 7,
                ..Default::default()
            },
            QuadratureConfig {
                abs_tol: 0.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(config.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn breakpoints_share_panels_by_length() {
        let rule = PanelRule::new(&QuadratureConfig::default()).unwrap();
        let nodes = rule.nodes(&[-PI, 0.0, PI], 0);
        assert_eq!(nodes.len(), 16 * 32);
        let nodes = rule.nodes(&[-PI, 0.0, PI], 2);
        assert_eq!(nodes.len(), 64 * 32);
        let total: f64 = nodes.iter().map(|n| n.w).sum();
        assert!((total - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn error_estimate_shrinks_for_kinked_integrand() {
        let rule = PanelRule::new(&QuadratureConfig {
            base_panels: 5,
            nodes_per_panel: 8,
            max_refinements: 6,
            abs_tol: 1e-300,
        })
        .unwrap();
        let run = refine(
            &rule,
            &[-PI, PI],
            |nodes| {
                Ok(nodes
                    .iter()
                    .map(|n| n.w * (n.x - 0.3).abs().powi(3))
                    .sum::<f64>())
            },
            |a, b| (a - b).abs(),
        )
        .unwrap();
        assert!(
            run.deltas.windows(2).all(|d| d[1] < d[0]),
            "{:?}",
            run.deltas
        );
    }
}
