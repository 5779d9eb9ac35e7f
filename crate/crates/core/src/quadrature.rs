//! Composite Gauss–Legendre quadrature carried out in log space.

use crate::error::{Error, Result};

/// Refinement controls for the posterior integrals over the shape interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Initial number of equal panels.
    pub panels: usize,
    /// Gauss–Legendre nodes per panel.
    pub nodes_per_panel: usize,
    /// Stop once successive panel-doublings agree to this relative tolerance.
    pub rel_tol: f64,
    /// Maximum number of panel doublings.
    pub max_refinements: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            panels: 16,
            nodes_per_panel: 10,
            rel_tol: 1e-8,
            max_refinements: 8,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if self.panels == 0 || self.nodes_per_panel == 0 {
            return Err(Error::invalid("quadrature needs at least one panel and one node"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::invalid(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        Ok(())
    }
}

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes from Newton iteration on P_n started at the Chebyshev guesses.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Plain (linear-space) integral of `f` over `[lo, hi]` with `panels` panels.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64, panels: usize) -> f64 {
        let h = (hi - lo) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let a = lo + p as f64 * h;
            let mid = a + 0.5 * h;
            let s: f64 = self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| w * f(mid + 0.5 * h * x))
                .sum();
            total += 0.5 * h * s;
        }
        total
    }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
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

/// Result of [`integrate_log`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIntegrals<const M: usize> {
    pub log_values: [f64; M],
    /// Integrand evaluations over all refinement levels.
    pub node_count: usize,
    pub panels: usize,
    pub converged: bool,
}

/// One composite pass: ln ∫ exp(f_m) for each of the `M` log-integrands.
///
/// Each panel is reduced with its node maximum factored out, and panels are
/// combined by log-sum-exp in index order.
pub fn composite_log_pass<const M: usize, F>(
    f: &F,
    lo: f64,
    hi: f64,
    panels: usize,
    rule: &GaussLegendre,
) -> Result<[f64; M]>
where
    F: Fn(f64) -> Result<[f64; M]>,
{
    let h = (hi - lo) / panels as f64;
    let ln_half_h = (0.5 * h).ln();
    let mut panel_logs = vec![[0.0; M]; panels];
    let mut node_vals = vec![[0.0; M]; rule.len()];
    for (p, out) in panel_logs.iter_mut().enumerate() {
        let mid = lo + (p as f64 + 0.5) * h;
        for (slot, x) in node_vals.iter_mut().zip(rule.nodes()) {
            *slot = f(mid + 0.5 * h * x)?;
        }
        for m in 0..M {
            // f64::max drops NaN, so test for it separately
            let max = node_vals.iter().map(|v| v[m]).fold(f64::NEG_INFINITY, f64::max);
            if node_vals.iter().any(|v| v[m].is_nan()) || max == f64::INFINITY {
                return Err(Error::NonConvergence(format!(
                    "log-integrand not finite near beta = {mid}"
                )));
            }
            out[m] = if max == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                let s: f64 = node_vals
                    .iter()
                    .zip(rule.weights())
                    .map(|(v, w)| w * (v[m] - max).exp())
                    .sum();
                max + s.ln() + ln_half_h
            };
        }
    }
    let mut total = [0.0; M];
    for (m, t) in total.iter_mut().enumerate() {
        let column: Vec<f64> = panel_logs.iter().map(|v| v[m]).collect();
        *t = crate::special::log_sum_exp(&column);
    }
    Ok(total)
}

/// Integrate `exp(f_m)` over `[lo, hi]`, doubling panels until successive
/// passes agree to `rel_tol` for every `m`.
pub fn integrate_log<const M: usize, F>(
    f: F,
    lo: f64,
    hi: f64,
    settings: &QuadratureSettings,
) -> Result<LogIntegrals<M>>
where
    F: Fn(f64) -> Result<[f64; M]>,
{
    settings.validate()?;
    if !(hi > lo) {
        return Err(Error::invalid(format!("empty integration range [{lo}, {hi}]")));
    }
    let rule = GaussLegendre::new(settings.nodes_per_panel);
    let mut panels = settings.panels;
    let mut previous = composite_log_pass(&f, lo, hi, panels, &rule)?;
    let mut node_count = panels * rule.len();
    for _ in 0..settings.max_refinements {
        panels *= 2;
        let current = composite_log_pass(&f, lo, hi, panels, &rule)?;
        node_count += panels * rule.len();
        let worst = previous
            .iter()
            .zip(&current)
            .map(|(p, c)| {
                if p == c {
                    0.0
                } else {
                    ((c - p).exp() - 1.0).abs()
                }
            })
            .fold(0.0, f64::max);
        previous = current;
        if worst < settings.rel_tol {
            return Ok(LogIntegrals {
                log_values: previous,
                node_count,
                panels,
                converged: true,
            });
        }
    }
    Ok(LogIntegrals {
        log_values: previous,
        node_count,
        panels,
        converged: false,
    })
}
