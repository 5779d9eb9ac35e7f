//! Joint posterior of (x_R, β) and the Bayes point estimators.
//!
//! The conditional prior of x_R is conjugate, so x_R integrates out in closed
//! form and only one-dimensional integrals over the shape interval remain:
//!
//! ```text
//! I_h = ∫ β^{r_h} a^{βw} P^β A^{-(r+w-m_h)} Γ(r+w-m_h) / Γ(w) dβ
//! A   = a^β + K S(β)
//! ```
//!
//! with `r_0 = r_1 = r`, `r_2 = r + 1`, `m_0 = m_2 = 0`, `m_1 = 1/β`. Then
//! `x̃_R = I_1/I_0` and `β̃ = I_2/I_0`. Note the negative exponent on `A`: it is
//! the only sign for which `I_0` normalizes the joint density and an empty
//! sample returns the prior means. Both `w` and `a` are re-evaluated at every
//! node because the weight rule depends on β.

use crate::censored::CensoredSample;
use crate::error::{Error, Result};
use crate::prior::PriorSpec;
use crate::quadrature::{integrate_log, LogIntegrals, QuadratureSettings};
use crate::special::{ln_gamma, log_add_exp};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorEstimate {
    /// Posterior mean of the reliable life.
    pub x_r_tilde: f64,
    /// Posterior mean of the shape.
    pub beta_tilde: f64,
    /// `(ln I_0, ln I_1, ln I_2)`.
    pub log_i: [f64; 3],
    pub node_count: usize,
    pub converged: bool,
}

impl PosteriorEstimate {
    pub fn from_log_integrals(log_i: [f64; 3], node_count: usize, converged: bool) -> Self {
        Self {
            x_r_tilde: (log_i[1] - log_i[0]).exp(),
            beta_tilde: (log_i[2] - log_i[0]).exp(),
            log_i,
            node_count,
            converged,
        }
    }
}

/// ln A(β) = ln(a^β + K S(β)).
fn ln_big_a(beta: f64, ln_a: f64, ln_k: f64, sample: &CensoredSample) -> f64 {
    log_add_exp(beta * ln_a, ln_k + sample.ln_s_of_beta(beta))
}

fn checked_ln_gamma(arg: f64, beta: f64, w: f64) -> Result<f64> {
    if arg > 0.0 {
        Ok(ln_gamma(arg))
    } else {
        Err(Error::ElicitationConstraint {
            beta,
            w,
            inv_beta: 1.0 / beta,
        })
    }
}

/// All three log-integrands at one node, sharing `w`, `a` and `A`.
pub fn log_integrands(beta: f64, spec: &PriorSpec, sample: &CensoredSample) -> Result<[f64; 3]> {
    let (w, ln_a) = spec.conditional_prior_ln(beta)?;
    let r = sample.r() as f64;
    let ln_big_a = ln_big_a(beta, ln_a, spec.k().ln(), sample);
    let ln_beta = beta.ln();
    let common = r * ln_beta + beta * w * ln_a + beta * sample.log_p() - ln_gamma(w);

    let shape0 = r + w;
    let shape1 = r + w - 1.0 / beta;
    let l0 = common - shape0 * ln_big_a + checked_ln_gamma(shape0, beta, w)?;
    let l1 = common - shape1 * ln_big_a + checked_ln_gamma(shape1, beta, w)?;
    Ok([l0, l1, l0 + ln_beta])
}

/// ln of the `h`-th integrand (`h` in 0..=2) at `beta`.
pub fn log_integrand(beta: f64, h: usize, spec: &PriorSpec, sample: &CensoredSample) -> Result<f64> {
    if h > 2 {
        return Err(Error::invalid(format!("integral index h must be 0, 1 or 2, got {h}")));
    }
    Ok(log_integrands(beta, spec, sample)?[h])
}

/// ln I_h over the prior shape interval.
pub fn integrate_ih(
    h: usize,
    spec: &PriorSpec,
    sample: &CensoredSample,
    settings: &QuadratureSettings,
) -> Result<LogIntegrals<1>> {
    if h > 2 {
        return Err(Error::invalid(format!("integral index h must be 0, 1 or 2, got {h}")));
    }
    let iv = spec.interval();
    integrate_log(
        |b| Ok([log_integrands(b, spec, sample)?[h]]),
        iv.beta1(),
        iv.beta2(),
        settings,
    )
}

/// Bayes estimates from any triple of log-integrands over `[lo, hi]`.
pub fn estimate_from_integrands<F>(f: F, lo: f64, hi: f64, settings: &QuadratureSettings) -> Result<PosteriorEstimate>
where
    F: Fn(f64) -> Result<[f64; 3]>,
{
    let out = integrate_log(f, lo, hi, settings)?;
    Ok(PosteriorEstimate::from_log_integrals(
        out.log_values,
        out.node_count,
        out.converged,
    ))
}

/// Posterior means `x̃_R = I_1/I_0` and `β̃ = I_2/I_0`.
///
/// Non-convergence of the quadrature is reported through
/// [`PosteriorEstimate::converged`], never silently.
pub fn estimate(spec: &PriorSpec, sample: &CensoredSample, settings: &QuadratureSettings) -> Result<PosteriorEstimate> {
    let iv = spec.interval();
    estimate_from_integrands(
        |b| log_integrands(b, spec, sample),
        iv.beta1(),
        iv.beta2(),
        settings,
    )
}

/// Joint posterior density with its normalizer computed once.
#[derive(Debug, Clone)]
pub struct JointPosterior<'a> {
    spec: &'a PriorSpec,
    sample: &'a CensoredSample,
    log_i0: f64,
    converged: bool,
}

impl<'a> JointPosterior<'a> {
    pub fn new(spec: &'a PriorSpec, sample: &'a CensoredSample, settings: &QuadratureSettings) -> Result<Self> {
        let i0 = integrate_ih(0, spec, sample, settings)?;
        Ok(Self {
            spec,
            sample,
            log_i0: i0.log_values[0],
            converged: i0.converged,
        })
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_i0
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Density at `(x_R, β)`; zero outside the prior shape interval.
    pub fn pdf(&self, x_r: f64, beta: f64) -> Result<f64> {
        if !(x_r > 0.0) || !self.spec.interval().contains(beta) {
            return Ok(0.0);
        }
        let (w, ln_a) = self.spec.conditional_prior_ln(beta)?;
        let r = self.sample.r() as f64;
        let ln_x = x_r.ln();
        let ln_big_a = ln_big_a(beta, ln_a, self.spec.k().ln(), self.sample);
        let ln_num = (r + 1.0) * beta.ln() + beta * w * ln_a - ((r + w) * beta + 1.0) * ln_x
            + beta * self.sample.log_p()
            - (ln_big_a - beta * ln_x).exp()
            - ln_gamma(w);
        Ok((ln_num - self.log_i0).exp())
    }
}

/// One-shot joint posterior density; prefer [`JointPosterior`] for many points.
pub fn joint_posterior_pdf(
    x_r: f64,
    beta: f64,
    spec: &PriorSpec,
    sample: &CensoredSample,
    settings: &QuadratureSettings,
) -> Result<f64> {
    JointPosterior::new(spec, sample, settings)?.pdf(x_r, beta)
}
