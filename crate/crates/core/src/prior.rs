//! Joint prior for (x_R, β): uniform shape interval times an inverted
//! generalized gamma (IGG) conditional prior on the reliable life.
//!
//! The IGG hyperparameters are never elicited directly. The user supplies an
//! anticipated reliable life `x̄_R` and a weight rule `w(β)`; the scale `a` is
//! then fixed at each β so that the conditional prior mean equals `x̄_R`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::censored::CensoredSample;
use crate::error::{Error, Result};
use crate::special::ln_gamma;
use crate::weibull::{check_reliability, k_of};

/// Shape interval `[β1, β2]` carrying the uniform prior on β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaInterval {
    beta1: f64,
    beta2: f64,
}

impl BetaInterval {
    pub fn new(beta1: f64, beta2: f64) -> Result<Self> {
        if !(beta1.is_finite() && beta2.is_finite() && beta1 > 0.0 && beta2 > beta1) {
            return Err(Error::invalid(format!(
                "shape interval needs 0 < beta1 < beta2, got [{beta1}, {beta2}]"
            )));
        }
        Ok(Self { beta1, beta2 })
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    pub fn width(&self) -> f64 {
        self.beta2 - self.beta1
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.beta1 + self.beta2)
    }

    pub fn contains(&self, beta: f64) -> bool {
        beta >= self.beta1 && beta <= self.beta2
    }

    /// Uniform prior density of β.
    pub fn pdf(&self, beta: f64) -> f64 {
        if self.contains(beta) {
            1.0 / self.width()
        } else {
            0.0
        }
    }
}

/// How the IGG weight `w` depends on the shape β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WRule {
    /// `w(β) = c/β`
    ConstantOverBeta(f64),
    /// `w(β) = v`
    FixedValue(f64),
    /// `w(β) = 1`
    Unit,
    /// `w(β) = 1` for `β >= 1`, else `1/β²`
    Piecewise96,
}

impl WRule {
    pub fn weight(&self, beta: f64) -> f64 {
        match *self {
            WRule::ConstantOverBeta(c) => c / beta,
            WRule::FixedValue(v) => v,
            WRule::Unit => 1.0,
            WRule::Piecewise96 => {
                if beta >= 1.0 {
                    1.0
                } else {
                    1.0 / (beta * beta)
                }
            }
        }
    }

    fn validate_value(&self) -> Result<()> {
        match *self {
            WRule::ConstantOverBeta(v) | WRule::FixedValue(v) if !(v.is_finite() && v > 0.0) => {
                Err(Error::invalid(format!("w-rule value must be finite and > 0, got {v}")))
            }
            _ => Ok(()),
        }
    }

    /// The β in `iv` where `w(β) - 1/β` is smallest, when that margin is not
    /// positive. `w(β) - 1/β` is monotone or piecewise monotone for every rule,
    /// so the check is exact.
    pub fn constraint_violation(&self, iv: &BetaInterval) -> Option<f64> {
        let margin = |b: f64| self.weight(b) - 1.0 / b;
        let worst = match *self {
            // (c - 1)/β and v - 1/β: worst at the left end
            WRule::ConstantOverBeta(_) | WRule::FixedValue(_) | WRule::Unit => iv.beta1,
            // zero margin at β = 1, positive elsewhere
            WRule::Piecewise96 => {
                if iv.contains(1.0) {
                    1.0
                } else {
                    iv.beta1
                }
            }
        };
        (margin(worst) <= 0.0).then_some(worst)
    }

    /// Largest weight over the interval.
    pub fn max_weight(&self, iv: &BetaInterval) -> f64 {
        match *self {
            WRule::ConstantOverBeta(c) => c / iv.beta1,
            WRule::FixedValue(v) => v,
            WRule::Unit => 1.0,
            WRule::Piecewise96 => self.weight(iv.beta1).max(1.0),
        }
    }
}

/// Everything needed to pin down the joint prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    interval: BetaInterval,
    xbar_r: f64,
    reliability: f64,
    w_rule: WRule,
}

impl PriorSpec {
    /// Validates `x̄_R > 0`, `R ∈ (0,1)` and `w(β) > 1/β` on the whole interval.
    pub fn new(interval: BetaInterval, xbar_r: f64, reliability: f64, w_rule: WRule) -> Result<Self> {
        if !(xbar_r.is_finite() && xbar_r > 0.0) {
            return Err(Error::invalid(format!("xbar_R must be finite and > 0, got {xbar_r}")));
        }
        check_reliability(reliability)?;
        w_rule.validate_value()?;
        if let Some(beta) = w_rule.constraint_violation(&interval) {
            return Err(Error::ElicitationConstraint {
                beta,
                w: w_rule.weight(beta),
                inv_beta: 1.0 / beta,
            });
        }
        Ok(Self {
            interval,
            xbar_r,
            reliability,
            w_rule,
        })
    }

    pub fn interval(&self) -> &BetaInterval {
        &self.interval
    }

    pub fn xbar_r(&self) -> f64 {
        self.xbar_r
    }

    pub fn reliability(&self) -> f64 {
        self.reliability
    }

    pub fn k(&self) -> f64 {
        k_of(self.reliability)
    }

    pub fn w_rule(&self) -> WRule {
        self.w_rule
    }

    /// Same prior with a different anticipated reliable life.
    pub fn with_xbar_r(&self, xbar_r: f64) -> Result<Self> {
        Self::new(self.interval, xbar_r, self.reliability, self.w_rule)
    }

    /// `(w, a)` of the conditional IGG prior at shape `beta`.
    pub fn conditional_prior(&self, beta: f64) -> Result<(f64, f64)> {
        let (w, ln_a) = self.conditional_prior_ln(beta)?;
        Ok((w, ln_a.exp()))
    }

    /// `(w, ln a)`; the engine works with `ln a` throughout.
    pub fn conditional_prior_ln(&self, beta: f64) -> Result<(f64, f64)> {
        if !self.interval.contains(beta) {
            return Err(Error::invalid(format!(
                "beta = {beta} outside the prior interval [{}, {}]",
                self.interval.beta1, self.interval.beta2
            )));
        }
        let w = self.w_rule.weight(beta);
        Ok((w, ln_hyper_a(self.xbar_r, w, beta)?))
    }

    /// A warning when the prior weight reaches the number of failures `r`,
    /// at which point the prior tends to dominate the data.
    pub fn weight_warning(&self, r: usize) -> Option<String> {
        let w_max = self.w_rule.max_weight(&self.interval);
        (w_max >= r as f64).then(|| {
            format!("prior weight w reaches {w_max:.3} on the shape interval, not smaller than the {r} observed failures")
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: PriorSpecJson = serde_json::from_str(s)?;
        raw.try_into()
    }

    pub fn from_json_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&PriorSpecJson::from(*self)).expect("prior spec serializes")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WRuleJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl TryFrom<WRuleJson> for WRule {
    type Error = Error;

    fn try_from(j: WRuleJson) -> Result<Self> {
        let need = |kind: &str| {
            j.value
                .ok_or_else(|| Error::invalid(format!("w_rule kind `{kind}` requires a `value`")))
        };
        let rule = match j.kind.as_str() {
            "const_over_beta" => WRule::ConstantOverBeta(need("const_over_beta")?),
            "fixed" => WRule::FixedValue(need("fixed")?),
            "unit" => WRule::Unit,
            "piecewise96" => WRule::Piecewise96,
            other => {
                return Err(Error::invalid(format!(
                    "unknown w_rule kind {other:?} (expected const_over_beta, fixed, unit, piecewise96)"
                )))
            }
        };
        rule.validate_value()?;
        Ok(rule)
    }
}

impl From<WRule> for WRuleJson {
    fn from(r: WRule) -> Self {
        let (kind, value) = match r {
            WRule::ConstantOverBeta(c) => ("const_over_beta", Some(c)),
            WRule::FixedValue(v) => ("fixed", Some(v)),
            WRule::Unit => ("unit", None),
            WRule::Piecewise96 => ("piecewise96", None),
        };
        WRuleJson {
            kind: kind.into(),
            value,
        }
    }
}

/// On-disk prior specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpecJson {
    pub beta1: f64,
    pub beta2: f64,
    #[serde(rename = "xbar_R")]
    pub xbar_r: f64,
    #[serde(rename = "R")]
    pub reliability: f64,
    pub w_rule: WRuleJson,
}

impl TryFrom<PriorSpecJson> for PriorSpec {
    type Error = Error;

    fn try_from(j: PriorSpecJson) -> Result<Self> {
        PriorSpec::new(
            BetaInterval::new(j.beta1, j.beta2)?,
            j.xbar_r,
            j.reliability,
            j.w_rule.try_into()?,
        )
    }
}

impl From<PriorSpec> for PriorSpecJson {
    fn from(p: PriorSpec) -> Self {
        PriorSpecJson {
            beta1: p.interval.beta1,
            beta2: p.interval.beta2,
            xbar_r: p.xbar_r,
            reliability: p.reliability,
            w_rule: p.w_rule.into(),
        }
    }
}

/// ln a, with `a = x̄_R Γ(w)/Γ(w - 1/β)` the IGG scale whose conditional
/// mean is `x̄_R`.
pub fn ln_hyper_a(xbar_r: f64, w: f64, beta: f64) -> Result<f64> {
    if !(xbar_r > 0.0 && w > 0.0 && beta > 0.0) {
        return Err(Error::invalid(format!(
            "hyper_a needs positive xbar_R, w, beta; got {xbar_r}, {w}, {beta}"
        )));
    }
    let shifted = w - 1.0 / beta;
    if shifted <= 0.0 {
        return Err(Error::ElicitationConstraint {
            beta,
            w,
            inv_beta: 1.0 / beta,
        });
    }
    Ok(xbar_r.ln() + ln_gamma(w) - ln_gamma(shifted))
}

pub fn hyper_a(xbar_r: f64, w: f64, beta: f64) -> Result<f64> {
    ln_hyper_a(xbar_r, w, beta).map(f64::exp)
}

/// ln of the IGG density
/// `β a^{βw} / Γ(w) · x^{-(βw+1)} · exp[-(x/a)^{-β}]` for `x > 0`.
pub fn ln_igg_pdf(x: f64, ln_a: f64, w: f64, beta: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NEG_INFINITY;
    }
    let ln_x = x.ln();
    beta.ln() + beta * w * ln_a - ln_gamma(w) - (beta * w + 1.0) * ln_x
        - (beta * (ln_a - ln_x)).exp()
}

pub fn igg_pdf(x: f64, a: f64, w: f64, beta: f64) -> f64 {
    ln_igg_pdf(x, a.ln(), w, beta).exp()
}

/// `E[x] = a Γ(w - 1/β)/Γ(w)`, finite only for `w > 1/β`.
pub fn igg_mean(a: f64, w: f64, beta: f64) -> Option<f64> {
    let shifted = w - 1.0 / beta;
    (shifted > 0.0).then(|| a * (ln_gamma(shifted) - ln_gamma(w)).exp())
}

/// Conjugate update of the conditional IGG: `(w + r, a^β + K S(β))`.
///
/// `w = 0`, `a = 0` is accepted and stands for the non-informative start.
pub fn posterior_conditional_params(
    w: f64,
    a: f64,
    sample: &CensoredSample,
    beta: f64,
    reliability: f64,
) -> (f64, f64) {
    let k = k_of(reliability);
    let kernel = if sample.n() == 0 {
        0.0
    } else {
        k * sample.s_of_beta(beta)
    };
    (w + sample.r() as f64, a.powf(beta) + kernel)
}

/// Conditional posterior density of x_R given β evaluated term by term:
/// `β A^{w+r} / Γ(w+r) · x^{-(w+r)β-1} · exp(-A x^{-β})`.
pub fn conditional_posterior_pdf(
    x: f64,
    w: f64,
    a: f64,
    sample: &CensoredSample,
    beta: f64,
    reliability: f64,
) -> f64 {
    ln_conditional_posterior_pdf(x, w, a, sample, beta, reliability).exp()
}

/// Logarithm of [`conditional_posterior_pdf`], `-inf` for `x <= 0`.
pub fn ln_conditional_posterior_pdf(
    x: f64,
    w: f64,
    a: f64,
    sample: &CensoredSample,
    beta: f64,
    reliability: f64,
) -> f64 {
    if !(x > 0.0) {
        return f64::NEG_INFINITY;
    }
    let (w_post, big_a) = posterior_conditional_params(w, a, sample, beta, reliability);
    beta.ln() + w_post * big_a.ln() - ln_gamma(w_post) - (w_post * beta + 1.0) * x.ln() - big_a * x.powf(-beta)
}

/// Fictitious lifetimes standing in for the prior knowledge.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualSample {
    times: Vec<f64>,
}

impl VirtualSample {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("virtual sample must not be empty"));
        }
        if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::invalid(format!("virtual lifetimes must be > 0, got {t}")));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Every virtual item counts as a failure.
    pub fn r_prime(&self) -> usize {
        self.times.len()
    }

    /// `S'(β) = Σ x'_i^β`.
    pub fn s_prime(&self, beta: f64) -> f64 {
        self.times.iter().map(|t| t.powf(beta)).sum()
    }
}

/// IGG parameters equivalent to observing `v` under the non-informative
/// prior: `w = r'` and `a^β = K S'(β)`.
pub fn prior_from_virtual_sample(v: &VirtualSample, reliability: f64, beta: f64) -> Result<(f64, f64)> {
    check_reliability(reliability)?;
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
    }
    let a = (k_of(reliability) * v.s_prime(beta)).powf(1.0 / beta);
    Ok((v.r_prime() as f64, a))
}
