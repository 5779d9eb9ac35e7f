//! Two-parameter Weibull lifetime model.
//!
//! The model is carried in two equivalent forms: the classical shape/scale
//! pair `(α, β)` with `Sf(x) = exp[-(x/α)^β]`, and the reliable-life form
//! `(x_R, β)` at reliability level `R` with `Sf(x) = exp[-K (x/x_R)^β]`,
//! `K = ln(1/R)`. The reliable life is the quantile with `Sf(x_R) = R`.

use rand::distr::Open01;
use rand::Rng;

use crate::error::{Error, Result};

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")))
    }
}

pub(crate) fn check_reliability(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("reliability level R must lie in (0, 1), got {r}")))
    }
}

/// `K = ln(1/R)`.
#[inline]
pub fn k_of(reliability: f64) -> f64 {
    -reliability.ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeScaleWeibull {
    alpha: f64,
    beta: f64,
}

impl ShapeScaleWeibull {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("beta", beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Re-express at reliability level `reliability`: `x_R = α K^{1/β}`.
    pub fn to_reliable_life(&self, reliability: f64) -> Result<ReliableLifeWeibull> {
        check_reliability(reliability)?;
        let x_r = self.alpha * k_of(reliability).powf(1.0 / self.beta);
        ReliableLifeWeibull::new(x_r, self.beta, reliability)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliableLifeWeibull {
    x_r: f64,
    beta: f64,
    reliability: f64,
}

impl ReliableLifeWeibull {
    pub fn new(x_r: f64, beta: f64, reliability: f64) -> Result<Self> {
        check_positive("x_R", x_r)?;
        check_positive("beta", beta)?;
        check_reliability(reliability)?;
        Ok(Self {
            x_r,
            beta,
            reliability,
        })
    }

    pub fn x_r(&self) -> f64 {
        self.x_r
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn reliability_level(&self) -> f64 {
        self.reliability
    }

    pub fn k(&self) -> f64 {
        k_of(self.reliability)
    }

    /// `α = x_R K^{-1/β}`.
    pub fn to_shape_scale(&self) -> ShapeScaleWeibull {
        ShapeScaleWeibull {
            alpha: self.x_r * self.k().powf(-1.0 / self.beta),
            beta: self.beta,
        }
    }

    /// Cumulative hazard `K (x/x_R)^β`.
    fn hazard(&self, x: f64) -> f64 {
        self.k() * (x / self.x_r).powf(self.beta)
    }

    /// Survival probability `Sf(x)`; `x < 0` is clamped to 1.
    pub fn reliability(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        (-self.hazard(x)).exp()
    }

    pub fn ln_reliability(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        -self.hazard(x)
    }

    /// Probability density. At `x = 0` the value is 0 for `β > 1`, `K/x_R` for
    /// `β = 1`, and singular for `β < 1`.
    pub fn density(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::invalid(format!("density needs x >= 0, got {x}")));
        }
        if x == 0.0 {
            return match self.beta.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Greater) => Ok(0.0),
                Some(std::cmp::Ordering::Equal) => Ok(self.k() / self.x_r),
                _ => Err(Error::SingularDensity { beta: self.beta }),
            };
        }
        Ok(self.ln_density_unchecked(x).exp())
    }

    /// ln pdf for `x > 0`.
    pub fn ln_density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::invalid(format!("ln density needs x > 0, got {x}")));
        }
        Ok(self.ln_density_unchecked(x))
    }

    fn ln_density_unchecked(&self, x: f64) -> f64 {
        let k = self.k();
        (k * self.beta).ln() - self.beta * self.x_r.ln() + (self.beta - 1.0) * x.ln()
            - self.hazard(x)
    }

    /// The time `x` with `Sf(x) = q`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::invalid(format!("survival probability must lie in (0, 1), got {q}")));
        }
        Ok(self.quantile_unchecked(q))
    }

    fn quantile_unchecked(&self, q: f64) -> f64 {
        self.x_r * (-q.ln() / self.k()).powf(1.0 / self.beta)
    }

    /// Draw `n` lifetimes by inverse transform of open-interval uniforms.
    pub fn sample<G: Rng + ?Sized>(&self, n: usize, rng: &mut G) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.quantile_unchecked(u)
            })
            .collect()
    }
}
