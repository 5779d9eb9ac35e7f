//! Censored-data maximum likelihood for the Weibull model and the
//! small-sample unbiasing factor of the shape estimate.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::censored::CensoredSample;
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::weibull::{k_of, ReliableLifeWeibull};

/// |g(β̂)| below this counts as converged.
pub const PROFILE_TOL: f64 = 1e-10;
const BRACKET_LO: f64 = 1e-3;
const BRACKET_HI: f64 = 1e2;
const BRACKET_LIMIT: f64 = 1e6;
const BISECTION_REL_TOL: f64 = 1e-12;
const NEWTON_STEPS: usize = 5;
pub const MIN_CALIBRATION_REPLICATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleResult {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub x_r_hat: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_admissible(s: &CensoredSample) -> Result<()> {
    let r = s.r();
    if r < 2 {
        return Err(Error::NoFiniteMle(format!(
            "need at least 2 failures, sample has {r}"
        )));
    }
    let failed: Vec<f64> = s.failed_indices().into_iter().map(|i| s.times()[i]).collect();
    if failed.iter().all(|&t| t == failed[0]) {
        return Err(Error::NoFiniteMle(
            "all failure times are equal, the shape estimate diverges".into(),
        ));
    }
    Ok(())
}

/// Profile score and its derivative at β, with the `x^β` weights rescaled by
/// their maximum.
fn profile_with_derivative(beta: f64, s: &CensoredSample, mean_ln_failed: f64) -> (f64, f64) {
    let ln_t = s.ln_times();
    let max = ln_t.iter().map(|l| beta * l).fold(f64::NEG_INFINITY, f64::max);
    let (mut sw, mut swl, mut swl2) = (0.0, 0.0, 0.0);
    for l in ln_t {
        let w = (beta * l - max).exp();
        sw += w;
        swl += w * l;
        swl2 += w * l * l;
    }
    let mean = swl / sw;
    let var = (swl2 / sw - mean * mean).max(0.0);
    (
        mean_ln_failed + 1.0 / beta - mean,
        -1.0 / (beta * beta) - var,
    )
}

fn mean_ln_failed(s: &CensoredSample) -> f64 {
    s.log_p() / s.r() as f64
}

/// `g(β) = (1/r) Σ_D ln x_i + 1/β - Σ x_i^β ln x_i / Σ x_i^β`, strictly
/// decreasing with a single root at the shape MLE.
pub fn profile_equation(beta: f64, s: &CensoredSample) -> Result<f64> {
    check_admissible(s)?;
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
    }
    Ok(profile_with_derivative(beta, s, mean_ln_failed(s)).0)
}

/// Sign-change bracket for the profile score, expanding geometrically.
pub fn bracket_root(s: &CensoredSample) -> Result<(f64, f64)> {
    check_admissible(s)?;
    let m = mean_ln_failed(s);
    let g = |b: f64| profile_with_derivative(b, s, m).0;
    let (mut lo, mut hi) = (BRACKET_LO, BRACKET_HI);
    while g(lo) <= 0.0 {
        lo /= 10.0;
        if lo < 1.0 / BRACKET_LIMIT {
            return Err(Error::NonConvergence("no lower bracket for the shape MLE".into()));
        }
    }
    while g(hi) >= 0.0 {
        hi *= 10.0;
        if hi > BRACKET_LIMIT {
            return Err(Error::NonConvergence(format!(
                "no sign change of the profile score below beta = {BRACKET_LIMIT}"
            )));
        }
    }
    Ok((lo, hi))
}

/// Shape, scale and reliable-life MLE at reliability level `reliability`.
///
/// The shape solves the profile score by bracketing, bisection and a short
/// Newton polish; then `α̂ = (S(β̂)/r)^{1/β̂}` and `x̂_R = α̂ K^{1/β̂}`.
pub fn fit(s: &CensoredSample, reliability: f64) -> Result<MleResult> {
    crate::weibull::check_reliability(reliability)?;
    let (mut lo, mut hi) = bracket_root(s)?;
    let m = mean_ln_failed(s);
    let g = |b: f64| profile_with_derivative(b, s, m);

    let mut iterations = 0;
    while hi - lo > BISECTION_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if g(mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut beta = 0.5 * (lo + hi);
    let (mut gv, mut dg) = g(beta);
    for _ in 0..NEWTON_STEPS {
        if gv.abs() < PROFILE_TOL * 1e-3 || dg == 0.0 {
            break;
        }
        let next = beta - gv / dg;
        if !(next > 0.0) {
            break;
        }
        let (gn, dn) = g(next);
        iterations += 1;
        if gn.abs() >= gv.abs() {
            break;
        }
        beta = next;
        gv = gn;
        dg = dn;
    }

    let ln_alpha = (s.ln_s_of_beta(beta) - (s.r() as f64).ln()) / beta;
    let alpha_hat = ln_alpha.exp();
    let x_r_hat = (ln_alpha + k_of(reliability).ln() / beta).exp();
    Ok(MleResult {
        alpha_hat,
        beta_hat: beta,
        x_r_hat,
        iterations,
        converged: gv.abs() < PROFILE_TOL,
    })
}

/// `B_{n,r} = 1 / E[β̂/β]` estimated by simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnbiasingEntry {
    pub n: usize,
    pub r: usize,
    #[serde(rename = "B")]
    pub b: f64,
    pub replications: usize,
    pub std_error: f64,
    pub seed: u64,
}

impl UnbiasingEntry {
    /// Identity factor, useful when no calibration is wanted.
    pub fn identity(n: usize, r: usize) -> Self {
        Self {
            n,
            r,
            b: 1.0,
            replications: 0,
            std_error: 0.0,
            seed: 0,
        }
    }
}

/// Shape-estimate ratios `β̂/β` from `replications` type-II censored samples
/// of a Weibull with shape `beta` and unit scale.
///
/// Replication `i` draws from stream `(seed, n, r, i)`. Fits without a finite
/// root are returned as `None`.
pub fn simulate_shape_ratios(
    n: usize,
    r: usize,
    replications: usize,
    seed: u64,
    beta: f64,
) -> Result<Vec<Option<f64>>> {
    if r < 2 || r > n {
        return Err(Error::invalid(format!("need 2 <= r <= n, got n = {n}, r = {r}")));
    }
    let model = crate::weibull::ShapeScaleWeibull::new(1.0, beta)?.to_reliable_life(0.5)?;
    (0..replications)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, &[n as u64, r as u64, i as u64]);
            let sample = CensoredSample::type2_censor(&model.sample(n, &mut rng), r)?;
            match fit(&sample, 0.5) {
                Ok(m) if m.converged => Ok(Some(m.beta_hat / beta)),
                Ok(_) | Err(Error::NoFiniteMle(_)) | Err(Error::NonConvergence(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Monte Carlo calibration of `B_{n,r}` on the unit Weibull. Because `β̂/β` is
/// pivotal the factor does not depend on the generating parameters.
///
/// The standard error is the delta-method one, `se(mean)/mean²`.
pub fn calibrate_b(n: usize, r: usize, replications: usize, seed: u64) -> Result<UnbiasingEntry> {
    if replications < MIN_CALIBRATION_REPLICATIONS {
        return Err(Error::invalid(format!(
            "calibration needs at least {MIN_CALIBRATION_REPLICATIONS} replications, got {replications}"
        )));
    }
    let ratios: Vec<f64> = simulate_shape_ratios(n, r, replications, seed, 1.0)?
        .into_iter()
        .flatten()
        .collect();
    let count = ratios.len() as f64;
    if ratios.len() < 2 {
        return Err(Error::NonConvergence("too few admissible calibration fits".into()));
    }
    let mean = ratios.iter().sum::<f64>() / count;
    let var = ratios.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0);
    let se_mean = (var / count).sqrt();
    Ok(UnbiasingEntry {
        n,
        r,
        b: 1.0 / mean,
        replications,
        std_error: se_mean / (mean * mean),
        seed,
    })
}

/// `β̄ = B_{n,r} β̂`; the entry must match the sample design.
pub fn unbiased_beta(beta_hat: f64, entry: &UnbiasingEntry, n: usize, r: usize) -> Result<f64> {
    if entry.n != n || entry.r != r {
        return Err(Error::DesignMismatch {
            expected_n: entry.n,
            expected_r: entry.r,
            n,
            r,
        });
    }
    Ok(entry.b * beta_hat)
}

/// On-disk cache of calibrations keyed by `(n, r, replications, seed)`.
#[derive(Debug, Clone)]
pub struct CalibrationCache {
    path: Option<PathBuf>,
    entries: Vec<UnbiasingEntry>,
}

impl CalibrationCache {
    /// Cache that lives only in memory.
    pub fn in_memory() -> Self {
        Self {
            path: None,
            entries: Vec::new(),
        }
    }

    /// Load `path` if it exists; new entries are written back to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let entries = if path.exists() {
            let mut rdr = csv::Reader::from_path(&path)?;
            rdr.deserialize().collect::<std::result::Result<Vec<UnbiasingEntry>, _>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            path: Some(path),
            entries,
        })
    }

    pub fn entries(&self) -> &[UnbiasingEntry] {
        &self.entries
    }

    pub fn lookup(&self, n: usize, r: usize, replications: usize, seed: u64) -> Option<UnbiasingEntry> {
        self.entries
            .iter()
            .find(|e| e.n == n && e.r == r && e.replications == replications && e.seed == seed)
            .copied()
    }

    pub fn get_or_calibrate(&mut self, n: usize, r: usize, replications: usize, seed: u64) -> Result<UnbiasingEntry> {
        if let Some(e) = self.lookup(n, r, replications, seed) {
            return Ok(e);
        }
        let e = calibrate_b(n, r, replications, seed)?;
        self.entries.push(e);
        self.save()?;
        Ok(e)
    }

    fn save(&self) -> Result<()> {
        if let Some(path) = &self.path {
            let mut w = csv::Writer::from_path(path)?;
            for e in &self.entries {
                w.serialize(e)?;
            }
            w.flush()?;
        }
        Ok(())
    }
}

/// Convenience: `x̂_R` as a reliable-life model, when the fit converged.
pub fn fitted_model(result: &MleResult, reliability: f64) -> Result<ReliableLifeWeibull> {
    ReliableLifeWeibull::new(result.x_r_hat, result.beta_hat, reliability)
}
