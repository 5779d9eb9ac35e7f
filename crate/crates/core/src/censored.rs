//! Right-censored life-test samples and their likelihood.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::weibull::ReliableLifeWeibull;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Failed,
    Censored,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Failed => "failed",
            Status::Censored => "censored",
        })
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "failed" => Ok(Status::Failed),
            "censored" => Ok(Status::Censored),
            other => Err(format!("unknown status {other:?} (expected `failed` or `censored`)")),
        }
    }
}

/// Lifetimes with failed/censored status, kept sorted by time.
///
/// Any right-censoring pattern is accepted; [`CensoredSample::type2_censor`]
/// builds the canonical type-II form where the `n - r` survivors are censored
/// at the `r`-th order statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredSample {
    times: Vec<f64>,
    ln_times: Vec<f64>,
    status: Vec<Status>,
    failures: usize,
    log_p: f64,
}

impl CensoredSample {
    pub fn new(times: Vec<f64>, status: Vec<Status>) -> Result<Self> {
        if times.len() != status.len() {
            return Err(Error::invalid(format!(
                "{} times but {} status entries",
                times.len(),
                status.len()
            )));
        }
        if let Some((i, t)) = times.iter().enumerate().find(|(_, t)| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::invalid(format!("time #{} must be finite and > 0, got {t}", i + 1)));
        }
        let mut pairs: Vec<(f64, Status)> = times.into_iter().zip(status).collect();
        // failures sort ahead of censorings at tied times
        pairs.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| (a.1 == Status::Censored).cmp(&(b.1 == Status::Censored)))
        });
        let (times, status): (Vec<f64>, Vec<Status>) = pairs.into_iter().unzip();
        let ln_times: Vec<f64> = times.iter().map(|t| t.ln()).collect();
        let failures = status.iter().filter(|s| **s == Status::Failed).count();
        let log_p = ln_times
            .iter()
            .zip(&status)
            .filter(|(_, s)| **s == Status::Failed)
            .map(|(l, _)| l)
            .sum();
        Ok(Self {
            times,
            ln_times,
            status,
            failures,
            log_p,
        })
    }

    /// Every item observed to fail.
    pub fn complete(times: Vec<f64>) -> Result<Self> {
        let status = vec![Status::Failed; times.len()];
        Self::new(times, status)
    }

    /// No observations at all (prior-only analysis).
    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new()).expect("empty sample is valid")
    }

    /// Type-II censoring: keep the `r` smallest lifetimes as failures and
    /// censor the other `n - r` items at the `r`-th order statistic.
    pub fn type2_censor(complete: &[f64], r: usize) -> Result<Self> {
        let n = complete.len();
        if r == 0 || r > n {
            return Err(Error::invalid(format!("need 1 <= r <= n, got r = {r}, n = {n}")));
        }
        if let Some(t) = complete.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::invalid(format!("lifetimes must be finite and > 0, got {t}")));
        }
        let mut sorted = complete.to_vec();
        sorted.sort_by(f64::total_cmp);
        let cut = sorted[r - 1];
        let mut times = sorted[..r].to_vec();
        times.resize(n, cut);
        let mut status = vec![Status::Failed; r];
        status.resize(n, Status::Censored);
        Self::new(times, status)
    }

    /// Re-censor this sample's times at its `r`-th smallest value.
    pub fn recensor(&self, r: usize) -> Result<Self> {
        Self::type2_censor(&self.times, r)
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    pub fn r(&self) -> usize {
        self.failures
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn status(&self) -> &[Status] {
        &self.status
    }

    pub fn ln_times(&self) -> &[f64] {
        &self.ln_times
    }

    /// Indices (into [`times`](Self::times)) of observed failures.
    pub fn failed_indices(&self) -> Vec<usize> {
        self.indices_with(Status::Failed)
    }

    pub fn censored_indices(&self) -> Vec<usize> {
        self.indices_with(Status::Censored)
    }

    fn indices_with(&self, which: Status) -> Vec<usize> {
        self.status
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == which)
            .map(|(i, _)| i)
            .collect()
    }

    /// ln P, the log of the product of failure times.
    pub fn log_p(&self) -> f64 {
        self.log_p
    }

    /// `S(β) = Σ x_i^β` over all `n` items, accumulated in ascending order.
    pub fn s_of_beta(&self, beta: f64) -> f64 {
        self.ln_times.iter().map(|l| (beta * l).exp()).sum()
    }

    /// ln S(β) via log-sum-exp; `-inf` for an empty sample.
    pub fn ln_s_of_beta(&self, beta: f64) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for l in &self.ln_times {
            max = max.max(beta * l);
        }
        if max == f64::NEG_INFINITY {
            return max;
        }
        let sum: f64 = self.ln_times.iter().map(|l| (beta * l - max).exp()).sum();
        max + sum.ln()
    }

    /// `Σ x_i^β ln x_i`, the β-derivative of `S`.
    pub fn ds_of_beta(&self, beta: f64) -> f64 {
        self.ln_times.iter().map(|l| (beta * l).exp() * l).sum()
    }

    /// Log of the censored Weibull likelihood, including the `(Kβ)^r` factor:
    /// `r ln(Kβ / x_R^β) + (β-1) ln P - K S(β) / x_R^β`.
    pub fn log_likelihood(&self, p: &ReliableLifeWeibull) -> f64 {
        let beta = p.beta();
        let k = p.k();
        let ln_xr = p.x_r().ln();
        let r = self.failures as f64;
        let hazard_term = if self.times.is_empty() {
            0.0
        } else {
            (k.ln() + self.ln_s_of_beta(beta) - beta * ln_xr).exp()
        };
        r * ((k * beta).ln() - beta * ln_xr) + (beta - 1.0) * self.log_p - hazard_term
    }

    /// Parse the `time,status` CSV format (header required).
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let time_col = headers.iter().position(|h| h == "time");
        let status_col = headers.iter().position(|h| h == "status");
        let (time_col, status_col) = match (time_col, status_col) {
            (Some(t), Some(s)) => (t, s),
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: "header must contain `time` and `status` columns".into(),
                })
            }
        };
        let mut times = Vec::new();
        let mut status = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line() as usize).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            let field = |i: usize| {
                record.get(i).ok_or_else(|| Error::Parse {
                    line,
                    message: format!("missing column {}", i + 1),
                })
            };
            let raw = field(time_col)?;
            let t: f64 = raw.parse().map_err(|_| Error::Parse {
                line,
                message: format!("time {raw:?} is not a number"),
            })?;
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Parse {
                    line,
                    message: format!("time must be positive, got {raw}"),
                });
            }
            let s: Status = field(status_col)?
                .parse()
                .map_err(|message| Error::Parse { line, message })?;
            times.push(t);
            status.push(s);
        }
        Self::new(times, status)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("time,status\n");
        for (t, s) in self.times.iter().zip(&self.status) {
            out.push_str(&format!("{t},{s}\n"));
        }
        out
    }
}
