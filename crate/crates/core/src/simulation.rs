//! Monte Carlo comparison of the Bayes estimators against the MLE.
//!
//! A "case" pairs one of three shape intervals (centered on the true shape,
//! biased upward, biased downward) with one of three anticipated reliable
//! lives (true value, ten times larger, ten times smaller), giving cases
//! I–IX. Each case is crossed with weight settings `w = c/β` or
//! `w = 1/β1 + d`. Replication `i` of a design draws its sample from the
//! stream `(seed; β, n, r, i)`, so every cell of a table sees the same
//! samples and any cell can be recomputed alone.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::censored::CensoredSample;
use crate::error::{Error, Result};
use crate::mle::{self, CalibrationCache, UnbiasingEntry};
use crate::posterior::{self, PosteriorEstimate};
use crate::prior::{BetaInterval, PriorSpec, WRule};
use crate::quadrature::QuadratureSettings;
use crate::rng::substream;
use crate::weibull::ReliableLifeWeibull;

/// Seed used by the reference runs and the command-line examples.
pub const DEFAULT_SEED: u64 = 42;

/// Prior cases I–IX.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseLabel {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
    IX,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 9] = [
        CaseLabel::I,
        CaseLabel::II,
        CaseLabel::III,
        CaseLabel::IV,
        CaseLabel::V,
        CaseLabel::VI,
        CaseLabel::VII,
        CaseLabel::VIII,
        CaseLabel::IX,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Shape-interval type 1, 2 or 3.
    pub fn interval_type(self) -> usize {
        self.index() / 3 + 1
    }

    /// Anticipated reliable life as a multiple of the true one.
    pub fn xbar_factor(self) -> f64 {
        [1.0, 10.0, 0.1][self.index() % 3]
    }

    pub fn as_str(self) -> &'static str {
        ["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX"][self.index()]
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseLabel::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown prior case {s:?} (expected I..IX)")))
    }
}

/// Shape intervals of types 1–3 for the three shapes of the study.
pub fn reference_intervals(true_beta: f64) -> Result<[BetaInterval; 3]> {
    let raw = if true_beta == 2.0 {
        [(1.0, 3.0), (2.0, 4.0), (0.5, 2.0)]
    } else if true_beta == 1.0 {
        [(0.7, 1.3), (1.0, 1.3), (0.7, 1.0)]
    } else if true_beta == 0.6 {
        [(0.3, 0.9), (0.6, 0.9), (0.3, 0.6)]
    } else {
        return Err(Error::invalid(format!(
            "no built-in shape intervals for beta = {true_beta}; supply intervals explicitly"
        )));
    };
    Ok([
        BetaInterval::new(raw[0].0, raw[0].1)?,
        BetaInterval::new(raw[1].0, raw[1].1)?,
        BetaInterval::new(raw[2].0, raw[2].1)?,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseDefinition {
    pub label: CaseLabel,
    pub interval: BetaInterval,
    pub xbar_r: f64,
}

/// Case with the built-in intervals and a true reliable life of 1.
pub fn build_case(label: CaseLabel, true_beta: f64) -> Result<CaseDefinition> {
    Ok(build_case_with(label, &reference_intervals(true_beta)?, 1.0))
}

pub fn build_case_with(label: CaseLabel, intervals: &[BetaInterval; 3], true_x_r: f64) -> CaseDefinition {
    CaseDefinition {
        label,
        interval: intervals[label.interval_type() - 1],
        xbar_r: label.xbar_factor() * true_x_r,
    }
}

/// Weight settings of the study, resolved against a case's interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WSetting {
    /// `w = c/β`
    OverBeta(f64),
    /// `w = 1/β1 + d`
    InverseBeta1Plus(f64),
}

impl WSetting {
    pub const STANDARD: [WSetting; 4] = [
        WSetting::OverBeta(1.1),
        WSetting::OverBeta(1.4),
        WSetting::OverBeta(1.8),
        WSetting::InverseBeta1Plus(0.1),
    ];

    pub fn resolve(&self, interval: &BetaInterval) -> WRule {
        match *self {
            WSetting::OverBeta(c) => WRule::ConstantOverBeta(c),
            WSetting::InverseBeta1Plus(d) => WRule::FixedValue(1.0 / interval.beta1() + d),
        }
    }
}

impl fmt::Display for WSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WSetting::OverBeta(c) => write!(f, "{c}/beta"),
            WSetting::InverseBeta1Plus(d) => write!(f, "1/beta1+{d}"),
        }
    }
}

impl FromStr for WSetting {
    type Err = Error;

    /// `"<c>/beta"` or `"1/beta1+<d>"`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::invalid(format!("unrecognized w setting {s:?} (try \"1.1/beta\" or \"1/beta1+0.1\")"));
        if let Some(d) = t.strip_prefix("1/beta1+") {
            let d: f64 = d.parse().map_err(|_| bad())?;
            return Ok(WSetting::InverseBeta1Plus(d));
        }
        if let Some(c) = t.strip_suffix("/beta") {
            let c: f64 = c.parse().map_err(|_| bad())?;
            return Ok(WSetting::OverBeta(c));
        }
        Err(bad())
    }
}

/// Bias, standard deviation and root mean square error of an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerformanceMetrics {
    pub bias: f64,
    pub std_dev: f64,
    pub rmse: f64,
    pub count: usize,
    pub failures: usize,
}

/// Δ = mean − true, DS with divisor `N`, RQ = √(DS² + Δ²).
pub fn metrics(estimates: &[f64], true_value: f64) -> Result<PerformanceMetrics> {
    if estimates.is_empty() {
        return Err(Error::invalid("metrics need at least one estimate"));
    }
    let count = estimates.len();
    let mean = estimates.iter().sum::<f64>() / count as f64;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / count as f64;
    let bias = mean - true_value;
    let std_dev = var.sqrt();
    Ok(PerformanceMetrics {
        bias,
        std_dev,
        rmse: (var + bias * bias).sqrt(),
        count,
        failures: 0,
    })
}

fn metrics_with_failures(estimates: &[f64], true_value: f64, failures: usize) -> Result<PerformanceMetrics> {
    let mut m = metrics(estimates, true_value).map_err(|_| {
        Error::NonConvergence(format!("all {failures} replications failed"))
    })?;
    m.failures = failures;
    Ok(m)
}

/// Experimental design for one table of Bayes results.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub true_beta: f64,
    pub true_x_r: f64,
    pub reliability: f64,
    pub n: usize,
    pub r: usize,
    pub replications: usize,
    pub prior_cases: Vec<CaseLabel>,
    pub w_settings: Vec<WSetting>,
    pub seed: u64,
    pub intervals: [BetaInterval; 3],
}

impl ExperimentConfig {
    /// All nine cases and the four weight settings, true `x_R = 1`, `R = 0.98`.
    pub fn reference(true_beta: f64, n: usize, r: usize, replications: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            true_beta,
            true_x_r: 1.0,
            reliability: 0.98,
            n,
            r,
            replications,
            prior_cases: CaseLabel::ALL.to_vec(),
            w_settings: WSetting::STANDARD.to_vec(),
            seed,
            intervals: reference_intervals(true_beta)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.r > self.n {
            return Err(Error::invalid(format!("need 1 <= r <= n, got n = {}, r = {}", self.n, self.r)));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications must be >= 1"));
        }
        ReliableLifeWeibull::new(self.true_x_r, self.true_beta, self.reliability)?;
        Ok(())
    }

    pub fn true_model(&self) -> ReliableLifeWeibull {
        ReliableLifeWeibull::new(self.true_x_r, self.true_beta, self.reliability).expect("validated")
    }

    pub fn case(&self, label: CaseLabel) -> CaseDefinition {
        build_case_with(label, &self.intervals, self.true_x_r)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: ExperimentConfigJson = serde_json::from_str(s)?;
        raw.try_into()
    }

    pub fn from_json_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// On-disk experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfigJson {
    pub true_beta: f64,
    #[serde(rename = "true_x_R", default = "one")]
    pub true_x_r: f64,
    #[serde(rename = "R", default = "default_reliability")]
    pub reliability: f64,
    pub n: usize,
    pub r: usize,
    pub replications: usize,
    pub prior_cases: Vec<String>,
    pub w_rules: Vec<String>,
    pub seed: u64,
    /// Shape intervals of types 1–3; required unless `true_beta` is 2, 1 or 0.6.
    #[serde(default)]
    pub intervals: Option<[[f64; 2]; 3]>,
}

fn one() -> f64 {
    1.0
}

fn default_reliability() -> f64 {
    0.98
}

impl TryFrom<ExperimentConfigJson> for ExperimentConfig {
    type Error = Error;

    fn try_from(j: ExperimentConfigJson) -> Result<Self> {
        let intervals = match j.intervals {
            Some(iv) => [
                BetaInterval::new(iv[0][0], iv[0][1])?,
                BetaInterval::new(iv[1][0], iv[1][1])?,
                BetaInterval::new(iv[2][0], iv[2][1])?,
            ],
            None => reference_intervals(j.true_beta)?,
        };
        let cfg = ExperimentConfig {
            true_beta: j.true_beta,
            true_x_r: j.true_x_r,
            reliability: j.reliability,
            n: j.n,
            r: j.r,
            replications: j.replications,
            prior_cases: j.prior_cases.iter().map(|s| s.parse()).collect::<Result<_>>()?,
            w_settings: j.w_rules.iter().map(|s| s.parse()).collect::<Result<_>>()?,
            seed: j.seed,
            intervals,
        };
        if cfg.prior_cases.is_empty() || cfg.w_settings.is_empty() {
            return Err(Error::invalid("config needs at least one prior case and one w rule"));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// The `i`-th type-II censored sample of a design.
pub fn replication_sample(
    model: &ReliableLifeWeibull,
    n: usize,
    r: usize,
    seed: u64,
    replication: usize,
) -> Result<CensoredSample> {
    let path = [model.beta().to_bits(), n as u64, r as u64, replication as u64];
    let mut rng = substream(seed, &path);
    CensoredSample::type2_censor(&model.sample(n, &mut rng), r)
}

/// Posterior estimates for every replication of `cfg` under `spec`, in
/// replication order. Failed or non-converged evaluations are `None`.
pub fn bayes_replications(
    cfg: &ExperimentConfig,
    spec: &PriorSpec,
    settings: &QuadratureSettings,
) -> Result<Vec<Option<PosteriorEstimate>>> {
    let model = cfg.true_model();
    (0..cfg.replications)
        .into_par_iter()
        .map(|i| {
            let sample = replication_sample(&model, cfg.n, cfg.r, cfg.seed, i)?;
            match posterior::estimate(spec, &sample, settings) {
                Ok(est) if est.converged => Ok(Some(est)),
                Ok(_) | Err(Error::NonConvergence(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Metrics of `x̃_R` and `β̃` for one (case, weight setting) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellResult {
    pub case: CaseLabel,
    pub setting: WSetting,
    pub x_r: PerformanceMetrics,
    pub beta: PerformanceMetrics,
}

/// Run every replication of one cell. An elicitation-constraint violation
/// aborts the cell.
pub fn run_cell(
    cfg: &ExperimentConfig,
    case: &CaseDefinition,
    setting: WSetting,
    settings: &QuadratureSettings,
) -> Result<CellResult> {
    let rule = setting.resolve(&case.interval);
    let spec = PriorSpec::new(case.interval, case.xbar_r, cfg.reliability, rule)?;
    let estimates = bayes_replications(cfg, &spec, settings)?;
    let failures = estimates.iter().filter(|e| e.is_none()).count();
    let ok: Vec<&PosteriorEstimate> = estimates.iter().flatten().collect();
    let xs: Vec<f64> = ok.iter().map(|e| e.x_r_tilde).collect();
    let bs: Vec<f64> = ok.iter().map(|e| e.beta_tilde).collect();
    Ok(CellResult {
        case: case.label,
        setting,
        x_r: metrics_with_failures(&xs, cfg.true_x_r, failures)?,
        beta: metrics_with_failures(&bs, cfg.true_beta, failures)?,
    })
}

/// Bayes results for every case × setting of `cfg`, in case order.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesTable {
    pub title: String,
    pub settings: Vec<WSetting>,
    pub rows: Vec<(CaseLabel, Vec<CellResult>)>,
}

pub fn run_experiment(cfg: &ExperimentConfig, settings: &QuadratureSettings) -> Result<BayesTable> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.prior_cases.len());
    for &label in &cfg.prior_cases {
        let case = cfg.case(label);
        let cells = cfg
            .w_settings
            .iter()
            .map(|&s| run_cell(cfg, &case, s, settings))
            .collect::<Result<Vec<_>>>()?;
        rows.push((label, cells));
    }
    Ok(BayesTable {
        title: format!(
            "Bayes estimators, beta = {}, n = {}, r = {}",
            cfg.true_beta, cfg.n, cfg.r
        ),
        settings: cfg.w_settings.clone(),
        rows,
    })
}

/// MLE performance for one sample design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleRow {
    pub n: usize,
    pub r: usize,
    pub x_r_hat: PerformanceMetrics,
    pub beta_hat: PerformanceMetrics,
    /// Metrics of the unbiased shape `β̄ = B_{n,r} β̂`.
    pub beta_bar: PerformanceMetrics,
    pub b: f64,
}

impl MleRow {
    pub fn ds_beta_bar(&self) -> f64 {
        self.beta_bar.std_dev
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_mle_row(
    true_beta: f64,
    n: usize,
    r: usize,
    reliability: f64,
    replications: usize,
    seed: u64,
    entry: &UnbiasingEntry,
) -> Result<MleRow> {
    if entry.n != n || entry.r != r {
        return Err(Error::DesignMismatch {
            expected_n: entry.n,
            expected_r: entry.r,
            n,
            r,
        });
    }
    let model = ReliableLifeWeibull::new(1.0, true_beta, reliability)?;
    let fits: Vec<Option<mle::MleResult>> = (0..replications)
        .into_par_iter()
        .map(|i| {
            let sample = replication_sample(&model, n, r, seed, i)?;
            match mle::fit(&sample, reliability) {
                Ok(m) if m.converged => Ok(Some(m)),
                Ok(_) | Err(Error::NoFiniteMle(_)) | Err(Error::NonConvergence(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let failures = fits.iter().filter(|f| f.is_none()).count();
    let ok: Vec<&mle::MleResult> = fits.iter().flatten().collect();
    let xs: Vec<f64> = ok.iter().map(|m| m.x_r_hat).collect();
    let bs: Vec<f64> = ok.iter().map(|m| m.beta_hat).collect();
    let bars: Vec<f64> = bs.iter().map(|b| entry.b * b).collect();
    Ok(MleRow {
        n,
        r,
        x_r_hat: metrics_with_failures(&xs, 1.0, failures)?,
        beta_hat: metrics_with_failures(&bs, true_beta, failures)?,
        beta_bar: metrics_with_failures(&bars, true_beta, failures)?,
        b: entry.b,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleTable {
    pub title: String,
    pub rows: Vec<MleRow>,
}

/// Tables 3–8 (Bayes) and 3b–8b (MLE) of the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableId {
    pub number: u8,
    pub mle: bool,
}

impl TableId {
    pub fn true_beta(&self) -> f64 {
        [2.0, 1.0, 0.6][((self.number - 3) % 3) as usize]
    }

    pub fn censored(&self) -> bool {
        self.number >= 6
    }

    /// `(n, r)` rows of the MLE tables.
    pub fn mle_designs(&self) -> Vec<(usize, usize)> {
        if self.censored() {
            vec![(5, 3), (10, 4), (10, 6), (20, 8), (20, 12), (40, 16), (40, 24)]
        } else {
            [3, 5, 7, 10, 15, 22, 30].into_iter().map(|n| (n, n)).collect()
        }
    }

    /// `(n, r)` of the Bayes tables.
    pub fn bayes_design(&self) -> (usize, usize) {
        if self.censored() {
            (5, 3)
        } else {
            (3, 3)
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.number, if self.mle { "b" } else { "" })
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (digits, mle) = match t.strip_suffix('b') {
            Some(d) => (d, true),
            None => (t, false),
        };
        match digits.parse::<u8>() {
            Ok(number) if (3..=8).contains(&number) => Ok(TableId { number, mle }),
            _ => Err(Error::invalid(format!("unknown table {s:?} (expected 3..8 or 3b..8b)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Bayes(BayesTable),
    Mle(MleTable),
}

/// Options for [`reproduce_table`].
#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub replications: usize,
    pub seed: u64,
    pub quadrature: QuadratureSettings,
    /// Replications for each `B_{n,r}` calibration.
    pub b_replications: usize,
}

impl ReproduceOptions {
    pub fn new(replications: usize, seed: u64) -> Self {
        Self {
            replications,
            seed,
            quadrature: QuadratureSettings::default(),
            b_replications: 100_000,
        }
    }
}

pub fn reproduce_table(id: TableId, opts: &ReproduceOptions, cache: &mut CalibrationCache) -> Result<Table> {
    let beta = id.true_beta();
    if id.mle {
        let rows = id
            .mle_designs()
            .into_iter()
            .map(|(n, r)| {
                let entry = cache.get_or_calibrate(n, r, opts.b_replications, opts.seed)?;
                run_mle_row(beta, n, r, 0.98, opts.replications, opts.seed, &entry)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Table::Mle(MleTable {
            title: format!(
                "MLE, beta = {beta}, {}",
                if id.censored() { "type II censoring" } else { "complete sampling" }
            ),
            rows,
        }))
    } else {
        let (n, r) = id.bayes_design();
        let cfg = ExperimentConfig::reference(beta, n, r, opts.replications, opts.seed)?;
        let mut t = run_experiment(&cfg, &opts.quadrature)?;
        t.title = format!("Table {id}: {}", t.title);
        Ok(Table::Bayes(t))
    }
}

/// Two-significant-digit scientific form with a leading-dot mantissa,
/// e.g. `0.38 -> ".38E+00"`, `13 -> ".13E+02"`.
pub fn short_scientific(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { ".00E+00".into() } else { format!("{v}") };
    }
    let sign = if v < 0.0 { "-" } else { "" };
    let a = v.abs();
    let mut exp = a.log10().floor() as i32 + 1;
    let mut mantissa = (a / 10f64.powi(exp) * 100.0).round() as i64;
    if mantissa >= 100 {
        mantissa /= 10;
        exp += 1;
    }
    if mantissa < 10 {
        // a was just below a power of ten
        mantissa *= 10;
        exp -= 1;
    }
    let esign = if exp < 0 { '-' } else { '+' };
    format!("{sign}.{mantissa:02}E{esign}{:02}", exp.abs())
}

fn fmt_value(v: f64, short: bool) -> String {
    if short {
        short_scientific(v)
    } else {
        format!("{v}")
    }
}

/// Output layout for results CSVs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CsvOptions {
    pub short_scientific: bool,
    /// One line per cell and estimator with bias, DS and RQ.
    pub detailed: bool,
}

impl BayesTable {
    pub fn write_csv<W: Write>(&self, out: &mut W, opts: CsvOptions) -> Result<()> {
        if opts.detailed {
            writeln!(out, "test,w,estimator,bias,std_dev,rmse,count,failures")?;
            for (label, cells) in &self.rows {
                for c in cells {
                    for (name, m) in [("x_R", &c.x_r), ("beta", &c.beta)] {
                        writeln!(
                            out,
                            "{label},{},{name},{},{},{},{},{}",
                            c.setting,
                            fmt_value(m.bias, opts.short_scientific),
                            fmt_value(m.std_dev, opts.short_scientific),
                            fmt_value(m.rmse, opts.short_scientific),
                            m.count,
                            m.failures
                        )?;
                    }
                }
            }
            return Ok(());
        }
        let mut header = vec!["test".to_string()];
        header.extend(self.settings.iter().map(|s| format!("rq_xr[{s}]")));
        header.extend(self.settings.iter().map(|s| format!("rq_beta[{s}]")));
        header.push("failures".into());
        writeln!(out, "{}", header.join(","))?;
        for (label, cells) in &self.rows {
            let mut line = vec![label.to_string()];
            line.extend(cells.iter().map(|c| fmt_value(c.x_r.rmse, opts.short_scientific)));
            line.extend(cells.iter().map(|c| fmt_value(c.beta.rmse, opts.short_scientific)));
            line.push(cells.iter().map(|c| c.x_r.failures).sum::<usize>().to_string());
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn cell(&self, label: CaseLabel, setting: WSetting) -> Option<&CellResult> {
        self.rows
            .iter()
            .find(|(l, _)| *l == label)
            .and_then(|(_, cells)| cells.iter().find(|c| c.setting == setting))
    }
}

impl MleTable {
    pub fn write_csv<W: Write>(&self, out: &mut W, opts: CsvOptions) -> Result<()> {
        if opts.detailed {
            writeln!(out, "n,r,estimator,bias,std_dev,rmse,count,failures,B")?;
            for row in &self.rows {
                for (name, m) in [("x_R_hat", &row.x_r_hat), ("beta_hat", &row.beta_hat), ("beta_bar", &row.beta_bar)] {
                    writeln!(
                        out,
                        "{},{},{name},{},{},{},{},{},{}",
                        row.n,
                        row.r,
                        fmt_value(m.bias, opts.short_scientific),
                        fmt_value(m.std_dev, opts.short_scientific),
                        fmt_value(m.rmse, opts.short_scientific),
                        m.count,
                        m.failures,
                        row.b
                    )?;
                }
            }
            return Ok(());
        }
        writeln!(out, "n,r,rq_xr_hat,rq_beta_hat,ds_beta_bar,failures")?;
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                row.n,
                row.r,
                fmt_value(row.x_r_hat.rmse, opts.short_scientific),
                fmt_value(row.beta_hat.rmse, opts.short_scientific),
                fmt_value(row.ds_beta_bar(), opts.short_scientific),
                row.x_r_hat.failures
            )?;
        }
        Ok(())
    }
}

impl Table {
    pub fn write_csv<W: Write>(&self, out: &mut W, opts: CsvOptions) -> Result<()> {
        match self {
            Table::Bayes(t) => t.write_csv(out, opts),
            Table::Mle(t) => t.write_csv(out, opts),
        }
    }

    pub fn to_csv_string(&self, opts: CsvOptions) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, opts).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    /// Every emitted metric triple, for identity checks.
    pub fn all_metrics(&self) -> Vec<PerformanceMetrics> {
        match self {
            Table::Bayes(t) => t
                .rows
                .iter()
                .flat_map(|(_, cells)| cells.iter().flat_map(|c| [c.x_r, c.beta]))
                .collect(),
            Table::Mle(t) => t
                .rows
                .iter()
                .flat_map(|r| [r.x_r_hat, r.beta_hat, r.beta_bar])
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_grid() {
        let c = build_case(CaseLabel::I, 2.0).unwrap();
        assert_eq!((c.interval.beta1(), c.interval.beta2(), c.xbar_r), (1.0, 3.0, 1.0));
        let c = build_case(CaseLabel::VI, 0.6).unwrap();
        assert_eq!((c.interval.beta1(), c.interval.beta2(), c.xbar_r), (0.6, 0.9, 0.1));
        let c = build_case(CaseLabel::VIII, 1.0).unwrap();
        assert_eq!((c.interval.beta1(), c.interval.beta2(), c.xbar_r), (0.7, 1.0, 10.0));
        let c = build_case(CaseLabel::V, 1.0).unwrap();
        assert_eq!((c.interval.beta1(), c.interval.beta2(), c.xbar_r), (1.0, 1.3, 10.0));
        assert!(build_case(CaseLabel::I, 1.5).is_err());
        assert!("X".parse::<CaseLabel>().is_err());
        assert_eq!("VII".parse::<CaseLabel>().unwrap(), CaseLabel::VII);
    }

    #[test]
    fn metrics_examples() {
        let m = metrics(&[1.0, 1.0, 1.0], 1.0).unwrap();
        assert_eq!((m.bias, m.std_dev, m.rmse), (0.0, 0.0, 0.0));
        let m = metrics(&[0.0, 2.0], 1.0).unwrap();
        assert_eq!((m.bias, m.std_dev, m.rmse), (0.0, 1.0, 1.0));
        let m = metrics(&[2.0, 2.0], 1.0).unwrap();
        assert_eq!((m.bias, m.std_dev, m.rmse), (1.0, 0.0, 1.0));
        assert!(metrics(&[], 1.0).is_err());
    }

    #[test]
    fn w_setting_labels() {
        assert_eq!("1.1/beta".parse::<WSetting>().unwrap(), WSetting::OverBeta(1.1));
        assert_eq!("1/beta1+0.1".parse::<WSetting>().unwrap(), WSetting::InverseBeta1Plus(0.1));
        for s in WSetting::STANDARD {
            assert_eq!(s.to_string().parse::<WSetting>().unwrap(), s);
        }
        assert!("beta".parse::<WSetting>().is_err());
        let iv = BetaInterval::new(0.3, 0.9).unwrap();
        match WSetting::InverseBeta1Plus(0.1).resolve(&iv) {
            WRule::FixedValue(v) => assert!((v - (1.0 / 0.3 + 0.1)).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn table_ids() {
        let t: TableId = "6b".parse().unwrap();
        assert!(t.mle && t.censored());
        assert_eq!(t.true_beta(), 2.0);
        assert_eq!(
            t.mle_designs(),
            vec![(5, 3), (10, 4), (10, 6), (20, 8), (20, 12), (40, 16), (40, 24)]
        );
        let t: TableId = "4".parse().unwrap();
        assert_eq!((t.true_beta(), t.bayes_design()), (1.0, (3, 3)));
        assert_eq!("8".parse::<TableId>().unwrap().true_beta(), 0.6);
        assert!("9".parse::<TableId>().is_err());
        assert!("2b".parse::<TableId>().is_err());
    }

    #[test]
    fn short_scientific_format() {
        assert_eq!(short_scientific(0.38), ".38E+00");
        assert_eq!(short_scientific(13.0), ".13E+02");
        assert_eq!(short_scientific(0.097), ".97E-01");
        assert_eq!(short_scientific(170.0), ".17E+03");
        assert_eq!(short_scientific(0.999), ".10E+01");
        assert_eq!(short_scientific(1.0), ".10E+01");
        assert_eq!(short_scientific(0.0), ".00E+00");
    }

    #[test]
    fn single_replication_cell() {
        let mut cfg = ExperimentConfig::reference(2.0, 3, 3, 1, 9).unwrap();
        cfg.prior_cases = vec![CaseLabel::I];
        let case = cfg.case(CaseLabel::I);
        let settings = QuadratureSettings::default();
        let cell = run_cell(&cfg, &case, WSetting::OverBeta(1.1), &settings).unwrap();
        let est = bayes_replications(
            &cfg,
            &PriorSpec::new(case.interval, 1.0, 0.98, WRule::ConstantOverBeta(1.1)).unwrap(),
            &settings,
        )
        .unwrap()[0]
            .unwrap();
        assert_eq!(cell.x_r.std_dev, 0.0);
        assert_eq!(cell.x_r.bias, est.x_r_tilde - 1.0);
        assert_eq!(cell.beta.bias, est.beta_tilde - 2.0);
    }

    #[test]
    fn config_json() {
        let text = r#"{"true_beta": 1, "n": 3, "r": 3, "replications": 10,
            "prior_cases": ["I", "V"], "w_rules": ["1.1/beta", "1/beta1+0.1"], "seed": 5}"#;
        let cfg = ExperimentConfig::from_json_str(text).unwrap();
        assert_eq!(cfg.prior_cases, vec![CaseLabel::I, CaseLabel::V]);
        assert_eq!(cfg.reliability, 0.98);
        assert_eq!(cfg.case(CaseLabel::V).interval, BetaInterval::new(1.0, 1.3).unwrap());

        let custom = r#"{"true_beta": 1.5, "n": 3, "r": 2, "replications": 10,
            "prior_cases": ["I"], "w_rules": ["1.4/beta"], "seed": 5,
            "intervals": [[1, 2], [1.5, 2.5], [0.8, 1.5]]}"#;
        assert!(ExperimentConfig::from_json_str(custom).is_ok());
        let missing = r#"{"true_beta": 1.5, "n": 3, "r": 2, "replications": 10,
            "prior_cases": ["I"], "w_rules": ["1.4/beta"], "seed": 5}"#;
        assert!(ExperimentConfig::from_json_str(missing).is_err());
        let bad_r = r#"{"true_beta": 1, "n": 3, "r": 4, "replications": 10,
            "prior_cases": ["I"], "w_rules": ["1.4/beta"], "seed": 5}"#;
        assert!(ExperimentConfig::from_json_str(bad_r).is_err());
    }
}
