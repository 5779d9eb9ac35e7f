//! Oracles shared by the integration tests. Nothing here calls the library's
//! quadrature, log-gamma or root finder.

#![allow(dead_code)]

use statrs::function::gamma::ln_gamma;

/// Posterior inputs spelled out without any library types.
pub struct Scenario {
    pub name: &'static str,
    pub beta1: f64,
    pub beta2: f64,
    pub xbar_r: f64,
    pub reliability: f64,
    pub w: fn(f64) -> f64,
    pub times: Vec<f64>,
    /// Number of failures; the remaining times are censored.
    pub r: usize,
}

impl Scenario {
    /// The same data as a library sample, survivors kept at their own times.
    pub fn sample(&self) -> weibayes::CensoredSample {
        let status = (0..self.times.len())
            .map(|i| if i < self.r { weibayes::Status::Failed } else { weibayes::Status::Censored })
            .collect();
        weibayes::CensoredSample::new(self.times.clone(), status).unwrap()
    }

    fn s_of_beta(&self, beta: f64) -> f64 {
        self.times.iter().map(|t| t.powf(beta)).sum()
    }

    fn ln_p(&self) -> f64 {
        self.times[..self.r].iter().map(|t| t.ln()).sum()
    }

    /// The three posterior log-integrands at `beta`.
    fn log_terms(&self, beta: f64) -> [f64; 3] {
        let k = -self.reliability.ln();
        let w = (self.w)(beta);
        let ln_a = self.xbar_r.ln() + ln_gamma(w) - ln_gamma(w - 1.0 / beta);
        let big_a = (beta * ln_a).exp() + k * self.s_of_beta(beta);
        let r = self.r as f64;
        let common = beta * w * ln_a + beta * self.ln_p() - ln_gamma(w);
        let term = |rh: f64, mh: f64| {
            let e = r + w - mh;
            rh * beta.ln() + common - e * big_a.ln() + ln_gamma(e)
        };
        [term(r, 0.0), term(r, 1.0 / beta), term(r + 1.0, 0.0)]
    }

    /// Posterior means of `(x_R, β)` by the trapezoid rule on `nodes` points.
    pub fn brute_force_means(&self, nodes: usize) -> (f64, f64) {
        let h = (self.beta2 - self.beta1) / (nodes - 1) as f64;
        let vals: Vec<[f64; 3]> = (0..nodes)
            .map(|i| self.log_terms(self.beta1 + i as f64 * h))
            .collect();
        let mut shift = [f64::NEG_INFINITY; 3];
        for v in &vals {
            for m in 0..3 {
                shift[m] = shift[m].max(v[m]);
            }
        }
        let mut sums = [0.0; 3];
        for (i, v) in vals.iter().enumerate() {
            let wgt = if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 };
            for m in 0..3 {
                sums[m] += wgt * (v[m] - shift[m]).exp();
            }
        }
        let ln_i: Vec<f64> = (0..3).map(|m| shift[m] + (sums[m] * h).ln()).collect();
        ((ln_i[1] - ln_i[0]).exp(), (ln_i[2] - ln_i[0]).exp())
    }
}

/// Ten posterior scenarios covering all interval types, anticipated lives,
/// weight rules, censoring and the empty sample.
pub fn scenarios() -> Vec<Scenario> {
    let t3 = vec![0.62, 1.35, 2.10];
    let t5 = vec![0.21, 0.48, 0.93, 1.40, 2.75];
    let t10 = vec![0.05, 0.11, 0.32, 0.40, 0.77, 0.91, 1.6, 2.2, 3.9, 8.5];
    let t8 = vec![0.55, 0.71, 0.80, 0.94, 1.02, 1.18, 1.30, 1.52];
    vec![
        Scenario { name: "type1-β2-complete", beta1: 1.0, beta2: 3.0, xbar_r: 1.0, reliability: 0.98, w: |b| 1.1 / b, times: t3.clone(), r: 3 },
        Scenario { name: "type2-xbar10", beta1: 2.0, beta2: 4.0, xbar_r: 10.0, reliability: 0.98, w: |b| 1.4 / b, times: t3.clone(), r: 3 },
        Scenario { name: "type3-censored", beta1: 0.5, beta2: 2.0, xbar_r: 0.1, reliability: 0.98, w: |b| 1.8 / b, times: t5.clone(), r: 3 },
        Scenario { name: "fixed-w", beta1: 0.7, beta2: 1.3, xbar_r: 1.0, reliability: 0.98, w: |_| 1.0 / 0.7 + 0.1, times: t3.clone(), r: 3 },
        Scenario { name: "narrow-censored", beta1: 1.0, beta2: 1.3, xbar_r: 10.0, reliability: 0.98, w: |b| 1.1 / b, times: t5.clone(), r: 3 },
        Scenario { name: "small-beta-fixed-w", beta1: 0.3, beta2: 0.9, xbar_r: 1.0, reliability: 0.98, w: |_| 1.0 / 0.3 + 0.1, times: t5.clone(), r: 3 },
        Scenario { name: "small-beta-xbar0.1", beta1: 0.3, beta2: 0.6, xbar_r: 0.1, reliability: 0.98, w: |b| 1.4 / b, times: t3, r: 3 },
        Scenario { name: "R0.9-n10-r6", beta1: 0.6, beta2: 0.9, xbar_r: 1.0, reliability: 0.9, w: |b| 1.8 / b, times: t10, r: 6 },
        Scenario { name: "unit-w-n8", beta1: 1.5, beta2: 4.0, xbar_r: 2.0, reliability: 0.98, w: |_| 1.0, times: t8, r: 8 },
        Scenario { name: "empty", beta1: 1.0, beta2: 3.0, xbar_r: 1.0, reliability: 0.98, w: |b| 1.1 / b, times: vec![], r: 0 },
    ]
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    (d, kolmogorov_q(lambda))
}

/// `Q(λ) = 2 Σ (−1)^{k−1} exp(−2k²λ²)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `x_R`-marginal IGG prior mean for a given shape, by Simpson's rule in
/// `s = ln x` on `[lo, hi]`.
pub fn igg_mean_numeric(xbar_r: f64, w: f64, beta: f64, lo: f64, hi: f64, steps: usize) -> f64 {
    let ln_a = xbar_r.ln() + ln_gamma(w) - ln_gamma(w - 1.0 / beta);
    let ln_norm = beta.ln() + beta * w * ln_a - ln_gamma(w);
    // x · pdf(x) · dx/ds = exp(ln_norm + (1 − βw) s − e^{−β(s − ln a)})
    let f = |s: f64| (ln_norm + (1.0 - beta * w) * s - (-beta * (s - ln_a)).exp()).exp();
    let steps = steps + steps % 2;
    let h = (hi - lo) / steps as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..steps {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}
