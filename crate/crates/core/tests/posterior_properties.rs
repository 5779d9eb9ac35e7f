mod common;

use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;
use weibayes::posterior::{self, estimate_from_integrands, log_integrands, JointPosterior};
use weibayes::prior::{hyper_a, igg_pdf, ln_conditional_posterior_pdf, ln_igg_pdf};
use weibayes::rng::substream;
use weibayes::simulation::{build_case, CaseLabel, WSetting};
use weibayes::{BetaInterval, CensoredSample, PriorSpec, QuadratureSettings, ReliableLifeWeibull, WRule};

fn settings() -> QuadratureSettings {
    QuadratureSettings::default()
}

fn rule_for(name: &str, iv: &BetaInterval) -> WRule {
    match name {
        "type1-β2-complete" | "narrow-censored" | "empty" => WRule::ConstantOverBeta(1.1),
        "type2-xbar10" | "small-beta-xbar0.1" => WRule::ConstantOverBeta(1.4),
        "type3-censored" | "R0.9-n10-r6" => WRule::ConstantOverBeta(1.8),
        "fixed-w" | "small-beta-fixed-w" => WRule::FixedValue(1.0 / iv.beta1() + 0.1),
        "unit-w-n8" => WRule::Unit,
        other => panic!("unknown scenario {other}"),
    }
}

#[test]
fn quadrature_matches_brute_force_oracle() {
    for sc in common::scenarios() {
        let iv = BetaInterval::new(sc.beta1, sc.beta2).unwrap();
        let spec = PriorSpec::new(iv, sc.xbar_r, sc.reliability, rule_for(sc.name, &iv)).unwrap();
        let est = posterior::estimate(&spec, &sc.sample(), &settings()).unwrap();
        assert!(est.converged, "{}", sc.name);
        let (x_bf, b_bf) = sc.brute_force_means(1_000_001);
        assert!((est.x_r_tilde / x_bf - 1.0).abs() < 1e-6, "{}: {} vs {x_bf}", sc.name, est.x_r_tilde);
        assert!((est.beta_tilde / b_bf - 1.0).abs() < 1e-6, "{}: {} vs {b_bf}", sc.name, est.beta_tilde);
    }
}

#[test]
fn empty_sample_returns_prior_means_for_all_cases() {
    for beta in [2.0, 1.0, 0.6] {
        for label in CaseLabel::ALL {
            let case = build_case(label, beta).unwrap();
            for w in WSetting::STANDARD {
                let spec = PriorSpec::new(case.interval, case.xbar_r, 0.98, w.resolve(&case.interval)).unwrap();
                let est = posterior::estimate(&spec, &CensoredSample::empty(), &settings()).unwrap();
                assert!((est.x_r_tilde / case.xbar_r - 1.0).abs() < 1e-6, "{label} {w}");
                assert!((est.beta_tilde / case.interval.midpoint() - 1.0).abs() < 1e-6, "{label} {w}");
            }
        }
    }
}

#[test]
fn prior_mean_identity_for_the_nine_priors() {
    for beta_true in [2.0, 1.0, 0.6] {
        for label in CaseLabel::ALL {
            let case = build_case(label, beta_true).unwrap();
            let iv = case.interval;
            for w in WSetting::STANDARD {
                let rule = w.resolve(&iv);
                for j in 0..3 {
                    let beta = iv.beta1() + iv.width() * j as f64 / 2.0;
                    let m = common::igg_mean_numeric(case.xbar_r, rule.weight(beta), beta, -80.0, 500.0, 600_000);
                    assert!((m / case.xbar_r - 1.0).abs() < 1e-6, "{label} {w} beta={beta}: {m}");
                }
            }
        }
    }
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> f64 {
    let h = (hi - lo) / steps as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..steps {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// `∫ x^p igg(x) dx` over `s = ln x`.
fn igg_moment(p: f64, a: f64, w: f64, beta: f64) -> f64 {
    simpson(|s| ((p + 1.0) * s + ln_igg_pdf(s.exp(), a.ln(), w, beta)).exp(), -40.0, 400.0, 400_000)
}

#[test]
fn inverted_gamma_curves_normalize_and_match_closed_form_mean() {
    // a = 1, β = 1, w = 1.1, 1.4, ..., 3.1
    for k in 0..=6 {
        let w = 1.1 + 0.3 * k as f64;
        let mass = igg_moment(0.0, 1.0, w, 1.0);
        assert!((mass - 1.0).abs() < 1e-6, "w={w}: mass {mass}");
        let mean = igg_moment(1.0, 1.0, w, 1.0);
        let exact = (ln_gamma(w - 1.0) - ln_gamma(w)).exp();
        assert!((mean / exact - 1.0).abs() < 1e-6, "w={w}: mean {mean} vs {exact}");
    }
}

#[test]
fn spread_shrinks_as_weight_grows() {
    let mut last = f64::INFINITY;
    for w in [2.3, 2.6, 2.9] {
        let m1 = igg_moment(1.0, 1.0, w, 1.0);
        let m2 = igg_moment(2.0, 1.0, w, 1.0);
        let var = m2 - m1 * m1;
        let exact = 1.0 / ((w - 1.0) * (w - 1.0) * (w - 2.0));
        assert!((var / exact - 1.0).abs() < 1e-4, "w={w}: {var} vs {exact}");
        assert!(var < last);
        last = var;
    }
}

#[test]
fn right_tail_decays_as_power_law() {
    for (beta, w) in [(1.0, 1.1), (1.5, 2.0), (3.0, 0.5)] {
        let x = 1e8;
        let slope = (igg_pdf(2.0 * x, 1.0, w, beta).ln() - igg_pdf(x, 1.0, w, beta).ln()) / 2f64.ln();
        assert!((slope + beta * w + 1.0).abs() < 1e-6, "beta={beta} w={w}: slope {slope}");
    }
}

#[test]
fn narrow_interval_reduces_to_conditional_posterior_mean() {
    let sample = CensoredSample::type2_censor(&[0.4, 0.9, 1.3, 2.0, 2.6], 3).unwrap();
    let iv = BetaInterval::new(1.0, 1.0 + 1e-6).unwrap();
    let spec = PriorSpec::new(iv, 2.0, 0.98, WRule::ConstantOverBeta(1.4)).unwrap();
    let est = posterior::estimate(&spec, &sample, &settings()).unwrap();
    let (w, a) = (1.4, hyper_a(2.0, 1.4, 1.0).unwrap());
    let k = -(0.98f64).ln();
    let big_a = a + k * sample.s_of_beta(1.0);
    let wr = w + 3.0;
    let cond_mean = big_a * (ln_gamma(wr - 1.0) - ln_gamma(wr)).exp();
    assert!((est.x_r_tilde / cond_mean - 1.0).abs() < 1e-4, "{} vs {cond_mean}", est.x_r_tilde);
    assert!((est.beta_tilde - 1.0).abs() < 1e-6);
}

#[test]
fn ratios_survive_huge_common_factors() {
    let sample = CensoredSample::complete(vec![0.5, 1.2, 2.3]).unwrap();
    let spec = PriorSpec::new(BetaInterval::new(1.0, 3.0).unwrap(), 1.0, 0.98, WRule::ConstantOverBeta(1.1)).unwrap();
    let base = posterior::estimate(&spec, &sample, &settings()).unwrap();
    for shift in [-1500.0, -700.0, 700.0, 1500.0] {
        let shifted = estimate_from_integrands(
            |b| log_integrands(b, &spec, &sample).map(|v| v.map(|l| l + shift)),
            1.0,
            3.0,
            &settings(),
        )
        .unwrap();
        assert!((shifted.x_r_tilde / base.x_r_tilde - 1.0).abs() < 1e-12);
        assert!((shifted.beta_tilde / base.beta_tilde - 1.0).abs() < 1e-12);
    }
}

#[test]
fn posterior_concentrates_on_the_truth() {
    let model = ReliableLifeWeibull::new(1.0, 1.0, 0.98).unwrap();
    let spec = PriorSpec::new(BetaInterval::new(0.7, 1.3).unwrap(), 1.0, 0.98, WRule::ConstantOverBeta(1.1)).unwrap();
    let mut rng = substream(17, &[0]);
    let data = model.sample(5000, &mut rng);
    let mut beta_err = Vec::new();
    for n in [50, 500, 5000] {
        let est = posterior::estimate(&spec, &CensoredSample::complete(data[..n].to_vec()).unwrap(), &settings()).unwrap();
        beta_err.push((est.beta_tilde - 1.0).abs());
        if n == 5000 {
            assert!((est.x_r_tilde - 1.0).abs() < 0.1, "{}", est.x_r_tilde);
        }
    }
    assert!(beta_err[2] < 0.03, "{beta_err:?}");
}

#[test]
fn joint_density_integrates_to_one() {
    let sample = CensoredSample::type2_censor(&[0.3, 0.7, 1.4, 2.2], 3).unwrap();
    let spec = PriorSpec::new(BetaInterval::new(0.7, 1.3).unwrap(), 1.0, 0.98, WRule::ConstantOverBeta(1.4)).unwrap();
    let joint = JointPosterior::new(&spec, &sample, &settings()).unwrap();
    let inner = |beta: f64| simpson(|s| s.exp() * joint.pdf(s.exp(), beta).unwrap(), -30.0, 200.0, 40_000);
    let total = simpson(inner, 0.7, 1.3, 200);
    assert!((total - 1.0).abs() < 1e-4, "{total}");
}

fn arb_sample() -> impl Strategy<Value = CensoredSample> {
    prop::collection::vec(0.05f64..20.0, 2..10).prop_flat_map(|v| {
        let n = v.len();
        (Just(v), 1..=n).prop_map(|(v, r)| CensoredSample::type2_censor(&v, r).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conditional_posterior_is_prior_times_likelihood(
        sample in arb_sample(),
        beta in 0.3f64..4.0,
        extra in 0.05f64..3.0,
        xbar in 0.1f64..10.0,
    ) {
        let w = 1.0 / beta + extra;
        let a = hyper_a(xbar, w, beta).unwrap();
        let diff = |x: f64| {
            let model = ReliableLifeWeibull::new(x, beta, 0.98).unwrap();
            ln_conditional_posterior_pdf(x, w, a, &sample, beta, 0.98)
                - ln_igg_pdf(x, a.ln(), w, beta)
                - sample.log_likelihood(&model)
        };
        let d0 = diff(xbar);
        for x in [0.3 * xbar, 0.8 * xbar, 2.0 * xbar, 5.0 * xbar] {
            let d = diff(x);
            prop_assert!((d - d0).abs() <= 1e-10 * (1.0 + d0.abs()), "{d} vs {d0}");
        }
    }

    #[test]
    fn estimates_are_scale_equivariant(sample in arb_sample(), c in 1e-3f64..1e3, widen in 0.1f64..1.5) {
        let iv = BetaInterval::new(0.8, 0.8 + widen).unwrap();
        let p0 = PriorSpec::new(iv, 1.0, 0.98, WRule::ConstantOverBeta(1.4)).unwrap();
        let p1 = p0.with_xbar_r(c).unwrap();
        let scaled: Vec<f64> = sample.times().iter().map(|t| t * c).collect();
        let s1 = CensoredSample::new(scaled, sample.status().to_vec()).unwrap();
        let e0 = posterior::estimate(&p0, &sample, &settings()).unwrap();
        let e1 = posterior::estimate(&p1, &s1, &settings()).unwrap();
        prop_assert!((e1.x_r_tilde / (c * e0.x_r_tilde) - 1.0).abs() < 1e-8);
        prop_assert!((e1.beta_tilde / e0.beta_tilde - 1.0).abs() < 1e-8);
    }

    #[test]
    fn shape_estimate_stays_in_the_interval(sample in arb_sample(), b1 in 0.2f64..3.0, width in 0.01f64..3.0) {
        let iv = BetaInterval::new(b1, b1 + width).unwrap();
        let spec = PriorSpec::new(iv, 1.0, 0.98, WRule::ConstantOverBeta(1.2)).unwrap();
        let e = posterior::estimate(&spec, &sample, &settings()).unwrap();
        prop_assert!(e.beta_tilde >= iv.beta1() && e.beta_tilde <= iv.beta2());
        prop_assert!(e.x_r_tilde > 0.0 && e.x_r_tilde.is_finite());
    }
}
