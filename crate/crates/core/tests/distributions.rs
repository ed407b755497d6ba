mod common;

use common::{integrate_positive, ks_pvalue, ks_statistic, log_uniform};
use ewmix::ew::Mode;
use ewmix::{EWParams, RngStream};
use proptest::prelude::*;

fn random_params(rng: &mut RngStream) -> EWParams {
    EWParams::new(
        log_uniform(rng, 0.2, 8.0),
        log_uniform(rng, 0.3, 6.0),
        log_uniform(rng, 0.1, 10.0),
    )
    .unwrap()
}

#[test]
fn pdf_integrates_to_one() {
    let mut rng = RngStream::new(101);
    for _ in 0..100 {
        let mut draw = || 0.05 + 19.95 * rng.unit();
        let p = EWParams::new(draw(), draw(), draw()).unwrap();
        let mass = integrate_positive(|x| p.pdf(x).unwrap(), &p, 1e-11);
        assert!((mass - 1.0).abs() < 1e-6, "{p:?}: {mass}");
    }
}

#[test]
fn cdf_derivative_is_pdf() {
    let mut rng = RngStream::new(102);
    for _ in 0..100 {
        let p = random_params(&mut rng);
        for u in [0.02, 0.2, 0.5, 0.8, 0.98] {
            let x = p.quantile(u).unwrap();
            let h = 1e-5 * x;
            let fd = (p.cdf(x + h).unwrap() - p.cdf(x - h).unwrap()) / (2.0 * h);
            let f = p.pdf(x).unwrap();
            assert!((fd - f).abs() <= 1e-5 * f, "{p:?} x={x}: {fd} vs {f}");
        }
    }
}

#[test]
fn maximum_closure_passes_ks() {
    let p = EWParams::new(0.7, 1.6, 0.4).unwrap();
    for k in [2usize, 5, 20] {
        let mut rng = RngStream::new(7).fork(k as u64);
        let mut xs: Vec<f64> = (0..100_000)
            .map(|_| (0..k).map(|_| p.sample(&mut rng)).fold(0.0, f64::max))
            .collect();
        let q = p.maximum_of(k);
        let d = ks_statistic(&mut xs, |x| q.cdf(x).unwrap());
        let pv = ks_pvalue(d, xs.len());
        assert!(pv > 0.01, "k = {k}: D = {d}, p = {pv}");
    }
}

#[test]
fn samples_follow_cdf() {
    let p = EWParams::new(0.15, 0.8, 0.91).unwrap();
    let mut rng = RngStream::new(3);
    let mut xs: Vec<f64> = (0..50_000).map(|_| p.sample(&mut rng)).collect();
    let d = ks_statistic(&mut xs, |x| p.cdf(x).unwrap());
    assert!(ks_pvalue(d, xs.len()) > 0.01);
}

#[test]
fn documented_mode_approximation_near_argmax() {
    let p = EWParams::new(1.8, 1.4, 0.5).unwrap();
    let Mode::Interior(m) = p.mode() else { panic!("expected an interior mode") };
    assert!((m - 1.668).abs() < 1e-3);
    let argmax = (1..=200_000)
        .map(|k| 20.0 * k as f64 / 200_000.0)
        .max_by(|a, b| p.pdf(*a).unwrap().total_cmp(&p.pdf(*b).unwrap()))
        .unwrap();
    assert!((argmax - m).abs() <= 0.1 * argmax, "{argmax} vs {m}");
}

#[test]
fn density_shape_in_boundary_free_regimes() {
    // alpha beta < 1: density grows without bound at the origin
    let p = EWParams::new(1.2, 0.8, 1.0).unwrap();
    assert_eq!(p.mode(), Mode::Unbounded);
    assert!(p.pdf(1e-10).unwrap() > p.pdf(1e-6).unwrap());
    // exponential: monotone decreasing from the origin
    let e = EWParams::new(1.0, 1.0, 1.0).unwrap();
    assert_eq!(e.mode(), Mode::AtZero);
    assert!((1..100).all(|k| e.pdf(k as f64 * 0.05).unwrap() < e.pdf((k - 1) as f64 * 0.05 + 1e-9).unwrap()));
}

fn params() -> impl Strategy<Value = EWParams> {
    (-1.5f64..2.0, -1.2f64..1.8, -2.0f64..2.0)
        .prop_map(|(a, b, l)| EWParams::new(a.exp(), b.exp(), l.exp()).unwrap())
}

proptest! {
    #[test]
    fn quantile_round_trip(p in params(), u in 1e-6f64..(1.0 - 1e-6)) {
        let x = p.quantile(u).unwrap();
        prop_assert!((p.cdf(x).unwrap() - u).abs() < 1e-10);
    }

    #[test]
    fn cdf_is_monotone_and_bounded(p in params(), x in 1e-3f64..50.0, dx in 1e-6f64..1.0) {
        let a = p.cdf(x).unwrap();
        let b = p.cdf(x + dx).unwrap();
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(a <= b);
    }

    #[test]
    fn maximum_cdf_is_power(p in params(), k in 1usize..30, x in 1e-2f64..20.0) {
        let lhs = p.maximum_of(k).ln_cdf(x).unwrap();
        let rhs = k as f64 * p.ln_cdf(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn log_pdf_matches_pdf(p in params(), x in 1e-2f64..20.0) {
        let lp = p.ln_pdf(x).unwrap();
        let direct = p.alpha * p.beta * p.lambda * (p.lambda * x).powf(p.beta - 1.0)
            * (1.0 - (-(p.lambda * x).powf(p.beta)).exp()).powf(p.alpha - 1.0)
            * (-(p.lambda * x).powf(p.beta)).exp();
        if direct > 1e-250 && direct.is_finite() {
            prop_assert!((lp - direct.ln()).abs() < 1e-8 * lp.abs().max(1.0));
        }
    }

    #[test]
    fn mode_classification_matches_alpha_beta(p in params()) {
        let ab = p.alpha * p.beta;
        match p.mode() {
            Mode::Interior(m) => prop_assert!(ab > 1.0 && m > 0.0),
            Mode::Unbounded => prop_assert!(ab < 1.0),
            Mode::AtZero | Mode::Boundary(_) => prop_assert!(ab == 1.0),
        }
    }
}
