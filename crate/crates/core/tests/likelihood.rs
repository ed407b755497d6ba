mod common;

use common::{ew_log_support, integrate, integrate_positive, log_uniform};
use ewmix::orderstats::{
    conditional_log_density, hierarchical_log_density, joint_log_density, length_log_pmf,
    log_likelihood, order_stat_marginal_pdf, sample_sequence,
};
use ewmix::{Atom, EWParams, RngStream, Sequence};
use proptest::prelude::*;

fn random_params(rng: &mut RngStream) -> EWParams {
    EWParams::new(
        log_uniform(rng, 0.2, 6.0),
        log_uniform(rng, 0.4, 5.0),
        log_uniform(rng, 0.2, 5.0),
    )
    .unwrap()
}

#[test]
fn joint_equals_hierarchical_on_random_sequences() {
    let mut rng = RngStream::new(201);
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let n = 1 + rng.below(25);
        let w = 0.05 + 0.9 * rng.unit();
        let seq = sample_sequence(&mut rng, &Atom { ew: p, w }, n).unwrap();
        let a = joint_log_density(&seq, &p);
        let b = hierarchical_log_density(&seq, &p);
        assert!((a - b).abs() < 1e-10, "{p:?} {seq:?}: {a} vs {b}");
    }
}

fn simplex_mass(p: &EWParams, n: usize, l: usize, prefix: &[f64], upper: f64, tol: f64) -> f64 {
    let (lo, _) = ew_log_support(p);
    integrate(
        |s| {
            let x = s.exp();
            let mut v = prefix.to_vec();
            v.push(x);
            let inner = if v.len() == l {
                joint_log_density(&Sequence::new(n, v).unwrap(), p).exp()
            } else {
                simplex_mass(p, n, l, &v, s, tol)
            };
            inner * x
        },
        lo,
        upper,
        tol,
    )
}

#[test]
fn joint_density_integrates_to_one_over_ordered_simplex() {
    let params = [
        EWParams::new(0.64, 1.7, 0.4).unwrap(),
        EWParams::new(2.5, 3.3, 0.35).unwrap(),
        EWParams::new(1.0, 1.0, 1.0).unwrap(),
    ];
    for p in &params {
        let (_, hi) = ew_log_support(p);
        for n in 1..=6 {
            for l in 1..=3.min(n) {
                let mass = simplex_mass(p, n, l, &[], hi, 1e-7);
                assert!((mass - 1.0).abs() < 1e-4, "{p:?} n={n} l={l}: {mass}");
            }
        }
    }
}

#[test]
fn conditional_density_integrates_to_one() {
    let p = EWParams::new(0.7, 1.4, 0.6).unwrap();
    let (lo, _) = ew_log_support(&p);
    for (j, n) in [(1, 2), (3, 10), (9, 10)] {
        let upper: f64 = 2.0;
        let mass = integrate(
            |s| conditional_log_density(s.exp(), upper, j, n, &p).unwrap().exp() * s.exp(),
            lo,
            upper.ln(),
            1e-10,
        );
        assert!((mass - 1.0).abs() < 1e-7, "j={j} n={n}: {mass}");
    }
}

#[test]
fn order_statistic_marginals_integrate_to_one() {
    let p = EWParams::new(5.73, 10.88, 1.17).unwrap();
    for j in [1, 5, 10] {
        let mass = integrate_positive(|x| order_stat_marginal_pdf(x, j, 10, &p).unwrap(), &p, 1e-10);
        assert!((mass - 1.0).abs() < 1e-7, "j={j}: {mass}");
    }
}

#[test]
fn sampled_lengths_follow_the_pmf() {
    let atom = Atom::new(1.0, 1.0, 1.0, 0.3).unwrap();
    let n = 8;
    let draws = 100_000;
    let mut counts = vec![0.0; n];
    let mut rng = RngStream::new(9);
    for _ in 0..draws {
        counts[sample_sequence(&mut rng, &atom, n).unwrap().l() - 1] += 1.0;
    }
    let expected: Vec<f64> = (1..=n)
        .map(|l| draws as f64 * length_log_pmf(l, n, 0.3).unwrap().exp())
        .collect();
    let (stat, df) = common::pooled_chi_square(&counts, &expected);
    assert!(common::chi_square_pvalue(stat, df) > 0.01, "{stat} on {df}");
}

proptest! {
    #[test]
    fn length_pmf_sums_to_one(n in 1usize..60, w in 0.0f64..=1.0) {
        let s: f64 = (1..=n).map(|l| length_log_pmf(l, n, w).unwrap().exp()).sum();
        prop_assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn likelihood_factorises(
        a in 0.2f64..5.0, b in 0.3f64..4.0, lam in 0.2f64..4.0, w in 0.01f64..0.99,
        n in 1usize..30, seed in any::<u64>(),
    ) {
        let p = EWParams::new(a, b, lam).unwrap();
        let seq = sample_sequence(&mut RngStream::new(seed), &Atom { ew: p, w }, n).unwrap();
        let total = log_likelihood(&seq, &p, w);
        let parts = length_log_pmf(seq.l(), n, w).unwrap() + joint_log_density(&seq, &p);
        prop_assert!((total - parts).abs() < 1e-9 * total.abs().max(1.0));
    }

    #[test]
    fn joint_is_hierarchical(
        a in 0.2f64..5.0, b in 0.3f64..4.0, lam in 0.2f64..4.0,
        n in 1usize..30, seed in any::<u64>(),
    ) {
        let p = EWParams::new(a, b, lam).unwrap();
        let seq = sample_sequence(&mut RngStream::new(seed), &Atom { ew: p, w: 0.5 }, n).unwrap();
        prop_assert!((joint_log_density(&seq, &p) - hierarchical_log_density(&seq, &p)).abs() < 1e-10);
    }

    #[test]
    fn sampled_sequences_are_valid(seed in any::<u64>(), n in 1usize..40, w in 0.01f64..0.99) {
        let atom = Atom::new(0.15, 0.8, 0.91, w).unwrap();
        let seq = sample_sequence(&mut RngStream::new(seed), &atom, n).unwrap();
        prop_assert!(seq.l() >= 1 && seq.l() <= n);
        prop_assert!(seq.values().windows(2).all(|v| v[0] > v[1]));
        prop_assert_eq!(seq.padded().len(), n);
    }
}
