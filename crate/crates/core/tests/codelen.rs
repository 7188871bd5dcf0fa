use bsc::codelen::{
    bernoulli_nml_codelen, bernoulli_nml_complexity, categorical_nml_codelen, counting_codelen,
    integer_codelen, lnml_codelen, lnml_complexity, lnml_estimator, log2_multinomial_complexity,
    multinomial_complexity,
};
use bsc::BetaLuckiness;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn binom(n: u64, m: u64) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Sum of maximized Bernoulli likelihoods over all 2^n sequences.
fn bernoulli_normalizer_by_enumeration(n: u32) -> f64 {
    (0u64..1 << n)
        .map(|seq| {
            let m = seq.count_ones() as f64;
            let n = n as f64;
            let p = |c: f64| if c == 0.0 { 1.0 } else { (c / n).powf(c) };
            p(m) * p(n - m)
        })
        .sum()
}

#[test]
fn integer_code_iterated_logs() {
    for k in 1..2000u64 {
        let mut expected = 2.865;
        let mut term = (k as f64).log2();
        while term > 0.0 {
            expected += term;
            term = term.log2();
        }
        assert!(close(integer_codelen(k).unwrap(), expected, 1e-12), "k={k}");
    }
    assert!(integer_codelen(0).is_err());
}

#[test]
fn spec_examples_small_cases() {
    assert!(close(multinomial_complexity(2, 2).unwrap(), 2.5, 1e-12));
    assert!(close(multinomial_complexity(1, 3).unwrap(), 3.0, 1e-12));
    assert!(close(
        categorical_nml_codelen(&[2, 0], 2).unwrap(),
        2.5f64.log2(),
        1e-12
    ));
    assert!(close(
        categorical_nml_codelen(&[1, 1], 2).unwrap(),
        2.0 + 2.5f64.log2(),
        1e-12
    ));
    assert_eq!(categorical_nml_codelen(&[7], 1).unwrap(), 0.0);
    assert!(close(
        bernoulli_nml_codelen(1, 2).unwrap(),
        2.0 + 2.5f64.log2(),
        1e-12
    ));
    let c4 = bernoulli_normalizer_by_enumeration(4);
    assert!(close(
        bernoulli_nml_codelen(4, 4).unwrap(),
        c4.log2(),
        1e-12
    ));
    assert!(close(
        counting_codelen(1, 3).unwrap(),
        2.0 + 3f64.log2(),
        1e-12
    ));
    assert!(close(
        counting_codelen(2, 4).unwrap(),
        5f64.log2() + 6f64.log2(),
        1e-12
    ));
}

#[test]
fn bernoulli_complexity_matches_enumeration() {
    assert_eq!(bernoulli_nml_complexity(0), 0.0);
    for n in 1..=16 {
        let oracle = bernoulli_normalizer_by_enumeration(n).log2();
        assert!(
            close(bernoulli_nml_complexity(n as u64), oracle, 1e-10),
            "n={n}"
        );
    }
}

#[test]
fn bernoulli_is_binary_multinomial() {
    for n in 1..300 {
        let via_multinomial = log2_multinomial_complexity(n, 2).unwrap();
        assert!(
            close(bernoulli_nml_complexity(n), via_multinomial, 1e-9),
            "n={n}"
        );
    }
}

#[test]
fn large_n_stays_finite() {
    let c = log2_multinomial_complexity(1_000_000, 8).unwrap();
    assert!(c.is_finite() && c > 0.0);
    assert!(bernoulli_nml_complexity(1_000_000).is_finite());
    assert!(counting_codelen(500_000, 1_000_000).unwrap().is_finite());
}

/// Term-by-term evaluation of the LNML normalizer with the oracle's own
/// estimator: interior stationary point, clamped to `[1/(2n), 1 - 1/(2n)]`
/// because the Jeffreys-shaped luckiness diverges at zero.
fn jeffreys_oracle(m: u64, n: u64, lambda: f64) -> (f64, f64) {
    let (a, b) = (0.5, 0.5);
    let fit = |m: u64| {
        let lo = 0.5 / n as f64;
        let alpha = m as f64 + a - 1.0;
        let beta = (n - m) as f64 + b + lambda - 1.0;
        let rho = if alpha <= 0.0 {
            lo
        } else if beta <= 0.0 {
            1.0 - lo
        } else {
            (alpha / (alpha + beta)).clamp(lo, 1.0 - lo)
        };
        rho.powf(alpha) * (1.0 - rho).powf(beta)
    };
    let normalizer: f64 = (0..=n).map(|j| binom(n, j) * fit(j)).sum();
    (normalizer.log2(), -fit(m).log2() + normalizer.log2())
}

#[test]
fn lnml_matches_direct_sum() {
    for &lambda in &[0.2, 0.5, 1.0, 3.0, 10.0] {
        let prior = BetaLuckiness::with_lambda(lambda).unwrap();
        for n in 1..=24 {
            for m in 0..=n {
                let (complexity, codelen) = jeffreys_oracle(m, n, lambda);
                assert!(close(lnml_complexity(n, &prior), complexity, 1e-9));
                assert!(close(lnml_codelen(m, n, &prior).unwrap(), codelen, 1e-9));
            }
        }
    }
}

#[test]
fn lnml_two_term_case() {
    let prior = BetaLuckiness::with_lambda(1.0).unwrap();
    // n = 1: both counts estimate 1/2, luckiness (1/2)^(-1/2) (1/2)^(1/2) = 1.
    let expected = (0.5f64 + 0.5).log2();
    assert!(close(lnml_complexity(1, &prior), expected, 1e-12));
}

#[test]
fn lnml_estimator_spec_examples() {
    let flat = BetaLuckiness::new(1.0, 1.0, 1e-12).unwrap();
    for n in 1..20u64 {
        for m in 0..=n {
            let rho = lnml_estimator(m, n, &flat).unwrap();
            assert!(close(rho, m as f64 / n as f64, 1e-9));
        }
    }
    let jeffreys = BetaLuckiness::with_lambda(1.0).unwrap();
    for n in 1..20u64 {
        let expected = (n as f64 - 0.5) / n as f64;
        assert!(close(
            lnml_estimator(n, n, &jeffreys).unwrap(),
            expected,
            1e-12
        ));
    }
    assert!(lnml_estimator(0, 0, &jeffreys).is_err());
    assert!(lnml_estimator(3, 2, &jeffreys).is_err());
}

#[test]
fn lnml_nonnegative_up_to_100() {
    for &lambda in &[0.1, 1.0, 5.0, 100.0] {
        let prior = BetaLuckiness::with_lambda(lambda).unwrap();
        for n in 1..=100 {
            for m in 0..=n {
                let v = lnml_codelen(m, n, &prior).unwrap();
                assert!(
                    v.is_finite() && v >= -1e-12,
                    "m={m} n={n} lambda={lambda}: {v}"
                );
            }
        }
    }
}

// n = 0 is pinned to 0 by convention; the unnormalized luckiness can put
// n = 1 below that for large lambda, so the sweep starts at 1.
#[test]
fn lnml_complexity_nondecreasing_in_n() {
    for &lambda in &[0.1, 0.5, 1.0, 5.0, 50.0] {
        let prior = BetaLuckiness::with_lambda(lambda).unwrap();
        let values: Vec<f64> = (1..=80).map(|n| lnml_complexity(n, &prior)).collect();
        assert!(
            values.windows(2).all(|w| w[1] >= w[0] - 1e-12),
            "lambda={lambda}"
        );
    }
}

#[test]
fn fixed_k4_decreasing_over_benchmark_lambdas() {
    let v: Vec<f64> = [0.5, 1.0, 5.0]
        .iter()
        .map(|&l| lnml_complexity(16, &BetaLuckiness::with_lambda(l).unwrap()))
        .collect();
    assert!(v[0] > v[1] && v[1] > v[2], "{v:?}");
}

proptest! {
    #[test]
    fn counting_symmetric(n in 0u64..5000, frac in 0.0f64..=1.0) {
        let m = (frac * n as f64) as u64;
        let a = counting_codelen(m, n).unwrap();
        let b = counting_codelen(n - m, n).unwrap();
        prop_assert!(close(a, b, 1e-9));
    }

    #[test]
    fn codes_nonnegative(n in 0u64..3000, frac in 0.0f64..=1.0) {
        let m = (frac * n as f64) as u64;
        prop_assert!(bernoulli_nml_codelen(m, n).unwrap() >= 0.0);
        prop_assert!(counting_codelen(m, n).unwrap() >= 0.0);
    }

    #[test]
    fn categorical_is_entropy_plus_complexity(counts in prop::collection::vec(0u64..40, 1..6)) {
        let k = counts.len() as u64;
        let n: u64 = counts.iter().sum();
        let entropy: f64 = counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| -(c as f64) * (c as f64 / n as f64).log2())
            .sum();
        let expected = entropy + log2_multinomial_complexity(n, k).unwrap();
        prop_assert!(close(categorical_nml_codelen(&counts, k).unwrap(), expected, 1e-9));
    }

    #[test]
    fn multinomial_increasing_in_k(n in 1u64..400, k in 1u64..12) {
        let a = log2_multinomial_complexity(n, k).unwrap();
        let b = log2_multinomial_complexity(n, k + 1).unwrap();
        prop_assert!(b > a);
    }
}
